#pragma once

#include <map>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

/// Phi(t, tau) of x' = A(t) x: the solution at t of M' = A(s) M, M(tau) = I.
/// Backward requests (t < tau) integrate in reverse.
Eigen::MatrixXd transition(const TvMatrix& plant, double t, double tau,
                           const IntegratorConfig& cfg = {});

/// Psi(t, tau) of the adjoint plant x' = -A(t)^T x, integrated directly.
/// Equals transition(plant, tau, t)^T up to integration error.
Eigen::MatrixXd transition_dual(const TvMatrix& plant, double t, double tau,
                                const IntegratorConfig& cfg = {});

/// Phi(t_k, tau) for every t_k in `times` with one integration sweep per
/// direction. `times` may be in any order.
std::vector<Eigen::MatrixXd> transition_from(const TvMatrix& plant, double tau,
                                             std::span<const double> times,
                                             const IntegratorConfig& cfg = {});

// Right-hand side of M' = A(s) M on a column-major flattened n x n state.
OdeRhs transition_rhs(const TvMatrix& plant);

/// Transition evaluator with a per-base-point cache of dense solutions.
///
/// warm_up() is the only mutating call. Afterwards every query is a const
/// read, so concurrent evaluation is safe without locking. Queries whose base
/// point was not warmed up (or that fall outside the cached span) are solved
/// directly and not cached.
class Transition {
 public:
  explicit Transition(TvMatrix plant, IntegratorConfig cfg = {});

  const TvMatrix& plant() const { return plant_; }
  const IntegratorConfig& config() const { return cfg_; }
  int dim() const { return plant_.rows(); }

  // Solves from every tau in `taus` forward to t_hi and backward to t_lo.
  void warm_up(std::span<const double> taus, double t_lo, double t_hi);
  bool cached(double tau) const { return cache_.count(tau) != 0; }

  Eigen::MatrixXd operator()(double t, double tau) const;

 private:
  struct Solved {
    DenseOutput forward;
    DenseOutput backward;
  };

  TvMatrix plant_;
  IntegratorConfig cfg_;
  std::map<double, Solved> cache_;
};

}  // namespace ltv
