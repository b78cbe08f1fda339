#pragma once

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ltv {

enum class OdeMethod {
  Dopri5,  // adaptive Runge-Kutta 5(4), Dormand-Prince pair
  Rk4,     // classical fixed-step order 4
};

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  OdeMethod method = OdeMethod::Dopri5;
  double max_step = std::numeric_limits<double>::infinity();
  double fixed_step = 1e-3;  // Rk4 only
  long max_steps = 5'000'000;

  // Throws ConfigError on non-positive tolerances or step sizes.
  void validate() const;
};

std::string to_string(OdeMethod m);
OdeMethod parse_ode_method(const std::string& name);

using OdeRhs = std::function<void(double t, const Eigen::VectorXd& y, Eigen::VectorXd& dydt)>;

/// Piecewise-polynomial interpolant produced alongside a solve.
/// Each segment stores y(t0 + theta*h) = y0 + sum_k coeff.col(k) * theta^(k+1).
class DenseOutput {
 public:
  bool empty() const { return segments_.empty(); }
  double t_first() const;
  double t_last() const;
  bool covers(double t) const;
  Eigen::VectorXd operator()(double t) const;

 private:
  friend class OdeStepper;
  struct Segment {
    double t0;
    double h;
    Eigen::VectorXd y0;
    Eigen::MatrixXd coeff;  // dim x 4
  };
  std::vector<Segment> segments_;
};

struct OdeResult {
  std::vector<Eigen::VectorXd> at_stops;
  // Sum over accepted steps of |local error estimate|, per component.
  Eigen::VectorXd local_error_sum;
  // Snapshot of local_error_sum when each stop was reached.
  std::vector<Eigen::VectorXd> error_at_stops;
  long steps = 0;
  long rejected = 0;
};

/// Integrates y' = f(t, y) from (t0, y0) and returns the state at every stop.
/// Stops must be monotone and on one side of t0 (backward integration is a
/// decreasing stop list). Steps are truncated so every stop is hit exactly.
/// Throws IntegrationFailure on step-size underflow, a non-finite state or
/// exhausting max_steps.
OdeResult integrate(const OdeRhs& f, double t0, const Eigen::VectorXd& y0,
                    std::span<const double> stops, const IntegratorConfig& cfg,
                    DenseOutput* dense = nullptr);

}  // namespace ltv
