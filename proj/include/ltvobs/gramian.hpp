#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ltvobs/ode.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv {

enum class GramianKind {
  Observability,    // M(t, t+sigma) = int Phi(s,t)^T C^T C Phi(s,t) ds
  Controllability,  // W(t, t+sigma) = int Phi(t,s) B B^T Phi(t,s)^T ds
  Transported,      // K(t, t+sigma) = Phi(t+sigma,t) W Phi(t+sigma,t)^T
};

std::string to_string(GramianKind k);
// Accepts "M", "W", "K".
GramianKind parse_gramian_kind(const std::string& s);

struct GramianResult {
  GramianKind kind = GramianKind::Observability;
  double t = 0.0;
  double sigma = 0.0;
  Eigen::MatrixXd matrix;  // symmetrized
  double quad_error_estimate = 0.0;
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  // lambda_min >= -1e-8 * (1 + lambda_max)
  bool is_psd() const;
};

// PSD floor applied to lambda_min in every verdict.
constexpr double kPsdFloor = 1e-8;

/// The Gramians are integrated jointly with the transition matrix as one
/// augmented ODE, so a single adaptive error control governs both.
GramianResult obs_gramian(const TvMatrix& A, const TvMatrix& C, double t, double sigma,
                          const IntegratorConfig& cfg = {});
GramianResult ctrl_gramian(const TvMatrix& A, const TvMatrix& B, double t, double sigma,
                           const IntegratorConfig& cfg = {});
GramianResult transported_gramian(const TvMatrix& A, const TvMatrix& B, double t, double sigma,
                                  const IntegratorConfig& cfg = {});

/// M(t, t+sigma_k) for increasing positive sigmas, one integration sweep.
std::vector<GramianResult> obs_gramian_series(const TvMatrix& A, const TvMatrix& C, double t,
                                              std::span<const double> sigmas,
                                              const IntegratorConfig& cfg = {});

struct ControllabilitySeries {
  std::vector<GramianResult> W;
  std::vector<GramianResult> K;
};

/// W and K at t for increasing positive sigmas, one integration sweep.
ControllabilitySeries ctrl_gramian_series(const TvMatrix& A, const TvMatrix& B, double t,
                                          std::span<const double> sigmas,
                                          const IntegratorConfig& cfg = {});

// Symmetrizes and fills the eigenvalue fields.
GramianResult make_gramian_result(GramianKind kind, double t, double sigma,
                                  const Eigen::MatrixXd& raw, double quad_error);

}  // namespace ltv
