#pragma once

// Reference computations that avoid the library's ODE integrator: scalar
// closed forms via Gauss-Legendre quadrature, and a sampled-Simpson Gramian.

#include <cmath>
#include <functional>

#include <Eigen/Core>

#include "ltvobs/flow.hpp"
#include "ltvobs/tv_matrix.hpp"

namespace ltv::testing {

// Composite 5-point Gauss-Legendre on `panels` equal panels.
inline double gauss_legendre(const std::function<double(double)>& f, double lo, double hi,
                             int panels = 400) {
  static const double x[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                              0.9061798459386640};
  static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                              0.2369268850561891, 0.2369268850561891};
  const double h = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * h;
    for (int k = 0; k < 5; ++k) sum += w[k] * f(mid + 0.5 * h * x[k]);
  }
  return 0.5 * h * sum;
}

// exp(int_tau^t a(s) ds) for a scalar plant.
inline double scalar_transition(const std::function<double(double)>& a, double t, double tau) {
  return std::exp(gauss_legendre(a, tau, t));
}

// M(t, t+sigma) by composite Simpson over `samples` points (odd) with
// Phi(s, t) taken from one ODE sweep.
inline Eigen::MatrixXd simpson_obs_gramian(const TvMatrix& A, const TvMatrix& C, double t,
                                           double sigma, int samples = 2049) {
  std::vector<double> s(static_cast<std::size_t>(samples));
  const double h = sigma / (samples - 1);
  for (int k = 0; k < samples; ++k) s[static_cast<std::size_t>(k)] = t + k * h;
  s.back() = t + sigma;
  const std::vector<Eigen::MatrixXd> phi = transition_from(A, t, s);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(A.rows(), A.rows());
  for (int k = 0; k < samples; ++k) {
    const double wk = (k == 0 || k == samples - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const Eigen::MatrixXd cphi = C.eval(s[static_cast<std::size_t>(k)]) * phi[static_cast<std::size_t>(k)];
    acc += wk * cphi.transpose() * cphi;
  }
  return acc * h / 3.0;
}

// W(t, t+sigma) by composite Simpson with Phi(t, s) from one backward-looking
// sweep based at t.
inline Eigen::MatrixXd simpson_ctrl_gramian(const TvMatrix& A, const TvMatrix& B, double t,
                                            double sigma, int samples = 2049) {
  std::vector<double> s(static_cast<std::size_t>(samples));
  const double h = sigma / (samples - 1);
  for (int k = 0; k < samples; ++k) s[static_cast<std::size_t>(k)] = t + k * h;
  s.back() = t + sigma;
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(A.rows(), A.rows());
  // Phi(t, s) = Psi(s, t)^T where Psi solves the adjoint plant -A^T.
  const std::vector<Eigen::MatrixXd> psi = transition_from(transpose(negate(A)), t, s);
  for (int k = 0; k < samples; ++k) {
    const double wk = (k == 0 || k == samples - 1) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const Eigen::MatrixXd pb = psi[static_cast<std::size_t>(k)].transpose() * B.eval(s[static_cast<std::size_t>(k)]);
    acc += wk * pb * pb.transpose();
  }
  return acc * h / 3.0;
}

inline double rel_diff(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / (1.0 + b.cwiseAbs().maxCoeff());
}

}  // namespace ltv::testing
