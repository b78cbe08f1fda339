#include "ltvobs/gramian.hpp"

#include <cmath>

#include "ltvobs/error.hpp"
#include "ltvobs/linalg.hpp"

namespace ltv {

namespace {

void check_sigmas(std::span<const double> sigmas) {
  double prev = 0.0;
  for (double s : sigmas) {
    if (!std::isfinite(s) || !(s > prev)) {
      throw ConfigError("sigma values must be positive, finite and increasing");
    }
    prev = s;
  }
}

void check_plant(const TvMatrix& A) {
  if (A.empty() || !A.is_square()) throw DimensionMismatch("plant matrix must be square");
}

double block_error(const Eigen::VectorXd& err, Eigen::Index offset, Eigen::Index len) {
  return len == 0 ? 0.0 : err.segment(offset, len).maxCoeff();
}

}  // namespace

std::string to_string(GramianKind k) {
  switch (k) {
    case GramianKind::Observability:
      return "M";
    case GramianKind::Controllability:
      return "W";
    case GramianKind::Transported:
      return "K";
  }
  return "?";
}

GramianKind parse_gramian_kind(const std::string& s) {
  if (s == "M") return GramianKind::Observability;
  if (s == "W") return GramianKind::Controllability;
  if (s == "K") return GramianKind::Transported;
  throw ConfigError("Gramian kind must be M, W or K, got '" + s + "'");
}

bool GramianResult::is_psd() const { return lambda_min >= -kPsdFloor * (1.0 + lambda_max); }

GramianResult make_gramian_result(GramianKind kind, double t, double sigma, const Eigen::MatrixXd& raw,
                                  double quad_error) {
  GramianResult r;
  r.kind = kind;
  r.t = t;
  r.sigma = sigma;
  r.matrix = symmetrize(raw);
  r.quad_error_estimate = quad_error;
  std::tie(r.lambda_min, r.lambda_max) = extreme_eigenvalues(r.matrix);
  return r;
}

std::vector<GramianResult> obs_gramian_series(const TvMatrix& A, const TvMatrix& C, double t,
                                              std::span<const double> sigmas,
                                              const IntegratorConfig& cfg) {
  check_plant(A);
  if (C.empty() || C.cols() != A.rows()) throw DimensionMismatch("C must have n columns");
  check_sigmas(sigmas);
  const int n = A.rows();
  const Eigen::Index nn = n * n;

  // State: [Phi(s,t), M] both column-major n x n.
  const OdeRhs rhs = [&A, &C, n, nn](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::MatrixXd a = A.eval(s);
    const Eigen::MatrixXd c = C.eval(s);
    Eigen::Map<const Eigen::MatrixXd> phi(y.data(), n, n);
    dy.resize(2 * nn);
    Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n).noalias() = a * phi;
    const Eigen::MatrixXd cphi = c * phi;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + nn, n, n).noalias() = cphi.transpose() * cphi;
  };

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(2 * nn);
  for (int i = 0; i < n; ++i) y0(i * n + i) = 1.0;
  std::vector<double> stops(sigmas.size());
  for (std::size_t k = 0; k < sigmas.size(); ++k) stops[k] = t + sigmas[k];

  const OdeResult r = integrate(rhs, t, y0, stops, cfg);
  std::vector<GramianResult> out;
  out.reserve(sigmas.size());
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const Eigen::MatrixXd m = Eigen::Map<const Eigen::MatrixXd>(r.at_stops[k].data() + nn, n, n);
    out.push_back(make_gramian_result(GramianKind::Observability, t, sigmas[k], m,
                                      block_error(r.error_at_stops[k], nn, nn)));
  }
  return out;
}

ControllabilitySeries ctrl_gramian_series(const TvMatrix& A, const TvMatrix& B, double t,
                                          std::span<const double> sigmas,
                                          const IntegratorConfig& cfg) {
  check_plant(A);
  if (B.empty() || B.rows() != A.rows()) throw DimensionMismatch("B must have n rows");
  check_sigmas(sigmas);
  const int n = A.rows();
  const Eigen::Index nn = n * n;

  // State: [X = Phi(t,s), Y = Phi(s,t), W]. X' = -X A, Y' = A Y, W' = X B B^T X^T.
  const OdeRhs rhs = [&A, &B, n, nn](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::MatrixXd a = A.eval(s);
    const Eigen::MatrixXd b = B.eval(s);
    Eigen::Map<const Eigen::MatrixXd> x(y.data(), n, n);
    Eigen::Map<const Eigen::MatrixXd> fwd(y.data() + nn, n, n);
    dy.resize(3 * nn);
    Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n).noalias() = -x * a;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + nn, n, n).noalias() = a * fwd;
    const Eigen::MatrixXd xb = x * b;
    Eigen::Map<Eigen::MatrixXd>(dy.data() + 2 * nn, n, n).noalias() = xb * xb.transpose();
  };

  Eigen::VectorXd y0 = Eigen::VectorXd::Zero(3 * nn);
  for (int i = 0; i < n; ++i) {
    y0(i * n + i) = 1.0;
    y0(nn + i * n + i) = 1.0;
  }
  std::vector<double> stops(sigmas.size());
  for (std::size_t k = 0; k < sigmas.size(); ++k) stops[k] = t + sigmas[k];

  const OdeResult r = integrate(rhs, t, y0, stops, cfg);
  ControllabilitySeries out;
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    const Eigen::VectorXd& state = r.at_stops[k];
    const Eigen::MatrixXd fwd = Eigen::Map<const Eigen::MatrixXd>(state.data() + nn, n, n);
    const Eigen::MatrixXd w = Eigen::Map<const Eigen::MatrixXd>(state.data() + 2 * nn, n, n);
    const double w_err = block_error(r.error_at_stops[k], 2 * nn, nn);
    const GramianResult wr = make_gramian_result(GramianKind::Controllability, t, sigmas[k], w, w_err);
    const double gain = spectral_norm(fwd);
    out.K.push_back(make_gramian_result(GramianKind::Transported, t, sigmas[k],
                                        fwd * wr.matrix * fwd.transpose(), gain * gain * w_err));
    out.W.push_back(wr);
  }
  return out;
}

GramianResult obs_gramian(const TvMatrix& A, const TvMatrix& C, double t, double sigma,
                          const IntegratorConfig& cfg) {
  const double s[1] = {sigma};
  return obs_gramian_series(A, C, t, s, cfg).front();
}

GramianResult ctrl_gramian(const TvMatrix& A, const TvMatrix& B, double t, double sigma,
                           const IntegratorConfig& cfg) {
  const double s[1] = {sigma};
  return ctrl_gramian_series(A, B, t, s, cfg).W.front();
}

GramianResult transported_gramian(const TvMatrix& A, const TvMatrix& B, double t, double sigma,
                                  const IntegratorConfig& cfg) {
  const double s[1] = {sigma};
  return ctrl_gramian_series(A, B, t, s, cfg).K.front();
}

}  // namespace ltv
