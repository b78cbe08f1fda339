#include "ltvobs/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltvobs/error.hpp"

namespace ltv {

namespace {

Eigen::VectorXd flat_identity(int n) {
  const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  return Eigen::Map<const Eigen::VectorXd>(eye.data(), n * n);
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), n, n);
}

void require_square(const TvMatrix& plant) {
  if (plant.empty() || !plant.is_square()) throw DimensionMismatch("plant matrix must be square");
}

// Integrates Y' = (M - mI)Y and g' = m with m = tr(M)/n, where M is A or -A^T.
// The solution is e^g Y, so a common exponential trend never meets the
// absolute tolerance.
OdeRhs normalized_rhs(const TvMatrix& plant, bool adjoint) {
  const int n = plant.rows();
  return [plant, n, adjoint](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    Eigen::MatrixXd a = plant.eval(s);
    if (adjoint) a = (-a.transpose()).eval();
    const double m = a.trace() / n;
    a.diagonal().array() -= m;
    Eigen::Map<const Eigen::MatrixXd> y_mat(y.data(), n, n);
    dy.resize(n * n + 1);
    Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n).noalias() = a * y_mat;
    dy[n * n] = m;
  };
}

Eigen::VectorXd normalized_start(int n) {
  Eigen::VectorXd y = Eigen::VectorXd::Zero(n * n + 1);
  y.head(n * n) = flat_identity(n);
  return y;
}

Eigen::MatrixXd denormalize(const Eigen::VectorXd& y, int n) {
  return std::exp(y[n * n]) * unflatten(y.head(n * n), n);
}

Eigen::MatrixXd solve_single(const TvMatrix& plant, bool adjoint, double t, double tau,
                             const IntegratorConfig& cfg) {
  const int n = plant.rows();
  if (t == tau) return Eigen::MatrixXd::Identity(n, n);
  const double stop[1] = {t};
  const OdeResult r = integrate(normalized_rhs(plant, adjoint), tau, normalized_start(n), stop, cfg);
  return denormalize(r.at_stops.front(), n);
}

}  // namespace

OdeRhs transition_rhs(const TvMatrix& plant) {
  const int n = plant.rows();
  return [plant, n](double s, const Eigen::VectorXd& y, Eigen::VectorXd& dy) {
    const Eigen::MatrixXd a = plant.eval(s);
    Eigen::Map<const Eigen::MatrixXd> m(y.data(), n, n);
    dy.resize(n * n);
    Eigen::Map<Eigen::MatrixXd>(dy.data(), n, n).noalias() = a * m;
  };
}

Eigen::MatrixXd transition(const TvMatrix& plant, double t, double tau, const IntegratorConfig& cfg) {
  require_square(plant);
  if (!std::isfinite(t) || !std::isfinite(tau)) throw IntegrationFailure(t, "non-finite time");
  return solve_single(plant, false, t, tau, cfg);
}

Eigen::MatrixXd transition_dual(const TvMatrix& plant, double t, double tau,
                                const IntegratorConfig& cfg) {
  require_square(plant);
  if (!std::isfinite(t) || !std::isfinite(tau)) throw IntegrationFailure(t, "non-finite time");
  return solve_single(plant, true, t, tau, cfg);
}

std::vector<Eigen::MatrixXd> transition_from(const TvMatrix& plant, double tau,
                                             std::span<const double> times,
                                             const IntegratorConfig& cfg) {
  require_square(plant);
  const int n = plant.rows();
  const OdeRhs rhs = normalized_rhs(plant, false);
  std::vector<Eigen::MatrixXd> out(times.size());

  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::vector<std::size_t> fwd, bwd;
  for (std::size_t idx : order) {
    if (times[idx] > tau) {
      fwd.push_back(idx);
    } else if (times[idx] < tau) {
      bwd.push_back(idx);
    } else {
      out[idx] = Eigen::MatrixXd::Identity(n, n);
    }
  }
  std::reverse(bwd.begin(), bwd.end());

  for (const auto* list : {&fwd, &bwd}) {
    if (list->empty()) continue;
    std::vector<double> stops;
    for (std::size_t idx : *list) stops.push_back(times[idx]);
    const OdeResult r = integrate(rhs, tau, normalized_start(n), stops, cfg);
    for (std::size_t k = 0; k < list->size(); ++k) out[(*list)[k]] = denormalize(r.at_stops[k], n);
  }
  return out;
}

Transition::Transition(TvMatrix plant, IntegratorConfig cfg)
    : plant_(std::move(plant)), cfg_(cfg) {
  require_square(plant_);
  cfg_.validate();
}

void Transition::warm_up(std::span<const double> taus, double t_lo, double t_hi) {
  const OdeRhs rhs = transition_rhs(plant_);
  const int n = dim();
  for (double tau : taus) {
    Solved solved;
    if (t_hi > tau) {
      const double stop[1] = {t_hi};
      integrate(rhs, tau, flat_identity(n), stop, cfg_, &solved.forward);
    }
    if (t_lo < tau) {
      const double stop[1] = {t_lo};
      integrate(rhs, tau, flat_identity(n), stop, cfg_, &solved.backward);
    }
    cache_[tau] = std::move(solved);
  }
}

Eigen::MatrixXd Transition::operator()(double t, double tau) const {
  const int n = dim();
  if (t == tau) return Eigen::MatrixXd::Identity(n, n);
  const auto it = cache_.find(tau);
  if (it != cache_.end()) {
    const DenseOutput& d = t > tau ? it->second.forward : it->second.backward;
    if (d.covers(t)) return unflatten(d(t), n);
  }
  return solve_single(plant_, false, t, tau, cfg_);
}

}  // namespace ltv
