#include "ltvobs/ode.hpp"

#include <algorithm>
#include <cmath>

#include "ltvobs/error.hpp"

namespace ltv {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0};
constexpr double kA[6][5] = {
    {1.0 / 5.0, 0, 0, 0, 0},
    {3.0 / 40.0, 9.0 / 40.0, 0, 0, 0},
    {44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0, 0},
    {19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0},
    {9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0},
};
constexpr double kB[6] = {35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
                          11.0 / 84.0};
// Fifth-order minus embedded fourth-order weights, stages 1..7.
constexpr double kE[7] = {-71.0 / 57600.0, 0.0,           71.0 / 16695.0, -71.0 / 1920.0,
                          17253.0 / 339200.0, -22.0 / 525.0, 1.0 / 40.0};
// Continuous extension: y(theta) = y0 + h * sum_i k_i * sum_j P[i][j] theta^(j+1).
constexpr double kP[7][4] = {
    {1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0},
    {0.0, 0.0, 0.0, 0.0},
    {0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0},
    {0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0},
    {0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0},
    {0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0},
    {0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0},
};

double scaled_rms(const Eigen::VectorXd& v, const Eigen::VectorXd& scale) {
  if (v.size() == 0) return 0.0;
  return std::sqrt((v.array() / scale.array()).square().mean());
}

}  // namespace

class OdeStepper {
 public:
  static void push(DenseOutput* dense, double t0, double h, const Eigen::VectorXd& y0,
                   Eigen::MatrixXd coeff) {
    if (dense != nullptr) dense->segments_.push_back({t0, h, y0, std::move(coeff)});
  }
};

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("integrator tolerances must be positive");
  if (!(max_step > 0.0)) throw ConfigError("max_step must be positive");
  if (method == OdeMethod::Rk4 && !(fixed_step > 0.0)) throw ConfigError("fixed_step must be positive");
  if (max_steps <= 0) throw ConfigError("max_steps must be positive");
}

std::string to_string(OdeMethod m) { return m == OdeMethod::Dopri5 ? "dopri5" : "rk4"; }

OdeMethod parse_ode_method(const std::string& name) {
  if (name == "dopri5" || name == "rk45") return OdeMethod::Dopri5;
  if (name == "rk4") return OdeMethod::Rk4;
  throw ConfigError("unknown integrator method '" + name + "'");
}

double DenseOutput::t_first() const { return segments_.front().t0; }

double DenseOutput::t_last() const {
  const auto& s = segments_.back();
  return s.t0 + s.h;
}

bool DenseOutput::covers(double t) const {
  if (segments_.empty()) return false;
  const double a = t_first();
  const double b = t_last();
  return t >= std::min(a, b) && t <= std::max(a, b);
}

Eigen::VectorXd DenseOutput::operator()(double t) const {
  if (!covers(t)) throw IntegrationFailure(t, "dense output queried outside its range");
  const bool forward = segments_.front().h > 0.0;
  // Segments are ordered along the direction of integration.
  auto it = std::lower_bound(segments_.begin(), segments_.end(), t,
                             [forward](const Segment& s, double v) {
                               const double end = s.t0 + s.h;
                               return forward ? end < v : end > v;
                             });
  if (it == segments_.end()) it = std::prev(segments_.end());
  const double theta = (t - it->t0) / it->h;
  Eigen::VectorXd y = it->y0;
  double p = theta;
  for (int k = 0; k < 4; ++k) {
    y += it->coeff.col(k) * p;
    p *= theta;
  }
  return y;
}

namespace {

class Dopri5 {
 public:
  Dopri5(const OdeRhs& f, const IntegratorConfig& cfg, Eigen::Index dim) : f_(f), cfg_(cfg) {
    for (auto& k : k_) k.resize(dim);
    tmp_.resize(dim);
  }

  OdeResult run(double t0, const Eigen::VectorXd& y0, std::span<const double> stops,
                DenseOutput* dense) {
    OdeResult res;
    res.local_error_sum = Eigen::VectorXd::Zero(y0.size());
    res.at_stops.reserve(stops.size());
    double t = t0;
    Eigen::VectorXd y = y0;
    if (stops.empty()) return res;

    const double dir = stops.back() >= t0 ? 1.0 : -1.0;
    f_(t, y, k_[0]);
    check_finite(k_[0], t);
    double h = initial_step(t, y, dir, std::fabs(stops.back() - t0));

    for (double stop : stops) {
      while (dir * (stop - t) > 0.0) {
        if (res.steps + res.rejected >= cfg_.max_steps) {
          throw IntegrationFailure(t, "maximum step count exceeded");
        }
        const double remaining = stop - t;
        const bool truncated = std::fabs(h) >= std::fabs(remaining);
        const double step = truncated ? remaining : h;
        if (std::fabs(step) < 1e-14 * std::max(1.0, std::fabs(t)) && !truncated) {
          throw IntegrationFailure(t, "step size underflow");
        }
        Eigen::VectorXd y_new;
        const double err = attempt(t, y, step, y_new);
        if (err <= 1.0) {
          res.local_error_sum += tmp_.cwiseAbs();
          if (dense != nullptr) {
            Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(y.size(), 4);
            for (int i = 0; i < 7; ++i) {
              for (int j = 0; j < 4; ++j) {
                if (kP[i][j] != 0.0) coeff.col(j) += (step * kP[i][j]) * k_[i];
              }
            }
            OdeStepper::push(dense, t, step, y, std::move(coeff));
          }
          t = truncated ? stop : t + step;
          y = std::move(y_new);
          k_[0] = k_[6];  // FSAL
          ++res.steps;
          const double grow = err == 0.0 ? 10.0 : std::min(10.0, 0.9 * std::pow(err, -0.2));
          // A truncated step says nothing about the natural step length.
          if (!truncated || std::fabs(step * grow) > std::fabs(h)) h = step * grow;
        } else {
          ++res.rejected;
          const double shrink = std::isfinite(err) ? std::max(0.2, 0.9 * std::pow(err, -0.2)) : 0.2;
          h = step * shrink;
          if (std::fabs(h) < 1e-14 * std::max(1.0, std::fabs(t))) {
            throw IntegrationFailure(t, std::isfinite(err) ? "step size underflow" : "non-finite state");
          }
        }
        h = dir * std::min(std::fabs(h), cfg_.max_step);
      }
      res.at_stops.push_back(y);
      res.error_at_stops.push_back(res.local_error_sum);
    }
    return res;
  }

 private:
  // One trial step; returns the scaled error norm and leaves the error
  // vector in tmp_.
  double attempt(double t, const Eigen::VectorXd& y, double h, Eigen::VectorXd& y_new) {
    for (int s = 1; s < 6; ++s) {
      tmp_ = y;
      for (int j = 0; j < s; ++j) {
        if (kA[s - 1][j] != 0.0) tmp_ += (h * kA[s - 1][j]) * k_[j];
      }
      f_(t + kC[s] * h, tmp_, k_[s]);
    }
    y_new = y;
    for (int j = 0; j < 6; ++j) {
      if (kB[j] != 0.0) y_new += (h * kB[j]) * k_[j];
    }
    f_(t + h, y_new, k_[6]);
    if (!y_new.allFinite() || !k_[6].allFinite()) {
      tmp_.setConstant(std::numeric_limits<double>::infinity());
      return std::numeric_limits<double>::infinity();
    }
    tmp_.setZero();
    for (int j = 0; j < 7; ++j) {
      if (kE[j] != 0.0) tmp_ += (h * kE[j]) * k_[j];
    }
    const Eigen::VectorXd scale =
        (cfg_.abs_tol + cfg_.rel_tol * y.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array()).matrix();
    return scaled_rms(tmp_, scale);
  }

  double initial_step(double t, const Eigen::VectorXd& y, double dir, double span) {
    const Eigen::VectorXd scale = (cfg_.abs_tol + cfg_.rel_tol * y.cwiseAbs().array()).matrix();
    const double d0 = scaled_rms(y, scale);
    const double d1 = scaled_rms(k_[0], scale);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min({h0, span, cfg_.max_step});
    tmp_ = y + dir * h0 * k_[0];
    Eigen::VectorXd f1(y.size());
    f_(t + dir * h0, tmp_, f1);
    const double d2 = scaled_rms(f1 - k_[0], scale) / h0;
    double h1;
    if (d1 <= 1e-15 && d2 <= 1e-15) {
      h1 = std::max(1e-6, h0 * 1e-3);
    } else {
      h1 = std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
    }
    double h = std::min({100.0 * h0, h1, cfg_.max_step});
    if (span > 0.0) h = std::min(h, span);
    return dir * std::max(h, 1e-12);
  }

  static void check_finite(const Eigen::VectorXd& v, double t) {
    if (!v.allFinite()) throw IntegrationFailure(t, "non-finite state");
  }

  const OdeRhs& f_;
  const IntegratorConfig& cfg_;
  Eigen::VectorXd k_[7];
  Eigen::VectorXd tmp_;
};

class Rk4 {
 public:
  Rk4(const OdeRhs& f, const IntegratorConfig& cfg, Eigen::Index dim) : f_(f), cfg_(cfg) {
    for (auto& k : k_) k.resize(dim);
  }

  OdeResult run(double t0, const Eigen::VectorXd& y0, std::span<const double> stops,
                DenseOutput* dense) {
    OdeResult res;
    res.local_error_sum = Eigen::VectorXd::Zero(y0.size());
    double t = t0;
    Eigen::VectorXd y = y0;
    if (stops.empty()) return res;
    const double dir = stops.back() >= t0 ? 1.0 : -1.0;
    const double h_nominal = dir * std::min(cfg_.fixed_step, cfg_.max_step);

    for (double stop : stops) {
      while (dir * (stop - t) > 0.0) {
        if (res.steps >= cfg_.max_steps) throw IntegrationFailure(t, "maximum step count exceeded");
        const bool truncated = std::fabs(h_nominal) >= std::fabs(stop - t);
        const double h = truncated ? stop - t : h_nominal;
        // Step doubling: the two half steps carry the solution, the full step
        // only feeds the error estimate.
        const Eigen::VectorXd full = step(t, y, h);
        const Eigen::VectorXd mid = step(t, y, 0.5 * h);
        Eigen::VectorXd y_new = step(t + 0.5 * h, mid, 0.5 * h);
        if (!y_new.allFinite()) throw IntegrationFailure(t, "non-finite state");
        res.local_error_sum += ((y_new - full) / 15.0).cwiseAbs();
        if (dense != nullptr) {
          Eigen::VectorXd f0(y.size()), f1(y.size());
          f_(t, y, f0);
          f_(t + h, y_new, f1);
          Eigen::MatrixXd coeff = Eigen::MatrixXd::Zero(y.size(), 4);
          coeff.col(0) = h * f0;
          coeff.col(1) = 3.0 * (y_new - y) - 2.0 * h * f0 - h * f1;
          coeff.col(2) = 2.0 * (y - y_new) + h * f0 + h * f1;
          OdeStepper::push(dense, t, h, y, std::move(coeff));
        }
        t = truncated ? stop : t + h;
        y = std::move(y_new);
        ++res.steps;
      }
      res.at_stops.push_back(y);
      res.error_at_stops.push_back(res.local_error_sum);
    }
    return res;
  }

 private:
  Eigen::VectorXd step(double t, const Eigen::VectorXd& y, double h) {
    f_(t, y, k_[0]);
    f_(t + 0.5 * h, y + 0.5 * h * k_[0], k_[1]);
    f_(t + 0.5 * h, y + 0.5 * h * k_[1], k_[2]);
    f_(t + h, y + h * k_[2], k_[3]);
    return y + (h / 6.0) * (k_[0] + 2.0 * k_[1] + 2.0 * k_[2] + k_[3]);
  }

  const OdeRhs& f_;
  const IntegratorConfig& cfg_;
  Eigen::VectorXd k_[4];
};

}  // namespace

OdeResult integrate(const OdeRhs& f, double t0, const Eigen::VectorXd& y0,
                    std::span<const double> stops, const IntegratorConfig& cfg,
                    DenseOutput* dense) {
  cfg.validate();
  if (!std::isfinite(t0) || !y0.allFinite()) throw IntegrationFailure(t0, "non-finite initial data");
  if (!stops.empty()) {
    const double dir = stops.back() >= t0 ? 1.0 : -1.0;
    double prev = t0;
    for (double s : stops) {
      if (!std::isfinite(s) || dir * (s - prev) < 0.0) {
        throw IntegrationFailure(s, "stops must be finite and monotone away from the initial time");
      }
      prev = s;
    }
  }
  if (cfg.method == OdeMethod::Rk4) return Rk4(f, cfg, y0.size()).run(t0, y0, stops, dense);
  return Dopri5(f, cfg, y0.size()).run(t0, y0, stops, dense);
}

}  // namespace ltv
