#pragma once

// Time-domain simulation of linear models, peak-sampled logarithmic
// decrement, and the logistic and straight-line fits used on sweep data.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "flightstab/errors.hpp"
#include "flightstab/modes.hpp"

namespace flightstab {

struct Trajectory {
  std::vector<double> time;
  std::vector<Eigen::VectorXd> states;

  std::size_t size() const { return time.size(); }
  std::vector<double> channel(int k) const {
    std::vector<double> out;
    out.reserve(states.size());
    for (const auto& s : states) out.push_back(s[k]);
    return out;
  }
};

// Largest step the integrator accepts for A: 0.05/max|lambda| and T/40 for
// the shortest oscillation period.
inline double max_stable_step(const Eigen::MatrixXd& a) {
  double bound = std::numeric_limits<double>::infinity();
  if (a.rows() == 0) return bound;
  for (const auto& m : eigenmodes(a)) {
    if (m.natural_frequency > 0.0) bound = std::min(bound, 0.05 / m.natural_frequency);
    if (m.period) bound = std::min(bound, *m.period / 40.0);
  }
  return bound;
}

// Classical fourth-order Runge-Kutta on x' = A x.
inline Trajectory simulate_linear(const Eigen::MatrixXd& a, const Eigen::VectorXd& x0, double dt,
                                  double total_time) {
  if (a.rows() != a.cols() || x0.size() != a.rows())
    throw InputError("simulate_linear: dimension mismatch");
  if (!(dt > 0.0) || !(total_time >= 0.0)) throw InputError("simulate_linear: bad time grid");
  const double bound = max_stable_step(a);
  if (dt > bound * (1.0 + 1e-12))
    throw InputError("simulate_linear: dt " + std::to_string(dt) + " exceeds accuracy bound " +
                     std::to_string(bound));
  const auto steps = static_cast<std::size_t>(std::llround(total_time / dt));
  Trajectory tr;
  tr.time.reserve(steps + 1);
  tr.states.reserve(steps + 1);
  Eigen::VectorXd x = x0;
  tr.time.push_back(0.0);
  tr.states.push_back(x);
  for (std::size_t k = 1; k <= steps; ++k) {
    const Eigen::VectorXd k1 = a * x;
    const Eigen::VectorXd k2 = a * (x + 0.5 * dt * k1);
    const Eigen::VectorXd k3 = a * (x + 0.5 * dt * k2);
    const Eigen::VectorXd k4 = a * (x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    tr.time.push_back(double(k) * dt);
    tr.states.push_back(x);
  }
  return tr;
}

struct DecrementEstimate {
  double decrement = 0.0;  // mean ln(peak_k / peak_k+1)
  std::vector<double> peak_times;
  std::vector<double> peak_values;
  double period = 0.0;
  int cycles = 0;          // n* = ceil(ln(1/eps) / decrement)
  double time_to_equilibrium = 0.0;
  bool unstable = false;
};

inline DecrementEstimate log_decrement(const Trajectory& tr, int channel,
                                       double eps = kDefaultEpsilon) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  if (tr.size() < 3) throw InputError("log_decrement: trajectory too short");
  if (channel < 0 || channel >= tr.states.front().size())
    throw InputError("log_decrement: channel out of range");
  const auto x = tr.channel(channel);
  double amp = 0.0;
  for (double v : x) amp = std::max(amp, std::abs(v));
  const double floor = 1e-9 * amp;

  DecrementEstimate est;
  for (std::size_t i = 1; i + 1 < x.size(); ++i) {
    if (!(x[i] > x[i - 1] && x[i] >= x[i + 1] && x[i] > floor)) continue;
    const double y0 = x[i - 1], y1 = x[i], y2 = x[i + 1];
    const double curv = y0 - 2.0 * y1 + y2;
    double offset = 0.0, value = y1;
    if (curv < 0.0) {
      offset = 0.5 * (y0 - y2) / curv;
      value = y1 - 0.25 * (y0 - y2) * offset;
    }
    const double dt = tr.time[i + 1] - tr.time[i];
    est.peak_times.push_back(tr.time[i] + offset * dt);
    est.peak_values.push_back(value);
  }
  if (est.peak_values.size() < 3)
    throw NumericalError("log_decrement: fewer than 3 peaks above the noise floor");

  const std::size_t n = est.peak_values.size();
  double sum = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) sum += std::log(est.peak_values[k] / est.peak_values[k + 1]);
  est.decrement = sum / double(n - 1);
  est.period = (est.peak_times.back() - est.peak_times.front()) / double(n - 1);
  if (est.decrement <= 0.0) {
    est.unstable = true;
    est.time_to_equilibrium = std::numeric_limits<double>::infinity();
  } else {
    est.cycles = static_cast<int>(std::ceil(std::log(1.0 / eps) / est.decrement));
    est.time_to_equilibrium = est.cycles * est.period;
  }
  return est;
}

using Point = std::pair<double, double>;

struct LogisticFit {
  double n0 = 0.0;
  double r = 0.0;
  double k = 0.0;
  double rss = 0.0;
  double r_squared = 0.0;
  int iterations = 0;
  bool converged = false;
};

// N(t) = K N0 / ((K - N0) exp(-r t) + N0)
inline double logistic_eval(const LogisticFit& f, double t) {
  const double den = (f.k - f.n0) * std::exp(-f.r * t) + f.n0;
  if (den == 0.0 || !std::isfinite(den))
    throw NumericalError("logistic_eval: pole at t = " + std::to_string(t));
  return f.k * f.n0 / den;
}

// dN/dt = r N (1 - N/K)
inline double logistic_rate(const LogisticFit& f, double n) {
  if (f.k == 0.0) throw InputError("logistic_rate: K must be nonzero");
  return f.r * n * (1.0 - n / f.k);
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;

  double operator()(double x) const { return slope * x + intercept; }
};

inline LinearFit fit_linear(const std::vector<Point>& pts) {
  if (pts.size() < 2) throw InputError("fit_linear: need at least 2 points");
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= double(pts.size());
  my /= double(pts.size());
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (!(sxx > 0.0)) throw InputError("fit_linear: abscissae are all equal");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0.0;
  for (const auto& [x, y] : pts) ssr += (y - f(x)) * (y - f(x));
  f.r_squared = syy > 0.0 ? 1.0 - ssr / syy : (ssr == 0.0 ? 1.0 : 0.0);
  return f;
}

namespace detail {

inline double logistic_rss(const std::vector<Point>& pts, double n0, double r, double k) {
  double s = 0.0;
  for (const auto& [t, y] : pts) {
    const double den = (k - n0) * std::exp(-r * t) + n0;
    if (den == 0.0) return std::numeric_limits<double>::infinity();
    const double e = k * n0 / den - y;
    s += e * e;
  }
  return std::isfinite(s) ? s : std::numeric_limits<double>::infinity();
}

// Levenberg-Marquardt on (N0, r, K) with the analytic Jacobian of N(t).
inline LogisticFit refine_logistic(const std::vector<Point>& pts, Eigen::Vector3d theta) {
  const auto m = static_cast<Eigen::Index>(pts.size());
  double y2 = 0.0;
  for (const auto& p : pts) y2 += p.second * p.second;
  const double yn = std::sqrt(y2);

  auto residuals = [&](const Eigen::Vector3d& th, Eigen::VectorXd& r, Eigen::MatrixXd& j) {
    r.resize(m);
    j.resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = pts[i].first;
      const double n0 = th[0], rate = th[1], k = th[2];
      const double e = std::exp(-rate * t);
      const double den = (k - n0) * e + n0;
      const double d2 = den * den;
      r[i] = k * n0 / den - pts[i].second;
      j(i, 0) = k * k * e / d2;
      j(i, 1) = k * n0 * (k - n0) * t * e / d2;
      j(i, 2) = n0 * n0 * (1.0 - e) / d2;
    }
  };

  LogisticFit fit;
  Eigen::VectorXd r;
  Eigen::MatrixXd j;
  residuals(theta, r, j);
  double rss = r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::infinity();
  double lambda = 1e-3;
  for (int it = 0; it < 200 && std::isfinite(rss); ++it) {
    fit.iterations = it + 1;
    const Eigen::Vector3d grad = j.transpose() * r;
    double gscaled = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double cn = j.col(c).norm();
      if (cn > 0.0) gscaled = std::max(gscaled, std::abs(grad[c]) / (cn * yn));
    }
    if (gscaled < 1e-10 || rss <= 1e-30 * y2) {
      fit.converged = true;
      break;
    }
    const Eigen::Vector3d diag = (j.transpose() * j).diagonal().cwiseMax(1e-300);
    bool improved = false;
    for (int tries = 0; tries < 40; ++tries) {
      Eigen::MatrixXd aug(m + 3, 3);
      Eigen::VectorXd rhs(m + 3);
      aug.topRows(m) = j;
      aug.bottomRows(3) = (lambda * diag).cwiseSqrt().asDiagonal();
      rhs.head(m) = -r;
      rhs.tail(3).setZero();
      const Eigen::Vector3d step = aug.colPivHouseholderQr().solve(rhs);
      const Eigen::Vector3d trial = theta + step;
      const double trial_rss = logistic_rss(pts, trial[0], trial[1], trial[2]);
      if (trial_rss < rss) {
        const double rel_step = step.cwiseAbs().cwiseQuotient(theta.cwiseAbs().cwiseMax(1e-300)).maxCoeff();
        theta = trial;
        rss = trial_rss;
        residuals(theta, r, j);
        lambda = std::max(lambda / 3.0, 1e-15);
        improved = true;
        if (rel_step < 1e-15) fit.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    if (!improved) {
      // No descent direction left at working precision.
      fit.converged = gscaled < 1e-6;
      break;
    }
    if (fit.converged) break;
  }
  fit.n0 = theta[0];
  fit.r = theta[1];
  fit.k = theta[2];
  fit.rss = rss;
  return fit;
}

}  // namespace detail

// Least-squares fit of the logistic solution. Starting points come from the
// data: a plateau estimate for K with a log-linearized rate, and a scan over
// r of the reciprocal form 1/N = e^{-rt}/N0 + (1 - e^{-rt})/K, which is linear
// in (1/N0, 1/K) for fixed r. Every start is refined and the best kept.
inline LogisticFit fit_logistic(std::vector<Point> pts) {
  if (pts.size() < 4) throw InputError("fit_logistic: need at least 4 points");
  for (const auto& [t, y] : pts)
    if (!std::isfinite(t) || !std::isfinite(y)) throw InputError("fit_logistic: non-finite data");
  std::sort(pts.begin(), pts.end());

  double ymean = 0.0;
  for (const auto& p : pts) ymean += p.second;
  ymean /= double(pts.size());
  double sst = 0.0;
  for (const auto& p : pts) sst += (p.second - ymean) * (p.second - ymean);

  auto finish = [&](LogisticFit f) {
    f.r_squared = sst > 0.0 ? 1.0 - f.rss / sst : (f.rss == 0.0 ? 1.0 : 0.0);
    return f;
  };

  const bool constant = std::all_of(pts.begin(), pts.end(),
                                    [&](const Point& p) { return p.second == pts[0].second; });
  if (constant) {
    if (pts[0].second == 0.0) throw InputError("fit_logistic: all ordinates are zero");
    LogisticFit f;
    f.n0 = f.k = pts[0].second;
    f.converged = true;
    return finish(f);
  }

  const double t0 = pts.front().first;
  const double span = pts.back().first - t0;
  if (!(span > 0.0)) throw InputError("fit_logistic: abscissae are all equal");

  std::vector<Eigen::Vector3d> starts;

  // Plateau start.
  {
    const std::size_t tail = std::max<std::size_t>(1, pts.size() / 5);
    double k0 = 0.0;
    for (std::size_t i = pts.size() - tail; i < pts.size(); ++i) k0 += pts[i].second;
    k0 /= double(tail);
    std::vector<Point> lin;
    for (std::size_t i = 0; i + tail < pts.size(); ++i) {
      const double z = k0 / pts[i].second - 1.0;
      if (pts[i].second != 0.0 && z != 0.0 && std::isfinite(z))
        lin.emplace_back(pts[i].first, std::log(std::abs(z)));
    }
    if (lin.size() >= 2 && k0 != 0.0) {
      try {
        const double r0 = -fit_linear(lin).slope;
        const double y1 = pts.front().second;
        const double e = std::exp(-r0 * t0);
        const double den = k0 + y1 * e - y1;
        if (den != 0.0 && std::isfinite(r0)) starts.emplace_back(y1 * k0 * e / den, r0, k0);
      } catch (const InputError&) {
      }
    }
  }

  // Reciprocal-linear scan over r.
  bool has_zero = std::any_of(pts.begin(), pts.end(), [](const Point& p) { return p.second == 0.0; });
  if (!has_zero) {
    std::vector<std::pair<double, Eigen::Vector3d>> scan;
    for (int sgn : {-1, 1})
      for (int e = -40; e <= 40; ++e) {
        const double r = sgn * std::pow(10.0, e / 10.0) / span;
        Eigen::MatrixXd a(static_cast<Eigen::Index>(pts.size()), 2);
        Eigen::VectorXd b(static_cast<Eigen::Index>(pts.size()));
        for (std::size_t i = 0; i < pts.size(); ++i) {
          // Rows scaled by y^2 so the residual approximates the error in N, not 1/N.
          const double ex = std::exp(-r * pts[i].first), w = pts[i].second * pts[i].second;
          a(i, 0) = w * ex;
          a(i, 1) = w * (1.0 - ex);
          b[i] = pts[i].second;
        }
        if (!a.allFinite()) continue;
        const Eigen::Vector2d ab = a.colPivHouseholderQr().solve(b);
        if (ab[0] == 0.0 || ab[1] == 0.0 || !ab.allFinite()) continue;
        const Eigen::Vector3d th(1.0 / ab[0], r, 1.0 / ab[1]);
        const double rss = detail::logistic_rss(pts, th[0], th[1], th[2]);
        if (std::isfinite(rss)) scan.emplace_back(rss, th);
      }
    std::sort(scan.begin(), scan.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < std::min<std::size_t>(4, scan.size()); ++i)
      starts.push_back(scan[i].second);
  }

  if (starts.empty()) throw NumericalError("fit_logistic: no usable starting point");

  LogisticFit best;
  best.rss = std::numeric_limits<double>::infinity();
  for (const auto& s : starts) {
    const auto f = detail::refine_logistic(pts, s);
    if (f.rss < best.rss) best = f;
  }
  if (!std::isfinite(best.rss)) throw NumericalError("fit_logistic: all starts diverged");
  return finish(best);
}

}  // namespace flightstab
