#pragma once

// Characteristic polynomials, their roots, transfer functions and the
// classification of eigenvalues into the classical aircraft modes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flightstab/errors.hpp"

namespace flightstab {

using Complex = std::complex<double>;

// Real polynomial, coefficients in ascending degree. Trailing zeros are
// dropped so the leading coefficient is nonzero (the zero polynomial is {0}).
class Polynomial {
 public:
  Polynomial() : c_{0.0} {}
  explicit Polynomial(std::vector<double> coefficients) : c_(std::move(coefficients)) {
    normalize();
  }
  Polynomial(std::initializer_list<double> coefficients) : c_(coefficients) { normalize(); }

  int degree() const { return static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const { return c_; }
  double operator[](int k) const { return k >= 0 && k <= degree() ? c_[k] : 0.0; }
  double leading() const { return c_.back(); }
  bool is_zero() const { return c_.size() == 1 && c_[0] == 0.0; }

  template <typename T>
  T operator()(T s) const {
    T acc = T(c_.back());
    for (int k = degree() - 1; k >= 0; --k) acc = acc * s + T(c_[k]);
    return acc;
  }

  Polynomial derivative() const {
    if (degree() == 0) return Polynomial{0.0};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t k = 1; k < c_.size(); ++k) d[k - 1] = c_[k] * double(k);
    return Polynomial(std::move(d));
  }

  double coefficient_scale() const {
    double m = 0.0;
    for (double v : c_) m = std::max(m, std::abs(v));
    return m;
  }

  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[int(k)] + b[int(k)];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] = a[int(k)] - b[int(k)];
    return Polynomial(std::move(r));
  }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    std::vector<double> r(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) r[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(r));
  }
  bool operator==(const Polynomial&) const = default;

 private:
  void normalize() {
    if (c_.empty()) c_.push_back(0.0);
    while (c_.size() > 1 && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

namespace detail {

struct FaddeevLeverrier {
  std::vector<double> coefficients;      // ascending, monic
  std::vector<Eigen::MatrixXd> adjugate; // M_1..M_n: adj(sI - A) = sum M_k s^(n-k)
};

inline FaddeevLeverrier faddeev_leverrier(const Eigen::MatrixXd& a) {
  const auto n = a.rows();
  FaddeevLeverrier out;
  out.coefficients.assign(static_cast<std::size_t>(n) + 1, 0.0);
  out.coefficients[n] = 1.0;
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k <= n; ++k) {
    m = a * m + out.coefficients[n - k + 1] * id;
    out.adjugate.push_back(m);
    out.coefficients[n - k] = -(a * m).trace() / double(k);
  }
  return out;
}

}  // namespace detail

// det(sI - A) by the Faddeev-LeVerrier recurrence.
inline Polynomial char_poly(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw InputError("char_poly needs a square matrix");
  if (a.rows() > 8) throw InputError("char_poly supports matrices up to 8x8");
  return Polynomial(detail::faddeev_leverrier(a).coefficients);
}

namespace detail {

// Pairs near-conjugate roots exactly and snaps near-real roots onto the axis.
inline void symmetrize_conjugates(std::vector<Complex>& roots) {
  const auto tol = [](const Complex& z) { return 1e-9 * std::max(1.0, std::abs(z)); };
  std::vector<bool> done(roots.size(), false);
  std::vector<std::size_t> order(roots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(roots[a].imag()) < std::abs(roots[b].imag());
  });
  for (std::size_t oi = 0; oi < order.size(); ++oi) {
    const std::size_t i = order[oi];
    if (done[i]) continue;
    if (std::abs(roots[i].imag()) <= tol(roots[i])) {
      roots[i] = {roots[i].real(), 0.0};
      done[i] = true;
      continue;
    }
    std::size_t best = roots.size();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < roots.size(); ++j) {
      if (j == i || done[j] || roots[j].imag() * roots[i].imag() >= 0.0) continue;
      const double d = std::abs(roots[j] - std::conj(roots[i]));
      if (d < best_d) best_d = d, best = j;
    }
    done[i] = true;
    if (best == roots.size()) continue;
    const Complex avg = 0.5 * (roots[i] + std::conj(roots[best]));
    roots[i] = avg;
    roots[best] = std::conj(avg);
    done[best] = true;
  }
}

}  // namespace detail

// All complex roots with multiplicity, by Aberth-Ehrlich simultaneous
// iteration followed by a Newton polish in extended precision.
inline std::vector<Complex> poly_roots(const Polynomial& p) {
  if (p.degree() < 1) throw InputError("poly_roots needs degree >= 1");
  std::vector<Complex> roots;
  std::vector<double> c = p.coefficients();
  std::size_t lead_zero = 0;
  while (lead_zero < c.size() - 1 && c[lead_zero] == 0.0) ++lead_zero;
  for (std::size_t k = 0; k < lead_zero; ++k) roots.emplace_back(0.0, 0.0);
  c.erase(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(lead_zero));
  const Polynomial q(c);
  const int n = q.degree();

  if (n == 1) {
    roots.emplace_back(-c[0] / c[1], 0.0);
  } else if (n >= 2) {
    const Polynomial dq = q.derivative();
    // Initial guesses spread on a circle of the geometric-mean root radius.
    const double radius = std::pow(std::abs(c[0] / c[n]), 1.0 / n);
    std::vector<Complex> z(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k)
      z[k] = std::polar(radius, 2.0 * std::numbers::pi * k / n + 0.4);
    for (int iter = 0; iter < 1000; ++iter) {
      double worst = 0.0;
      for (int k = 0; k < n; ++k) {
        const Complex pv = q(z[k]);
        if (pv == 0.0) continue;
        const Complex ratio = pv / dq(z[k]);
        Complex sum = 0.0;
        for (int j = 0; j < n; ++j)
          if (j != k) sum += 1.0 / (z[k] - z[j]);
        const Complex w = ratio / (1.0 - ratio * sum);
        if (std::isfinite(w.real()) && std::isfinite(w.imag())) z[k] -= w;
        worst = std::max(worst, std::abs(w) / std::max(1.0, std::abs(z[k])));
      }
      if (worst < 1e-16) break;
    }
    using LComplex = std::complex<long double>;
    for (auto& root : z) {
      LComplex x(root.real(), root.imag());
      for (int it = 0; it < 3; ++it) {
        const LComplex f = q(x);
        const LComplex df = dq(x);
        if (std::abs(df) == 0.0L) break;
        const LComplex step = f / df;
        if (!std::isfinite(static_cast<double>(std::abs(step)))) break;
        // only accept the step when it improves the residual
        if (std::abs(q(x - step)) <= std::abs(f)) x -= step;
      }
      root = Complex(static_cast<double>(x.real()), static_cast<double>(x.imag()));
    }
    roots.insert(roots.end(), z.begin(), z.end());
  }
  detail::symmetrize_conjugates(roots);
  std::sort(roots.begin(), roots.end(), [](const Complex& a, const Complex& b) {
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  return roots;
}

enum class ModeLabel { Phugoid, ShortPeriod, DutchRoll, RollSubsidence, Spiral, Other };

inline std::string to_string(ModeLabel l) {
  switch (l) {
    case ModeLabel::Phugoid: return "Phugoid";
    case ModeLabel::ShortPeriod: return "ShortPeriod";
    case ModeLabel::DutchRoll: return "DutchRoll";
    case ModeLabel::RollSubsidence: return "RollSubsidence";
    case ModeLabel::Spiral: return "Spiral";
    case ModeLabel::Other: return "Other";
  }
  return "Other";
}

inline std::optional<ModeLabel> mode_label_from_string(const std::string& s) {
  for (auto l : {ModeLabel::Phugoid, ModeLabel::ShortPeriod, ModeLabel::DutchRoll,
                 ModeLabel::RollSubsidence, ModeLabel::Spiral, ModeLabel::Other})
    if (to_string(l) == s) return l;
  return std::nullopt;
}

inline constexpr double kDefaultEpsilon = 0.01;

// One eigenvalue, or one conjugate pair stored with its positive-imaginary member.
struct EigenMode {
  Complex eigenvalue;
  double natural_frequency = 0.0;  // |lambda|
  double damping_ratio = 0.0;      // -Re(lambda)/|lambda|
  std::optional<double> period;    // 2 pi / Im(lambda), oscillatory modes only
  double time_to_equilibrium = 0.0;
  double envelope_time = 0.0;      // continuous ln(1/eps)/|sigma|
  ModeLabel label = ModeLabel::Other;

  bool oscillatory() const { return eigenvalue.imag() != 0.0; }
  bool stable() const { return eigenvalue.real() < 0.0; }
};

// Settling time to a fraction eps of the initial amplitude. Oscillatory modes
// are counted in whole periods, n* = ceil(ln(1/eps) / Delta), with Delta the
// per-period logarithmic decrement.
inline double time_to_equilibrium(const EigenMode& mode, double eps = kDefaultEpsilon) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  const double sigma = mode.eigenvalue.real();
  if (sigma >= 0.0) return std::numeric_limits<double>::infinity();
  const double target = std::log(1.0 / eps);
  if (!mode.oscillatory()) return target / -sigma;
  const double period = 2.0 * std::numbers::pi / std::abs(mode.eigenvalue.imag());
  const double decrement = -sigma * period;
  return std::ceil(target / decrement) * period;
}

inline double envelope_time(const EigenMode& mode, double eps = kDefaultEpsilon) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  const double sigma = mode.eigenvalue.real();
  if (sigma >= 0.0) return std::numeric_limits<double>::infinity();
  return std::log(1.0 / eps) / -sigma;
}

inline EigenMode make_mode(Complex lambda, double eps = kDefaultEpsilon) {
  EigenMode m;
  m.eigenvalue = lambda;
  m.natural_frequency = std::abs(lambda);
  m.damping_ratio = m.natural_frequency > 0.0 ? -lambda.real() / m.natural_frequency : 0.0;
  if (lambda.imag() != 0.0) m.period = 2.0 * std::numbers::pi / std::abs(lambda.imag());
  m.time_to_equilibrium = time_to_equilibrium(m, eps);
  m.envelope_time = envelope_time(m, eps);
  return m;
}

inline void refresh_times(EigenMode& m, double eps) {
  m.time_to_equilibrium = time_to_equilibrium(m, eps);
  m.envelope_time = envelope_time(m, eps);
}

// Eigenvalues of A as roots of its characteristic polynomial, conjugate
// pairs collapsed into one record.
inline std::vector<EigenMode> eigenmodes(const Eigen::MatrixXd& a, double eps = kDefaultEpsilon) {
  if (a.rows() != a.cols()) throw InputError("eigenmodes needs a square matrix");
  std::vector<EigenMode> out;
  if (a.rows() == 0) return out;
  for (const auto& z : poly_roots(char_poly(a)))
    if (z.imag() >= 0.0) out.push_back(make_mode(z, eps));
  return out;
}

struct ClassifiedModes {
  std::vector<EigenMode> longitudinal;
  std::vector<EigenMode> lateral;
  std::vector<std::string> diagnostics;

  std::vector<EigenMode> all() const {
    std::vector<EigenMode> v = longitudinal;
    v.insert(v.end(), lateral.begin(), lateral.end());
    return v;
  }
  const EigenMode* find(ModeLabel l) const {
    for (const auto* set : {&longitudinal, &lateral})
      for (const auto& m : *set)
        if (m.label == l) return &m;
    return nullptr;
  }
};

// Longitudinal: two oscillatory pairs, the faster one is the short period.
// Lateral: one oscillatory pair (Dutch roll) and two real roots, the larger
// |sigma| being roll subsidence and the other the spiral. Any other pattern
// is labelled Other with a diagnostic.
inline ClassifiedModes classify_modes(std::vector<EigenMode> longitudinal,
                                      std::vector<EigenMode> lateral) {
  ClassifiedModes out;
  for (auto& m : longitudinal) m.label = ModeLabel::Other;
  for (auto& m : lateral) m.label = ModeLabel::Other;

  std::vector<EigenMode*> osc;
  for (auto& m : longitudinal)
    if (m.oscillatory()) osc.push_back(&m);
  if (osc.size() == 2 && longitudinal.size() == 2) {
    auto* fast = osc[0]->natural_frequency >= osc[1]->natural_frequency ? osc[0] : osc[1];
    auto* slow = fast == osc[0] ? osc[1] : osc[0];
    fast->label = ModeLabel::ShortPeriod;
    slow->label = ModeLabel::Phugoid;
  } else {
    out.diagnostics.push_back("longitudinal roots do not form two oscillatory pairs (" +
                              std::to_string(osc.size()) + " oscillatory, " +
                              std::to_string(longitudinal.size() - osc.size()) + " real)");
  }

  std::vector<EigenMode*> lat_osc, lat_real;
  for (auto& m : lateral) (m.oscillatory() ? lat_osc : lat_real).push_back(&m);
  if (lat_osc.size() == 1 && lat_real.size() == 2) {
    lat_osc[0]->label = ModeLabel::DutchRoll;
    const bool first_faster =
        std::abs(lat_real[0]->eigenvalue.real()) >= std::abs(lat_real[1]->eigenvalue.real());
    (first_faster ? lat_real[0] : lat_real[1])->label = ModeLabel::RollSubsidence;
    (first_faster ? lat_real[1] : lat_real[0])->label = ModeLabel::Spiral;
  } else {
    out.diagnostics.push_back("lateral roots do not form one oscillatory pair and two real roots (" +
                              std::to_string(lat_osc.size()) + " oscillatory, " +
                              std::to_string(lat_real.size()) + " real)");
  }

  for (const auto& m : longitudinal)
    if (m.label != ModeLabel::Other && !m.stable())
      out.diagnostics.push_back(to_string(m.label) + " is unstable");
  for (const auto& m : lateral)
    if (m.label != ModeLabel::Other && !m.stable())
      out.diagnostics.push_back(to_string(m.label) + " is unstable");
  out.longitudinal = std::move(longitudinal);
  out.lateral = std::move(lateral);
  return out;
}

struct TransferFunction {
  Polynomial numerator;
  Polynomial denominator;

  Complex operator()(Complex s) const { return numerator(s) / denominator(s); }
};

// Response of state `output` to the input column b, by Cramer's rule on
// (sI - A) x = b. The numerator comes from the adjugate that the
// Faddeev-LeVerrier recurrence produces alongside the determinant.
inline TransferFunction transfer_function(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                          int output) {
  if (a.rows() != a.cols() || b.size() != a.rows())
    throw InputError("transfer_function: dimension mismatch");
  if (output < 0 || output >= a.rows()) throw InputError("transfer_function: output out of range");
  if (a.rows() > 8) throw InputError("transfer_function supports systems up to order 8");
  const auto fl = detail::faddeev_leverrier(a);
  const auto n = a.rows();
  std::vector<double> num(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index k = 1; k <= n; ++k) num[n - k] = (fl.adjugate[k - 1] * b)[output];
  return {Polynomial(std::move(num)), Polynomial(fl.coefficients)};
}

}  // namespace flightstab
