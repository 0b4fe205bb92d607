#pragma once

// Rigid-body equations of motion about a trimmed reference, their small
// perturbation linearization, and assembly of the decoupled longitudinal
// (u, w, q, theta) and lateral (v, p, r, phi) state matrices.
//
// Axes are stability axes: x along the trim velocity, y right, z down.

#include <array>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "flightstab/aero.hpp"
#include "flightstab/atmosphere.hpp"
#include "flightstab/errors.hpp"
#include "flightstab/geometry.hpp"
#include "flightstab/modes.hpp"

namespace flightstab {

inline constexpr double kGravity = isa::kGravity;

struct TrimState {
  double ue = 0.0, ve = 0.0, we = 0.0;  // m/s
  double theta = 0.0;                   // rad
  double phi = 0.0;                     // rad
  double pe = 0.0, qe = 0.0, re = 0.0;  // rad/s, nonzero only in a steady turn
  double altitude = 0.0;                // m
  double density = isa::kSeaLevelDensity;
  MassProperties mass;

  double speed() const { return std::sqrt(ue * ue + ve * ve + we * we); }
  double load_factor() const { return 1.0 / std::cos(phi); }
};

struct PerturbationState {
  double u = 0.0, v = 0.0, w = 0.0;
  double p = 0.0, q = 0.0, r = 0.0;
  double phi = 0.0, theta = 0.0, psi = 0.0;
};

struct ForcesMoments {
  double x = 0.0, y = 0.0, z = 0.0;  // N
  double l = 0.0, m = 0.0, n = 0.0;  // N m
};

// Dimensional derivatives in SI units (N per m/s, N m per rad/s, ...),
// not normalized by mass or inertia.
struct DimensionalDerivatives {
  double xu = 0.0, xw = 0.0, xq = 0.0;
  double zu = 0.0, zw = 0.0, zq = 0.0;
  double mu = 0.0, mw = 0.0, mq = 0.0;
  double yv = 0.0, yp = 0.0, yr = 0.0;
  double lv = 0.0, lp = 0.0, lr = 0.0;
  double nv = 0.0, np = 0.0, nr = 0.0;
};

struct LinearModel {
  Eigen::Matrix4d longitudinal = Eigen::Matrix4d::Zero();  // (u, w, q, theta)
  Eigen::Matrix4d lateral = Eigen::Matrix4d::Zero();       // (v, p, r, phi)
  TrimState trim;
};

struct Jacobian2 {
  double alpha1 = 0.0, alpha2 = 0.0, beta1 = 0.0, beta2 = 0.0;

  Eigen::Matrix2d matrix() const {
    Eigen::Matrix2d m;
    m << alpha1, alpha2, beta1, beta2;
    return m;
  }
};

struct ReferenceGeometry {
  double sref = 1.0, cref = 1.0, bref = 1.0;
};

inline ReferenceGeometry reference_of(const AircraftModel& m) { return {m.sref, m.cref, m.bref}; }

// Weight components in the steady state.
inline std::array<double, 3> gravity_components(double mass, double theta_e) {
  return {-mass * kGravity * std::sin(theta_e), 0.0, mass * kGravity * std::cos(theta_e)};
}

inline Eigen::Vector3d gravity_body(double mass, double theta, double phi) {
  return mass * kGravity *
         Eigen::Vector3d(-std::sin(theta), std::cos(theta) * std::sin(phi),
                         std::cos(theta) * std::cos(phi));
}

namespace detail {

struct TotalMotion {
  double u, v, w, p, q, r, phi, theta;
};

inline TotalMotion total_motion(const TrimState& t, const PerturbationState& x) {
  return {t.ue + x.u, t.ve + x.v, t.we + x.w, t.pe + x.p,
          t.qe + x.q, t.re + x.r, t.phi + x.phi, t.theta + x.theta};
}

// Left-hand sides of the six rigid-body equations without external forces.
inline std::array<double, 6> inertial_terms(const MassProperties& mp, const TotalMotion& s,
                                            const PerturbationState& rate) {
  const double m = mp.mass;
  return {
      m * (rate.u - s.r * s.v + s.q * s.w),
      m * (rate.v - s.p * s.w + s.r * s.u),
      m * (rate.w - s.q * s.u + s.p * s.v),
      mp.ix * rate.p - mp.ixz * rate.r + (mp.iz - mp.iy) * s.q * s.r - mp.ixz * s.p * s.q,
      mp.iy * rate.q + (mp.ix - mp.iz) * s.p * s.r + mp.ixz * (s.p * s.p - s.r * s.r),
      mp.iz * rate.r - mp.ixz * rate.p + (mp.iy - mp.ix) * s.p * s.q + mp.ixz * s.q * s.r,
  };
}

inline std::array<double, 2> euler_rates(const TotalMotion& s) {
  return {s.p + (s.q * std::sin(s.phi) + s.r * std::cos(s.phi)) * std::tan(s.theta),
          s.q * std::cos(s.phi) - s.r * std::sin(s.phi)};
}

}  // namespace detail

// Residuals (left minus right side) of the six force and moment equations.
// `fm` holds the perturbation in external force; the trim external force is
// whatever balances the equations at the reference, so the residual vanishes
// there. Gravity is evaluated at the total attitude.
inline std::array<double, 6> eom_residual(const TrimState& trim, const PerturbationState& pert,
                                          const PerturbationState& rate, const ForcesMoments& fm) {
  const auto& mp = trim.mass;
  const auto total = detail::total_motion(trim, pert);
  const auto ref = detail::total_motion(trim, PerturbationState{});
  const auto lhs = detail::inertial_terms(mp, total, rate);
  const auto lhs_e = detail::inertial_terms(mp, ref, PerturbationState{});
  const Eigen::Vector3d g = gravity_body(mp.mass, total.theta, total.phi);
  const Eigen::Vector3d g_e = gravity_body(mp.mass, trim.theta, trim.phi);
  const std::array<double, 6> external = {
      lhs_e[0] - g_e.x() + fm.x + g.x(), lhs_e[1] - g_e.y() + fm.y + g.y(),
      lhs_e[2] - g_e.z() + fm.z + g.z(), lhs_e[3] + fm.l,
      lhs_e[4] + fm.m,                   lhs_e[5] + fm.n};
  std::array<double, 6> r{};
  for (int k = 0; k < 6; ++k) r[k] = lhs[k] - external[k];
  return r;
}

// Residuals of the attitude kinematics (phi-dot, theta-dot), measured
// relative to the reference attitude rates.
inline std::array<double, 2> kinematic_residual(const TrimState& trim,
                                                const PerturbationState& pert,
                                                const PerturbationState& rate) {
  const auto e = detail::euler_rates(detail::total_motion(trim, pert));
  const auto e0 = detail::euler_rates(detail::total_motion(trim, PerturbationState{}));
  return {rate.phi - (e[0] - e0[0]), rate.theta - (e[1] - e0[1])};
}

// Perturbation forces from the linear aerodynamic model.
inline ForcesMoments aero_forces(const DimensionalDerivatives& d, const PerturbationState& x) {
  return {d.xu * x.u + d.xw * x.w + d.xq * x.q,
          d.yv * x.v + d.yp * x.p + d.yr * x.r,
          d.zu * x.u + d.zw * x.w + d.zq * x.q,
          d.lv * x.v + d.lp * x.p + d.lr * x.r,
          d.mu * x.u + d.mw * x.w + d.mq * x.q,
          d.nv * x.v + d.np * x.p + d.nr * x.r};
}

// Central-difference Jacobian of (f, g) at an equilibrium point.
inline Jacobian2 linearize2(const std::function<double(double, double)>& f,
                            const std::function<double(double, double)>& g, double x_star,
                            double y_star) {
  if (std::abs(f(x_star, y_star)) > 1e-8 || std::abs(g(x_star, y_star)) > 1e-8)
    throw InputError("linearize2: point is not an equilibrium");
  const double hx = 1e-5 * std::max(1.0, std::abs(x_star));
  const double hy = 1e-5 * std::max(1.0, std::abs(y_star));
  Jacobian2 j;
  j.alpha1 = (f(x_star + hx, y_star) - f(x_star - hx, y_star)) / (2 * hx);
  j.alpha2 = (f(x_star, y_star + hy) - f(x_star, y_star - hy)) / (2 * hy);
  j.beta1 = (g(x_star + hx, y_star) - g(x_star - hx, y_star)) / (2 * hx);
  j.beta2 = (g(x_star, y_star + hy) - g(x_star, y_star - hy)) / (2 * hy);
  return j;
}

// Dynamic-pressure scaling of the nondimensional derivatives. Thrust is
// taken as speed independent and equal to the trim drag.
inline DimensionalDerivatives dimensionalize(const NondimDerivatives& nd, const TrimState& trim,
                                             const ReferenceGeometry& ref) {
  const double v = trim.speed();
  if (!(v > 0.0)) throw InputError("dimensionalize: trim speed must be positive");
  const double rho = trim.density;
  const double qs = 0.5 * rho * v * v * ref.sref;
  const double cl = nd.trim.cl, cd = nd.trim.cdi, cm = nd.trim.pitch;
  const double lon_rate = ref.cref / (2.0 * v);
  const double lat_rate = ref.bref / (2.0 * v);
  using C = Coef;
  using V = Var;
  DimensionalDerivatives d;
  d.xu = -rho * v * ref.sref * cd - qs * nd(C::CD, V::U) / v;
  d.xw = qs * (cl - nd(C::CD, V::Alpha)) / v;
  d.xq = -qs * nd(C::CD, V::Q) * lon_rate;
  d.zu = -rho * v * ref.sref * cl - qs * nd(C::CL, V::U) / v;
  d.zw = -qs * (nd(C::CL, V::Alpha) + cd) / v;
  d.zq = -qs * nd(C::CL, V::Q) * lon_rate;
  d.mu = rho * v * ref.sref * ref.cref * cm + qs * ref.cref * nd(C::Cm, V::U) / v;
  d.mw = qs * ref.cref * nd(C::Cm, V::Alpha) / v;
  d.mq = qs * ref.cref * nd(C::Cm, V::Q) * lon_rate;
  d.yv = qs * nd(C::CY, V::Beta) / v;
  d.yp = qs * nd(C::CY, V::P) * lat_rate;
  d.yr = qs * nd(C::CY, V::R) * lat_rate;
  d.lv = qs * ref.bref * nd(C::Cl, V::Beta) / v;
  d.lp = qs * ref.bref * nd(C::Cl, V::P) * lat_rate;
  d.lr = qs * ref.bref * nd(C::Cl, V::R) * lat_rate;
  d.nv = qs * ref.bref * nd(C::Cn, V::Beta) / v;
  d.np = qs * ref.bref * nd(C::Cn, V::P) * lat_rate;
  d.nr = qs * ref.bref * nd(C::Cn, V::R) * lat_rate;
  return d;
}

// Longitudinal state (u, w, q, theta). Downwash-lag terms are absent.
inline Eigen::Matrix4d assemble_longitudinal(const DimensionalDerivatives& d,
                                             const MassProperties& mp, const TrimState& t) {
  const double m = mp.mass;
  const double g = kGravity;
  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a.row(0) << d.xu / m, d.xw / m - t.qe, d.xq / m - t.we, -g * std::cos(t.theta);
  a.row(1) << d.zu / m + t.qe, d.zw / m, d.zq / m + t.ue, -g * std::sin(t.theta) * std::cos(t.phi);
  a.row(2) << d.mu / mp.iy, d.mw / mp.iy, d.mq / mp.iy, 0.0;
  a.row(3) << 0.0, 0.0, std::cos(t.phi), 0.0;
  return a;
}

// Lateral state (v, p, r, phi). The roll and yaw equations share the
// product of inertia, so their accelerations come from a 2x2 solve.
inline Eigen::Matrix4d assemble_lateral(const DimensionalDerivatives& d, const MassProperties& mp,
                                        const TrimState& t) {
  const double det = mp.ix * mp.iz - mp.ixz * mp.ixz;
  if (!(det > 0.0)) throw InputError("singular roll/yaw inertia (Ix*Iz - Ixz^2 <= 0)");
  const double m = mp.mass;
  const double g = kGravity;

  // Moment rows before inertia coupling: columns (v, p, r, phi).
  Eigen::RowVector4d lrow(d.lv, d.lp + mp.ixz * t.qe, d.lr - (mp.iz - mp.iy) * t.qe, 0.0);
  Eigen::RowVector4d nrow(d.nv, d.np - (mp.iy - mp.ix) * t.qe, d.nr - mp.ixz * t.qe, 0.0);

  Eigen::Matrix4d a = Eigen::Matrix4d::Zero();
  a.row(0) << d.yv / m, d.yp / m + t.we, d.yr / m - t.ue,
      g * std::cos(t.theta) * std::cos(t.phi);
  a.row(1) = (mp.iz * lrow + mp.ixz * nrow) / det;
  a.row(2) = (mp.ixz * lrow + mp.ix * nrow) / det;
  const double tan_t = std::tan(t.theta);
  a.row(3) << 0.0, 1.0, std::cos(t.phi) * tan_t,
      (t.qe * std::cos(t.phi) - t.re * std::sin(t.phi)) * tan_t;
  return a;
}

inline LinearModel assemble_linear_model(const DimensionalDerivatives& d, const TrimState& t) {
  return {assemble_longitudinal(d, t.mass, t), assemble_lateral(d, t.mass, t), t};
}

inline MassProperties scale_mass(const MassProperties& mp, double new_mass) {
  if (!(new_mass > 0.0)) throw InputError("mass must be positive");
  const double k = new_mass / mp.mass;
  MassProperties out = mp;
  out.mass = new_mass;
  out.ix *= k;
  out.iy *= k;
  out.iz *= k;
  out.ixz *= k;
  return out;
}

// Key/value fixture: a header line `name,value` then one entry per line.
// Used to drive assembly tests without running the lattice solver.
struct DerivativeFixture {
  std::map<std::string, double> values;

  double at(const std::string& key) const {
    const auto it = values.find(key);
    if (it == values.end()) throw InputError("fixture missing '" + key + "'");
    return it->second;
  }
  DimensionalDerivatives derivatives() const {
    DimensionalDerivatives d;
    const std::pair<const char*, double DimensionalDerivatives::*> fields[] = {
        {"Xu", &DimensionalDerivatives::xu}, {"Xw", &DimensionalDerivatives::xw},
        {"Xq", &DimensionalDerivatives::xq}, {"Zu", &DimensionalDerivatives::zu},
        {"Zw", &DimensionalDerivatives::zw}, {"Zq", &DimensionalDerivatives::zq},
        {"Mu", &DimensionalDerivatives::mu}, {"Mw", &DimensionalDerivatives::mw},
        {"Mq", &DimensionalDerivatives::mq}, {"Yv", &DimensionalDerivatives::yv},
        {"Yp", &DimensionalDerivatives::yp}, {"Yr", &DimensionalDerivatives::yr},
        {"Lv", &DimensionalDerivatives::lv}, {"Lp", &DimensionalDerivatives::lp},
        {"Lr", &DimensionalDerivatives::lr}, {"Nv", &DimensionalDerivatives::nv},
        {"Np", &DimensionalDerivatives::np}, {"Nr", &DimensionalDerivatives::nr}};
    for (const auto& [key, member] : fields) {
      const auto it = values.find(key);
      d.*member = it == values.end() ? 0.0 : it->second;
    }
    return d;
  }
  TrimState trim() const {
    TrimState t;
    t.ue = at("Ue");
    t.theta = at("theta_e");
    t.mass.mass = at("m");
    t.mass.ix = at("Ix");
    t.mass.iy = at("Iy");
    t.mass.iz = at("Iz");
    t.mass.ixz = at("Ixz");
    return t;
  }
  Eigen::Matrix4d matrix(const std::string& prefix) const {
    Eigen::Matrix4d m;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        m(i, j) = at(prefix + "_" + std::to_string(i) + std::to_string(j));
    return m;
  }
};

inline DerivativeFixture read_derivative_fixture(std::istream& in) {
  DerivativeFixture fx;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line == "name,value") continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError(line_no, "expected name,value");
    const std::string key = line.substr(0, comma);
    fx.values[key] = detail::parse_double(line.substr(comma + 1), line_no, key.c_str());
  }
  return fx;
}

inline DerivativeFixture read_derivative_fixture(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open fixture '" + path + "'");
  return read_derivative_fixture(in);
}

}  // namespace flightstab
