#pragma once

// Vortex-lattice aerodynamics: horseshoe vortices on flat panels, flow
// tangency at three-quarter-chord control points, Kutta-Joukowski near-field
// forces and Trefftz-plane induced drag. Stability derivatives come from
// central differences of the coefficients about a reference flow state.
//
// Flow angles and rates are given in stability axes (x along the projection
// of the free stream on the symmetry plane, z down); forces and moments are
// reported in the same axes.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flightstab/errors.hpp"
#include "flightstab/geometry.hpp"

namespace flightstab {

struct Panel {
  std::array<Vec3, 4> corners;  // LE inboard, LE outboard, TE outboard, TE inboard
  Vec3 control_point;
  Vec3 normal;
  Vec3 bound_a;  // bound leg start (spanwise-inboard end of the quarter-chord line)
  Vec3 bound_b;
  double area = 0.0;
  int surface = 0;
  int mirror_index = -1;  // panel that is this one's mirror image, -1 if none
};

struct VortexLattice {
  std::vector<Panel> panels;
  double sref = 1.0, cref = 1.0, bref = 1.0;
  Vec3 moment_reference = Vec3::Zero();
  double trailing_length = 0.0;

  Eigen::MatrixXd influence;       // normal velocity at control point i per unit circulation j
  Eigen::PartialPivLU<Eigen::MatrixXd> factorization;
  std::array<Eigen::MatrixXd, 3> bound_velocity;  // velocity at bound midpoint i per unit circulation j
  Eigen::MatrixXd trefftz_normalwash;             // far-field normal wash at panel i per unit circulation j

  std::size_t size() const { return panels.size(); }
};

struct AeroState {
  double speed = 1.0;     // m/s
  double alpha = 0.0;     // rad
  double beta = 0.0;      // rad
  double p = 0.0, q = 0.0, r = 0.0;  // rad/s, stability axes
  double density = 1.225;            // kg/m^3
};

struct AeroCoefficients {
  double cl = 0.0, cdi = 0.0, cy = 0.0;
  double roll = 0.0, pitch = 0.0, yaw = 0.0;  // Cl, Cm, Cn
};

enum class Coef { CL = 0, CD, CY, Cl, Cm, Cn };
enum class Var { Alpha = 0, Beta, P, Q, R, U };

inline constexpr int kCoefCount = 6;
inline constexpr int kVarCount = 6;

struct NondimDerivatives {
  AeroCoefficients trim;  // coefficients at the reference state
  std::array<std::array<double, kVarCount>, kCoefCount> d{};
  double richardson_discrepancy = 0.0;  // worst relative h vs h/2 disagreement
  bool richardson_ok = true;

  double operator()(Coef c, Var v) const {
    return d[static_cast<int>(c)][static_cast<int>(v)];
  }
  double& operator()(Coef c, Var v) { return d[static_cast<int>(c)][static_cast<int>(v)]; }
};

namespace detail {

// Biot-Savart velocity of a unit-strength straight filament a->b at p.
inline Vec3 segment_velocity(const Vec3& p, const Vec3& a, const Vec3& b, double core) {
  const Vec3 r1 = p - a;
  const Vec3 r2 = p - b;
  const Vec3 r0 = b - a;
  const Vec3 c = r1.cross(r2);
  const double c2 = c.squaredNorm();
  const double n1 = r1.norm();
  const double n2 = r2.norm();
  const double l2 = r0.squaredNorm();
  if (n1 < core || n2 < core || c2 <= core * core * l2) return Vec3::Zero();
  return c * (r0.dot(r1 / n1 - r2 / n2) / (4.0 * std::numbers::pi * c2));
}

inline Vec3 horseshoe_velocity(const Vec3& p, const Panel& panel, double trailing, double core) {
  const Vec3 far_a = panel.bound_a + Vec3(trailing, 0.0, 0.0);
  const Vec3 far_b = panel.bound_b + Vec3(trailing, 0.0, 0.0);
  return segment_velocity(p, far_a, panel.bound_a, core) +
         segment_velocity(p, panel.bound_a, panel.bound_b, core) +
         segment_velocity(p, panel.bound_b, far_b, core);
}

inline Vec3 rotate_about(const Vec3& v, const Vec3& axis, double angle) {
  return v * std::cos(angle) + axis.cross(v) * std::sin(angle) +
         axis * axis.dot(v) * (1.0 - std::cos(angle));
}

// Leading and trailing edge points of a surface at normalized spanwise station t.
inline std::pair<Vec3, Vec3> surface_edges_at(const LiftingSurface& s,
                                              const std::vector<double>& st, const Vec3& axis,
                                              double t) {
  const double target = t * st.back();
  std::size_t k = 0;
  while (k + 2 < st.size() && target > st[k + 1]) ++k;
  const double w = (target - st[k]) / (st[k + 1] - st[k]);
  const auto& s0 = s.sections[k];
  const auto& s1 = s.sections[k + 1];
  const Vec3 le = (1.0 - w) * s0.leading_edge + w * s1.leading_edge;
  const double chord = (1.0 - w) * s0.chord + w * s1.chord;
  const double inc = ((1.0 - w) * s0.incidence_deg + w * s1.incidence_deg) * std::numbers::pi / 180.0;
  const Vec3 dir = rotate_about(Vec3::UnitX(), axis, inc);
  return {le, le + chord * dir};
}

inline Vec3 body_rates_in_geometry_axes(const AeroState& st) {
  const double ca = std::cos(st.alpha), sa = std::sin(st.alpha);
  const Vec3 body(st.p * ca - st.r * sa, st.q, st.p * sa + st.r * ca);
  return {-body.x(), body.y(), -body.z()};
}

inline Vec3 freestream(const AeroState& st) {
  const double ca = std::cos(st.alpha), sa = std::sin(st.alpha);
  const double cb = std::cos(st.beta), sb = std::sin(st.beta);
  return st.speed * Vec3(ca * cb, -sb, sa * cb);
}

}  // namespace detail

// Onset velocity (free stream plus rotation) seen at point x.
inline Vec3 onset_velocity(const VortexLattice& lattice, const AeroState& st, const Vec3& x) {
  const Vec3 omega = detail::body_rates_in_geometry_axes(st);
  return detail::freestream(st) - omega.cross(x - lattice.moment_reference);
}

inline VortexLattice build_lattice(const AircraftModel& model) {
  VortexLattice lat;
  lat.sref = model.sref;
  lat.cref = model.cref;
  lat.bref = model.bref;
  lat.moment_reference = model.moment_reference;
  lat.trailing_length = 100.0 * model.bref;

  const auto surfaces = expand_mirrors(model);
  for (std::size_t si = 0; si < surfaces.size(); ++si) {
    const auto& s = surfaces[si];
    const bool reflected = s.name.size() > 7 && s.name.ends_with("#mirror");
    const auto& source = reflected ? surfaces[si - 1] : s;
    const auto st = span_stations(source);
    const Vec3 axis = span_axis(source);
    const int nc = s.chordwise_panels, ns = s.spanwise_panels;

    // Grid on the declared (unreflected) surface, reflected afterwards.
    std::vector<std::vector<Vec3>> grid(ns + 1, std::vector<Vec3>(nc + 1));
    for (int j = 0; j <= ns; ++j) {
      const auto [le, te] = detail::surface_edges_at(source, st, axis, double(j) / ns);
      for (int i = 0; i <= nc; ++i) grid[j][i] = le + (te - le) * (double(i) / nc);
    }
    if (reflected) {
      std::reverse(grid.begin(), grid.end());
      for (auto& row : grid)
        for (auto& p : row) p.y() = -p.y();
    }

    const int first = static_cast<int>(lat.panels.size());
    for (int j = 0; j < ns; ++j) {
      for (int i = 0; i < nc; ++i) {
        Panel pn;
        pn.surface = static_cast<int>(si);
        pn.corners = {grid[j][i], grid[j + 1][i], grid[j + 1][i + 1], grid[j][i + 1]};
        const Vec3 d1 = pn.corners[2] - pn.corners[0];
        const Vec3 d2 = pn.corners[1] - pn.corners[3];
        const Vec3 cr = (pn.corners[3] - pn.corners[0] + pn.corners[2] - pn.corners[1])
                            .cross(pn.corners[1] - pn.corners[0] + pn.corners[2] - pn.corners[3]);
        pn.area = 0.5 * d1.cross(d2).norm();
        if (!(pn.area > 1e-14 * model.bref * model.bref) || cr.norm() == 0.0)
          throw InputError("degenerate panel on surface '" + s.name + "'");
        pn.normal = cr.normalized();
        pn.bound_a = pn.corners[0] + 0.25 * (pn.corners[3] - pn.corners[0]);
        pn.bound_b = pn.corners[1] + 0.25 * (pn.corners[2] - pn.corners[1]);
        pn.control_point = 0.5 * (pn.corners[0] + 0.75 * (pn.corners[3] - pn.corners[0]) +
                                  pn.corners[1] + 0.75 * (pn.corners[2] - pn.corners[1]));
        lat.panels.push_back(pn);
      }
    }
    if (reflected) {
      // Panel (j, i) of the reflected half mirrors panel (ns-1-j, i) of its source.
      const int src_first = first - ns * nc;
      for (int j = 0; j < ns; ++j)
        for (int i = 0; i < nc; ++i) {
          const int a = first + j * nc + i;
          const int b = src_first + (ns - 1 - j) * nc + i;
          lat.panels[a].mirror_index = b;
          lat.panels[b].mirror_index = a;
        }
    }
  }

  const auto n = static_cast<Eigen::Index>(lat.panels.size());
  const double core = 1e-9 * model.bref;
  lat.influence.resize(n, n);
  for (auto& m : lat.bound_velocity) m.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto& pj = lat.panels[j];
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& pi = lat.panels[i];
      lat.influence(i, j) =
          pi.normal.dot(detail::horseshoe_velocity(pi.control_point, pj, lat.trailing_length, core));
      const Vec3 mid = 0.5 * (pi.bound_a + pi.bound_b);
      const Vec3 v = detail::horseshoe_velocity(mid, pj, lat.trailing_length, core);
      for (int k = 0; k < 3; ++k) lat.bound_velocity[k](i, j) = v[k];
    }
  }

  // Trailing legs seen from the Trefftz plane as 2-D point vortices.
  lat.trefftz_normalwash.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pi = lat.panels[i];
    const Eigen::Vector2d a(pi.bound_a.y(), pi.bound_a.z());
    const Eigen::Vector2d b(pi.bound_b.y(), pi.bound_b.z());
    const Eigen::Vector2d mid = 0.5 * (a + b);
    const Eigen::Vector2d seg = b - a;
    const Eigen::Vector2d nrm = Eigen::Vector2d(-seg.y(), seg.x()).normalized();
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& pj = lat.panels[j];
      auto point_vortex = [&](const Eigen::Vector2d& c) -> Eigen::Vector2d {
        const Eigen::Vector2d d = mid - c;
        const double d2 = d.squaredNorm();
        if (d2 <= core * core) return Eigen::Vector2d::Zero();
        return Eigen::Vector2d(-d.y(), d.x()) / (2.0 * std::numbers::pi * d2);
      };
      const Eigen::Vector2d vel = point_vortex({pj.bound_b.y(), pj.bound_b.z()}) -
                                  point_vortex({pj.bound_a.y(), pj.bound_a.z()});
      lat.trefftz_normalwash(i, j) = vel.dot(nrm);
    }
  }

  lat.factorization.compute(lat.influence);
  const double rcond = lat.factorization.rcond();
  if (!(rcond > 1e-13))
    throw NumericalError("singular influence matrix (rcond " + std::to_string(rcond) + ")");
  return lat;
}

// Right-hand side of the tangency system: minus the onset normal velocity.
inline Eigen::VectorXd onset_normal_rhs(const VortexLattice& lattice, const AeroState& st) {
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(lattice.size()));
  for (std::size_t i = 0; i < lattice.size(); ++i) {
    const auto& p = lattice.panels[i];
    rhs[static_cast<Eigen::Index>(i)] = -p.normal.dot(onset_velocity(lattice, st, p.control_point));
  }
  return rhs;
}

inline Eigen::VectorXd solve_flow(const VortexLattice& lattice, const AeroState& st) {
  if (!(st.speed > 0.0) || !(st.density > 0.0))
    throw InputError("flow state needs positive speed and density");
  const Eigen::VectorXd rhs = onset_normal_rhs(lattice, st);
  Eigen::VectorXd gamma = lattice.factorization.solve(rhs);
  const double scale = std::max(rhs.lpNorm<Eigen::Infinity>(),
                                lattice.influence.lpNorm<Eigen::Infinity>() *
                                    gamma.lpNorm<Eigen::Infinity>());
  const double resid = (lattice.influence * gamma - rhs).lpNorm<Eigen::Infinity>();
  if (scale > 0.0 && resid > 1e-10 * scale)
    throw NumericalError("flow tangency residual " + std::to_string(resid / scale) +
                         " exceeds tolerance");
  return gamma;
}

inline AeroCoefficients aero_coefficients(const VortexLattice& lattice, const AeroState& st,
                                          const Eigen::VectorXd& gamma) {
  const auto n = static_cast<Eigen::Index>(lattice.size());
  Eigen::Vector3d force = Vec3::Zero(), moment = Vec3::Zero();
  std::array<Eigen::VectorXd, 3> induced;
  for (int k = 0; k < 3; ++k) induced[k] = lattice.bound_velocity[k] * gamma;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = lattice.panels[i];
    const Vec3 mid = 0.5 * (p.bound_a + p.bound_b);
    const Vec3 v = onset_velocity(lattice, st, mid) + Vec3(induced[0][i], induced[1][i], induced[2][i]);
    const Vec3 f = st.density * gamma[i] * v.cross(p.bound_b - p.bound_a);
    force += f;
    moment += (mid - lattice.moment_reference).cross(f);
  }

  const Eigen::VectorXd wash = lattice.trefftz_normalwash * gamma;
  double drag = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& p = lattice.panels[i];
    const double len = Eigen::Vector2d(p.bound_b.y() - p.bound_a.y(), p.bound_b.z() - p.bound_a.z()).norm();
    drag -= 0.5 * st.density * gamma[i] * wash[i] * len;
  }

  const double qs = 0.5 * st.density * st.speed * st.speed * lattice.sref;
  const double ca = std::cos(st.alpha), sa = std::sin(st.alpha);
  // geometry (x aft, z up) -> body (x fwd, z down) -> stability axes
  const Vec3 mb(-moment.x(), moment.y(), -moment.z());
  AeroCoefficients c;
  c.cl = (-sa * force.x() + ca * force.z()) / qs;
  c.cdi = drag / qs;
  c.cy = force.y() / qs;
  c.roll = (mb.x() * ca + mb.z() * sa) / (qs * lattice.bref);
  c.pitch = mb.y() / (qs * lattice.cref);
  c.yaw = (-mb.x() * sa + mb.z() * ca) / (qs * lattice.bref);
  return c;
}

inline AeroCoefficients aero_coefficients(const VortexLattice& lattice, const AeroState& st) {
  return aero_coefficients(lattice, st, solve_flow(lattice, st));
}

inline double coefficient(const AeroCoefficients& c, Coef which) {
  switch (which) {
    case Coef::CL: return c.cl;
    case Coef::CD: return c.cdi;
    case Coef::CY: return c.cy;
    case Coef::Cl: return c.roll;
    case Coef::Cm: return c.pitch;
    case Coef::Cn: return c.yaw;
  }
  return 0.0;
}

// Reference state moved by `step` in one nondimensional motion variable.
inline AeroState perturbed_state(const VortexLattice& lattice, AeroState st, Var v, double step) {
  switch (v) {
    case Var::Alpha: st.alpha += step; break;
    case Var::Beta: st.beta += step; break;
    case Var::P: st.p += step * 2.0 * st.speed / lattice.bref; break;
    case Var::Q: st.q += step * 2.0 * st.speed / lattice.cref; break;
    case Var::R: st.r += step * 2.0 * st.speed / lattice.bref; break;
    case Var::U: st.speed *= 1.0 + step; break;
  }
  return st;
}

inline constexpr double kDerivativeStep = 1e-3;
inline constexpr double kCouplingZero = 1e-8;

inline bool is_cross_coupling(Coef c, Var v) {
  const bool lon_coef = c == Coef::CL || c == Coef::CD || c == Coef::Cm;
  const bool lon_var = v == Var::Alpha || v == Var::Q || v == Var::U;
  return lon_coef != lon_var;
}

inline NondimDerivatives stability_derivatives(const VortexLattice& lattice, const AeroState& trim) {
  NondimDerivatives nd;
  nd.trim = aero_coefficients(lattice, trim);
  const double h = kDerivativeStep;
  for (int vi = 0; vi < kVarCount; ++vi) {
    const auto v = static_cast<Var>(vi);
    const auto plus = aero_coefficients(lattice, perturbed_state(lattice, trim, v, h));
    const auto minus = aero_coefficients(lattice, perturbed_state(lattice, trim, v, -h));
    const auto plus2 = aero_coefficients(lattice, perturbed_state(lattice, trim, v, h / 2));
    const auto minus2 = aero_coefficients(lattice, perturbed_state(lattice, trim, v, -h / 2));
    for (int ci = 0; ci < kCoefCount; ++ci) {
      const auto c = static_cast<Coef>(ci);
      const double full = (coefficient(plus, c) - coefficient(minus, c)) / (2.0 * h);
      const double half = (coefficient(plus2, c) - coefficient(minus2, c)) / h;
      const double gap = std::abs(full - half);
      if (gap > kCouplingZero) {
        const double rel = gap / std::abs(full);
        nd.richardson_discrepancy = std::max(nd.richardson_discrepancy, rel);
        if (rel > 0.01) nd.richardson_ok = false;
      }
      nd.d[ci][vi] = (is_cross_coupling(c, v) && std::abs(full) < kCouplingZero) ? 0.0 : full;
    }
  }
  return nd;
}

}  // namespace flightstab
