#pragma once

// Trimmed flight condition and the full chain from aircraft definition to
// labelled stability modes.

#include <cmath>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <tuple>
#include <utility>

#include "flightstab/aero.hpp"
#include "flightstab/atmosphere.hpp"
#include "flightstab/dynamics.hpp"
#include "flightstab/errors.hpp"
#include "flightstab/geometry.hpp"
#include "flightstab/modes.hpp"

namespace flightstab {

struct FlightCondition {
  double altitude = 0.0;             // m, ignored when density is set
  double speed = 220.0;              // m/s
  double bank_deg = 0.0;             // quasi-steady level turn
  std::optional<double> mass;        // kg, inertia scaled proportionally
  std::optional<double> density;     // kg/m^3, overrides altitude
};

struct TrimResult {
  TrimState state;
  AeroState aero;
  AircraftModel model;  // moment reference at the cg, trim incidence applied
  std::shared_ptr<const VortexLattice> lattice;
  AeroCoefficients coefficients;
  std::optional<int> trim_surface;  // index of the surface used for pitch trim
  double trim_incidence_deg = 0.0;  // incidence added to that surface
  double lift_coefficient_required = 0.0;
  double residual = 0.0;            // max of |CL - CLreq| and |Cm| (when pitch trimmed)
};

inline double planform_area(const LiftingSurface& s) {
  const auto st = span_stations(s);
  double a = 0.0;
  for (std::size_t k = 1; k < st.size(); ++k)
    a += 0.5 * (s.sections[k - 1].chord + s.sections[k].chord) * (st[k] - st[k - 1]);
  return s.mirror ? 2.0 * a : a;
}

// The aftmost horizontal surface other than the largest one (the wing).
inline std::optional<int> pitch_trim_surface(const AircraftModel& model) {
  std::optional<int> wing;
  for (int i = 0; i < static_cast<int>(model.surfaces.size()); ++i) {
    const Vec3 ax = span_axis(model.surfaces[i]);
    if (std::abs(ax.y()) < std::abs(ax.z())) continue;
    if (!wing || planform_area(model.surfaces[i]) > planform_area(model.surfaces[*wing])) wing = i;
  }
  std::optional<int> best;
  double best_x = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < static_cast<int>(model.surfaces.size()); ++i) {
    if (wing && i == *wing) continue;
    const auto& s = model.surfaces[i];
    const Vec3 ax = span_axis(s);
    if (std::abs(ax.y()) < std::abs(ax.z())) continue;
    double x = 0.0;
    for (const auto& sec : s.sections) x += sec.leading_edge.x();
    x /= double(s.sections.size());
    if (x > best_x) best_x = x, best = i;
  }
  return best;
}

inline double density_for(const FlightCondition& fc) {
  if (fc.density) {
    isa::altitude_at_density(*fc.density);  // range check
    return *fc.density;
  }
  return isa::density_at_altitude(fc.altitude);
}

// Level flight (or a coordinated level turn at load factor 1/cos(bank)) with
// lift balancing weight and, when the model has a horizontal tail, the tail
// incidence set for zero pitching moment about the cg. Thrust is implied
// equal to drag.
inline TrimResult trim_aircraft(const AircraftModel& aircraft, const FlightCondition& fc) {
  if (!(fc.speed > 0.0)) throw InputError("speed must be positive");
  if (!(std::abs(fc.bank_deg) < 85.0)) throw InputError("bank angle must be below 85 degrees");
  const double rho = density_for(fc);
  const double phi = fc.bank_deg * std::numbers::pi / 180.0;

  TrimResult out;
  out.model = aircraft;
  if (fc.mass) out.model.mass_properties = scale_mass(aircraft.mass_properties, *fc.mass);
  out.model.moment_reference = out.model.mass_properties.cg;
  const auto& mp = out.model.mass_properties;

  auto& ts = out.state;
  ts.ue = fc.speed;
  ts.phi = phi;
  ts.density = rho;
  ts.altitude = fc.density ? isa::altitude_at_density(rho) : fc.altitude;
  ts.mass = mp;
  const double omega = kGravity * std::tan(phi) / fc.speed;
  ts.qe = omega * std::sin(phi);
  ts.re = omega * std::cos(phi);

  const double qs = 0.5 * rho * fc.speed * fc.speed * aircraft.sref;
  out.lift_coefficient_required = ts.load_factor() * mp.mass * kGravity / qs;
  out.trim_surface = pitch_trim_surface(aircraft);

  AeroState st;
  st.speed = fc.speed;
  st.density = rho;

  // Lift balance on a fixed lattice; CL is affine in alpha to high accuracy.
  auto solve_alpha = [&](const VortexLattice& lat, double alpha0) {
    AeroState s = st;
    s.alpha = alpha0;
    AeroCoefficients c = aero_coefficients(lat, s);
    double slope = 0.0;
    for (int it = 0; it < 30; ++it) {
      const double err = c.cl - out.lift_coefficient_required;
      if (std::abs(err) < 1e-12) break;
      if (slope == 0.0) {
        AeroState s2 = s;
        s2.alpha += 1e-3;
        slope = (aero_coefficients(lat, s2).cl - c.cl) / 1e-3;
        if (!(slope > 0.0)) throw NumericalError("trim: lift does not increase with alpha");
      }
      s.alpha -= err / slope;
      c = aero_coefficients(lat, s);
    }
    return std::pair{s, c};
  };

  auto lattice_with = [&](double delta_deg) {
    AircraftModel m = out.model;
    if (out.trim_surface)
      for (auto& sec : m.surfaces[*out.trim_surface].sections) sec.incidence_deg += delta_deg;
    return std::make_shared<const VortexLattice>(build_lattice(m));
  };

  double alpha = 0.0;
  double delta = 0.0;
  auto lat = lattice_with(delta);
  auto [s0, c0] = solve_alpha(*lat, alpha);
  alpha = s0.alpha;
  if (out.trim_surface) {
    double d_prev = delta, cm_prev = c0.pitch;
    delta = 1.0;
    bool converged = std::abs(c0.pitch) < 1e-10;
    if (converged) delta = 0.0;
    for (int it = 0; it < 40 && !converged; ++it) {
      lat = lattice_with(delta);
      auto [s1, c1] = solve_alpha(*lat, alpha);
      alpha = s1.alpha;
      s0 = s1;
      c0 = c1;
      if (std::abs(c1.pitch) < 1e-10) {
        converged = true;
        break;
      }
      const double denom = c1.pitch - cm_prev;
      if (denom == 0.0) break;
      const double next = delta - c1.pitch * (delta - d_prev) / denom;
      d_prev = delta;
      cm_prev = c1.pitch;
      delta = next;
      if (!std::isfinite(delta) || std::abs(delta) > 30.0)
        throw NumericalError("trim: tail incidence out of range");
    }
    if (!converged) throw NumericalError("trim: pitching moment did not converge");
    lat = lattice_with(delta);
    std::tie(s0, c0) = solve_alpha(*lat, alpha);
    for (auto& sec : out.model.surfaces[*out.trim_surface].sections) sec.incidence_deg += delta;
  }
  out.trim_incidence_deg = delta;
  out.aero = s0;
  out.coefficients = c0;
  out.lattice = lat;
  out.residual = std::abs(c0.cl - out.lift_coefficient_required);
  if (out.trim_surface) out.residual = std::max(out.residual, std::abs(c0.pitch));
  if (out.residual > 1e-6) throw NumericalError("trim residual above tolerance");
  return out;
}

struct StabilityAnalysis {
  TrimResult trim;
  NondimDerivatives nondim;
  DimensionalDerivatives dimensional;
  LinearModel linear;
  ClassifiedModes modes;
};

inline StabilityAnalysis analyze(const AircraftModel& aircraft, const FlightCondition& fc,
                                 double eps = kDefaultEpsilon) {
  StabilityAnalysis a;
  a.trim = trim_aircraft(aircraft, fc);
  a.nondim = stability_derivatives(*a.trim.lattice, a.trim.aero);
  a.dimensional = dimensionalize(a.nondim, a.trim.state, reference_of(aircraft));
  a.linear = assemble_linear_model(a.dimensional, a.trim.state);
  a.modes = classify_modes(eigenmodes(a.linear.longitudinal, eps), eigenmodes(a.linear.lateral, eps));
  return a;
}

}  // namespace flightstab
