#pragma once

// Parameter sweeps: every grid point is trimmed and analysed independently.

#include <cmath>
#include <algorithm>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "flightstab/errors.hpp"
#include "flightstab/geometry.hpp"
#include "flightstab/modes.hpp"
#include "flightstab/trim.hpp"

namespace flightstab {

enum class SweepParameter { Density, Altitude, Velocity, Mass, BankAngle };

inline std::string to_string(SweepParameter p) {
  switch (p) {
    case SweepParameter::Density: return "density";
    case SweepParameter::Altitude: return "altitude";
    case SweepParameter::Velocity: return "velocity";
    case SweepParameter::Mass: return "mass";
    case SweepParameter::BankAngle: return "bank_angle";
  }
  return "unknown";
}

// Accepts "bank" as a short form of "bank_angle".
inline SweepParameter sweep_parameter_from_string(const std::string& s) {
  for (auto p : {SweepParameter::Density, SweepParameter::Altitude, SweepParameter::Velocity,
                 SweepParameter::Mass, SweepParameter::BankAngle})
    if (to_string(p) == s) return p;
  if (s == "bank") return SweepParameter::BankAngle;
  throw InputError("unknown sweep parameter '" + s + "'");
}

enum class TurnCategory { Shallow, Medium, Steep };

inline std::string to_string(TurnCategory c) {
  switch (c) {
    case TurnCategory::Shallow: return "shallow";
    case TurnCategory::Medium: return "medium";
    case TurnCategory::Steep: return "steep";
  }
  return "unknown";
}

// shallow < 20 deg <= medium <= 45 deg < steep
inline TurnCategory turn_category(double bank_deg) {
  const double b = std::abs(bank_deg);
  if (b < 20.0) return TurnCategory::Shallow;
  if (b <= 45.0) return TurnCategory::Medium;
  return TurnCategory::Steep;
}

struct SweepSpec {
  SweepParameter parameter = SweepParameter::Density;
  double start = 0.0;
  double stop = 0.0;
  int steps = 1;
  FlightCondition base;
  double epsilon = kDefaultEpsilon;

  std::vector<double> grid() const {
    if (steps < 1) throw InputError("sweep needs at least one step");
    std::vector<double> g;
    g.reserve(steps);
    for (int i = 0; i < steps; ++i)
      g.push_back(steps == 1 ? start : start + (stop - start) * double(i) / double(steps - 1));
    for (std::size_t i = 1; i < g.size(); ++i)
      if (!(g[i] != g[i - 1])) throw InputError("sweep grid is not strictly monotone");
    return g;
  }
};

struct SweepRow {
  double value = 0.0;
  ClassifiedModes modes;
  std::optional<TurnCategory> turn;
  std::optional<std::string> error;  // set when the point could not be analysed
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::Density;
  double epsilon = kDefaultEpsilon;
  std::vector<SweepRow> rows;
};

inline FlightCondition condition_at(const SweepSpec& spec, double value) {
  FlightCondition fc = spec.base;
  switch (spec.parameter) {
    case SweepParameter::Density: fc.density = value; break;
    case SweepParameter::Altitude: fc.altitude = value; fc.density.reset(); break;
    case SweepParameter::Velocity: fc.speed = value; break;
    case SweepParameter::Mass: fc.mass = value; break;
    case SweepParameter::BankAngle: fc.bank_deg = value; break;
  }
  return fc;
}

inline SweepRow sweep_point(const AircraftModel& model, const SweepSpec& spec, double value) {
  SweepRow row;
  row.value = value;
  if (spec.parameter == SweepParameter::BankAngle) row.turn = turn_category(value);
  try {
    row.modes = analyze(model, condition_at(spec, value), spec.epsilon).modes;
  } catch (const std::exception& e) {
    row.error = e.what();
  }
  return row;
}

// Points run concurrently; rows come back in grid order.
inline SweepResult run_sweep(const AircraftModel& model, const SweepSpec& spec) {
  if (!(spec.epsilon > 0.0 && spec.epsilon < 1.0)) throw InputError("epsilon must lie in (0, 1)");
  const auto grid = spec.grid();
  const std::size_t width = std::max(1u, std::thread::hardware_concurrency());
  SweepResult out;
  out.parameter = spec.parameter;
  out.epsilon = spec.epsilon;
  for (std::size_t first = 0; first < grid.size(); first += width) {
    std::vector<std::future<SweepRow>> jobs;
    for (std::size_t i = first; i < std::min(grid.size(), first + width); ++i)
      jobs.push_back(std::async(std::launch::async,
                                [&model, &spec, v = grid[i]] { return sweep_point(model, spec, v); }));
    for (auto& j : jobs) out.rows.push_back(j.get());
  }
  return out;
}

// (parameter value, t_eq) for one labelled mode over the successful rows.
inline std::vector<std::pair<double, double>> mode_series(const SweepResult& r, ModeLabel label) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : r.rows) {
    if (row.error) continue;
    if (const auto* m = row.modes.find(label)) pts.emplace_back(row.value, m->time_to_equilibrium);
  }
  return pts;
}

}  // namespace flightstab
