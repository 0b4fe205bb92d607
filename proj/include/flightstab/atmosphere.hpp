#pragma once

// ISA troposphere (0 to 11 km).

#include <algorithm>
#include <cmath>
#include <string>

#include "flightstab/errors.hpp"

namespace flightstab::isa {

inline constexpr double kSeaLevelDensity = 1.225;      // kg/m^3
inline constexpr double kSeaLevelTemperature = 288.15; // K
inline constexpr double kLapseRate = 0.0065;           // K/m
inline constexpr double kGravity = 9.80665;            // m/s^2
inline constexpr double kGasConstant = 287.053;        // J/(kg K)
inline constexpr double kTropopause = 11000.0;         // m

inline constexpr double density_exponent() {
  return kGravity / (kLapseRate * kGasConstant) - 1.0;
}

struct AtmosphereState {
  double altitude;
  double temperature;
  double density;
};

inline double temperature_at_altitude(double h) {
  return kSeaLevelTemperature - kLapseRate * h;
}

inline double density_at_altitude(double h) {
  if (!(h >= 0.0 && h <= kTropopause))
    throw InputError("altitude " + std::to_string(h) + " m outside the 0-11000 m troposphere");
  return kSeaLevelDensity *
         std::pow(1.0 - kLapseRate * h / kSeaLevelTemperature, density_exponent());
}

inline double min_density() { return density_at_altitude(kTropopause); }

inline double altitude_at_density(double rho) {
  if (!(rho >= min_density() && rho <= kSeaLevelDensity))
    throw InputError("density " + std::to_string(rho) + " kg/m^3 outside the troposphere range");
  const double h = kSeaLevelTemperature / kLapseRate *
                   (1.0 - std::pow(rho / kSeaLevelDensity, 1.0 / density_exponent()));
  return std::clamp(h, 0.0, kTropopause);
}

inline AtmosphereState state_at_altitude(double h) {
  return {h, temperature_at_altitude(h), density_at_altitude(h)};
}

}  // namespace flightstab::isa
