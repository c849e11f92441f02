#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ccgate {

/// Raised for malformed or physically invalid inputs (bad config fields,
/// violated preconditions on public operations).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Base of all failures that originate in the numerics (integrator step
/// underflow, lost lattice minimum, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;          // J s
inline constexpr double boltzmann = 1.380649e-23;        // J / K
inline constexpr double atomic_mass_unit = 1.66053906660e-27;  // kg

struct Species {
  std::string name;
  double mass_kg = 0.0;
};

inline Species rubidium87() { return {"Rb87", 86.909180527 * atomic_mass_unit}; }
inline Species sodium23() { return {"Na23", 22.9897692820 * atomic_mass_unit}; }

/// Oscillator units anchored at one species and one reference trap frequency.
///
/// Inside the simulator hbar = m = omega_ref = 1, so lengths are measured in
/// the ground-state size a0 = sqrt(hbar / (m omega_ref)), times in 1/omega_ref
/// and energies in hbar omega_ref. Everything crossing the public SI boundary
/// goes through one of these conversions.
class UnitSystem {
 public:
  UnitSystem(double mass_kg, double omega_rad_per_s) : mass_(mass_kg), omega_(omega_rad_per_s) {
    if (!(mass_kg > 0.0) || !(omega_rad_per_s > 0.0)) {
      throw ConfigError("UnitSystem: mass and trap frequency must be positive");
    }
  }

  double mass_kg() const { return mass_; }
  double omega_rad_per_s() const { return omega_; }

  double length_m() const { return std::sqrt(hbar / (mass_ * omega_)); }
  double time_s() const { return 1.0 / omega_; }
  double energy_j() const { return hbar * omega_; }

  double to_internal_length(double meters) const { return meters / length_m(); }
  double to_internal_time(double seconds) const { return seconds * omega_; }
  double to_internal_energy(double joules) const { return joules / energy_j(); }
  double to_internal_frequency(double rad_per_s) const { return rad_per_s / omega_; }
  double to_internal_wavevector(double per_m) const { return per_m * length_m(); }

  double to_si_length(double x) const { return x * length_m(); }
  double to_si_time(double t) const { return t / omega_; }
  double to_si_energy(double e) const { return e * energy_j(); }
  double to_si_frequency(double w) const { return w * omega_; }

  /// kT in units of hbar omega_ref for a temperature in kelvin.
  double thermal_energy(double kelvin) const { return boltzmann * kelvin / energy_j(); }

 private:
  double mass_;
  double omega_;
};

}  // namespace units
}  // namespace ccgate
