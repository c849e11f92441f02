#pragma once

// lin-angle-lin optical lattice: spin-resolved standing waves, the potentials
// seen by |a> = |F=1,mF=1> and |b> = |F=2,mF=2>, harmonic well tracking as the
// polarization angle theta is swept, and the theta(t) schedule.

#include <array>
#include <cmath>
#include <memory>
#include <span>
#include <sstream>
#include <utility>
#include <vector>

#include "ccgate/levels.hpp"
#include "ccgate/trajectory.hpp"
#include "ccgate/units.hpp"

namespace ccgate {

/// Lost track of a lattice minimum (curvature collapse or a jump larger than a quarter period).
class LostMinimumError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct LatticeParams {
  double depth = 1.0;      // V0 = alpha |E0|^2
  double wavevector = 1.0;  // k
  double mass = 1.0;

  void validate() const {
    if (!(depth > 0.0)) throw ConfigError("LatticeParams: depth must be positive");
    if (!(wavevector > 0.0)) throw ConfigError("LatticeParams: wavevector must be positive");
    if (!(mass > 0.0)) throw ConfigError("LatticeParams: mass must be positive");
  }

  /// Depth producing trap frequency `omega` at the bottom of a sin^2 well: V0 = m w^2 / (2 k^2).
  static LatticeParams from_trap_frequency(double omega, double wavevector, double mass = 1.0) {
    LatticeParams p{mass * omega * omega / (2.0 * wavevector * wavevector), wavevector, mass};
    p.validate();
    return p;
  }

  double period() const { return units::pi / wavevector; }
};

struct WellApprox {
  double center = 0.0;
  double frequency = 0.0;
  double depth = 0.0;  // potential value at the minimum
  int index = 0;
};

inline double optical_potential(Spin spin, double z, double theta, const LatticeParams& p) {
  const double s = std::sin(p.wavevector * z + (spin == Spin::up ? theta : -theta));
  return p.depth * s * s;
}

/// V^a = [V_{+1/2} + 3 V_{-1/2}] / 4, V^b = V_{+1/2}.
inline double state_potential(Level level, double z, double theta, const LatticeParams& p) {
  switch (level) {
    case Level::a:
      return 0.25 * (optical_potential(Spin::up, z, theta, p) + 3.0 * optical_potential(Spin::down, z, theta, p));
    case Level::b:
      return optical_potential(Spin::up, z, theta, p);
    case Level::c:
      break;
  }
  throw ConfigError("state_potential: the lattice model only defines levels a and b");
}

/// V and its mixed partial derivatives, from writing each component as
/// V0 c (1 - cos(2kz + 2 s theta)) / 2.
struct PotentialDerivatives {
  double value = 0, dz = 0, dzz = 0, dzzz = 0, dz_dtheta = 0, dzz_dtheta = 0;
};

inline PotentialDerivatives state_potential_derivatives(Level level, double z, double theta, const LatticeParams& p) {
  struct Term {
    double weight, sign;
  };
  std::array<Term, 2> terms{};
  std::size_t count = 0;
  if (level == Level::a) {
    terms = {Term{0.25, +1.0}, Term{0.75, -1.0}};
    count = 2;
  } else if (level == Level::b) {
    terms[0] = {1.0, +1.0};
    count = 1;
  } else {
    throw ConfigError("state_potential_derivatives: the lattice model only defines levels a and b");
  }
  const double k = p.wavevector;
  PotentialDerivatives d;
  for (std::size_t i = 0; i < count; ++i) {
    const double arg = 2.0 * k * z + 2.0 * terms[i].sign * theta;
    const double c = std::cos(arg), s = std::sin(arg);
    const double w = p.depth * terms[i].weight;
    d.value += 0.5 * w * (1.0 - c);
    d.dz += w * k * s;
    d.dzz += 2.0 * w * k * k * c;
    d.dzzz += -4.0 * w * k * k * k * s;
    d.dz_dtheta += 2.0 * w * k * terms[i].sign * c;
    d.dzz_dtheta += -4.0 * w * k * k * terms[i].sign * s;
  }
  return d;
}

namespace detail {

inline constexpr double kCurvatureTolerance = 1e-6;  // in units of V0 k^2

// Minimum of V in [center - q, center + q], q a quarter period: golden
// section to bracket, Newton on dV/dz to finish.
inline double refine_minimum(Level level, double guess, double theta, const LatticeParams& p) {
  const double q = 0.25 * p.period();
  double lo = guess - q, hi = guess + q;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
  double f1 = state_potential(level, x1, theta, p), f2 = state_potential(level, x2, theta, p);
  for (int it = 0; it < 60 && hi - lo > 1e-6 * q; ++it) {
    if (f1 < f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - g * (hi - lo);
      f1 = state_potential(level, x1, theta, p);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + g * (hi - lo);
      f2 = state_potential(level, x2, theta, p);
    }
  }
  double z = 0.5 * (lo + hi);
  for (int it = 0; it < 30; ++it) {
    const auto d = state_potential_derivatives(level, z, theta, p);
    if (!(d.dzz > 0.0)) break;
    const double step = d.dz / d.dzz;
    z -= step;
    if (std::abs(step) < 1e-16 * (1.0 + std::abs(z)) / 1.0) break;
  }
  return z;
}

inline WellApprox make_well(Level level, double z, double theta, int index, const LatticeParams& p) {
  const auto d = state_potential_derivatives(level, z, theta, p);
  if (!(d.dzz > kCurvatureTolerance * p.depth * p.wavevector * p.wavevector)) {
    std::ostringstream msg;
    msg << "track_well: curvature collapsed at theta = " << theta << " (well merging)";
    throw LostMinimumError(msg.str());
  }
  return {z, std::sqrt(d.dzz / p.mass), d.value, index};
}

}  // namespace detail

/// Center guess for well `index` at angle theta. Wells are labelled by their
/// position k z = pi/2 + n pi at theta = pi/2, where both potentials coincide;
/// b moves as -theta, a in the opposite direction (exact at theta = 0, pi/4, pi/2).
inline double seed_center(Level level, int index, double theta, const LatticeParams& p) {
  const double base = 0.5 * units::pi + index * units::pi;
  const double shift = theta - 0.5 * units::pi;
  return (level == Level::b ? base - shift : base + shift) / p.wavevector;
}

/// Follows one minimum of V^level continuously along theta_path.
///
/// Throws LostMinimumError when the curvature at the tracked point drops below
/// 1e-6 V0 k^2 or when the minimum jumps by a quarter period or more between
/// consecutive path points.
inline std::vector<WellApprox> track_well(Level level, std::span<const double> theta_path, int seed_index,
                                          const LatticeParams& p) {
  p.validate();
  std::vector<WellApprox> out;
  out.reserve(theta_path.size());
  if (theta_path.empty()) return out;
  const double quarter = 0.25 * p.period();
  double z = detail::refine_minimum(level, seed_center(level, seed_index, theta_path[0], p), theta_path[0], p);
  out.push_back(detail::make_well(level, z, theta_path[0], seed_index, p));
  for (std::size_t i = 1; i < theta_path.size(); ++i) {
    const double next = detail::refine_minimum(level, z, theta_path[i], p);
    if (std::abs(next - z) >= quarter * (1.0 - 1e-9)) {
      std::ostringstream msg;
      msg << "track_well: minimum jumped by " << std::abs(next - z) / p.period()
          << " periods at theta = " << theta_path[i] << "; refine the theta path";
      throw LostMinimumError(msg.str());
    }
    z = next;
    out.push_back(detail::make_well(level, z, theta_path[i], seed_index, p));
  }
  return out;
}

/// theta(t) = pi (1 - (1 + e^{-(ti/tr)^2}) / (1 + e^{(t^2 - ti^2)/tr^2})) / 2.
inline double theta_schedule(double t, double tau_r, double tau_i) {
  return 0.5 * units::pi * (1.0 - sigmoid_displacement(t, tau_r, tau_i, 1.0));
}

inline double theta_schedule_rate(double t, double tau_r, double tau_i) {
  const double pref = 1.0 + std::exp(-std::pow(tau_i / tau_r, 2));
  return -0.5 * units::pi * pref * detail::sigmoid_core(t, tau_r, tau_i).ds;
}

namespace detail {

// Center of a tracked well as a function of time, re-solved by Newton at the
// exact theta(t) from a dense tracked table; derivatives follow from implicit
// differentiation of dV/dz = 0. The lab axis is x = -z so that the a-well
// travels toward +x.
class LatticeProfile final : public TrajectoryProfile {
 public:
  LatticeProfile(Level level, LatticeParams params, double tau_r, double tau_i, double half_window,
                 std::vector<double> centers)
      : level_(level),
        p_(params),
        tau_r_(tau_r),
        tau_i_(tau_i),
        t0_(-half_window),
        dt_(2.0 * half_window / static_cast<double>(centers.size() - 1)),
        centers_(std::move(centers)),
        origin_(centers_.front()) {}

  double offset(double t) const override { return -(center(t) - origin_); }

  double velocity(double t) const override {
    const double theta = theta_schedule(t, tau_r_, tau_i_);
    const auto d = state_potential_derivatives(level_, center(t), theta, p_);
    const double dz_dtheta = -d.dz_dtheta / d.dzz;
    return -dz_dtheta * theta_schedule_rate(t, tau_r_, tau_i_);
  }

  double omega(double t) const override {
    const auto d = state_potential_derivatives(level_, center(t), theta_schedule(t, tau_r_, tau_i_), p_);
    return std::sqrt(d.dzz / p_.mass);
  }

  double omega_rate(double t) const override {
    const double theta = theta_schedule(t, tau_r_, tau_i_);
    const auto d = state_potential_derivatives(level_, center(t), theta, p_);
    const double dz_dtheta = -d.dz_dtheta / d.dzz;
    const double w = std::sqrt(d.dzz / p_.mass);
    const double dw_dtheta = (d.dzzz * dz_dtheta + d.dzz_dtheta) / (2.0 * p_.mass * w);
    return dw_dtheta * theta_schedule_rate(t, tau_r_, tau_i_);
  }

  double time_scale() const override {
    return std::min(sigmoid_time_scale(tau_r_, tau_i_), 1.0 / omega(t0_));
  }
  double amplitude() const override { return p_.period(); }

 private:
  double center(double t) const {
    const double u = std::clamp((t - t0_) / dt_, 0.0, static_cast<double>(centers_.size() - 1));
    const std::size_t i = std::min(static_cast<std::size_t>(u), centers_.size() - 2);
    const double frac = u - static_cast<double>(i);
    double z = centers_[i] + frac * (centers_[i + 1] - centers_[i]);
    const double theta = theta_schedule(t, tau_r_, tau_i_);
    for (int it = 0; it < 20; ++it) {
      const auto d = state_potential_derivatives(level_, z, theta, p_);
      const double step = d.dz / d.dzz;
      z -= step;
      if (std::abs(step) * p_.wavevector < 1e-15) break;
    }
    return z;
  }

  Level level_;
  LatticeParams p_;
  double tau_r_, tau_i_;
  double t0_, dt_;
  std::vector<double> centers_;
  double origin_;
};

}  // namespace detail

struct LatticeTrajectories {
  Trajectory a;
  Trajectory b;
  double separation = 0.0;  // distance between neighbouring sites, d = pi / k
  double omega = 0.0;       // frequency of both wells at theta = pi/2
  std::vector<double> times;
  std::vector<WellApprox> wells_a;
  std::vector<WellApprox> wells_b;
};

/// Samples theta(t) on [-tau, tau], tracks the a- and b-wells of one site and
/// wraps them as trajectories (lab axis x = -z, origin at the initial center).
/// With atom 1 on site x = 0 and atom 2 on site x = d, the a-well of atom 1 and
/// the b-well of atom 2 meet at x = d/2 when theta = 0.
inline LatticeTrajectories lattice_to_trajectories(double tau_r, double tau_i, const LatticeParams& p,
                                                   int samples = 1000, double half_window = 0.0) {
  p.validate();
  if (!(tau_r > 0.0)) throw ConfigError("lattice_to_trajectories: tau_r must be positive");
  if (samples < 4) throw ConfigError("lattice_to_trajectories: need at least 4 samples");
  if (!(half_window > 0.0)) half_window = sigmoid_half_window(tau_r, tau_i);
  LatticeTrajectories out{Trajectory::stationary(1.0, half_window), Trajectory::stationary(1.0, half_window)};
  std::vector<double> thetas(samples);
  out.times.resize(samples);
  for (int i = 0; i < samples; ++i) {
    out.times[i] = -half_window + 2.0 * half_window * i / (samples - 1);
    thetas[i] = theta_schedule(out.times[i], tau_r, tau_i);
  }
  out.wells_a = track_well(Level::a, thetas, 0, p);
  out.wells_b = track_well(Level::b, thetas, 0, p);
  auto centers = [](const std::vector<WellApprox>& wells) {
    std::vector<double> c;
    c.reserve(wells.size());
    for (const auto& w : wells) c.push_back(w.center);
    return c;
  };
  out.a = Trajectory(std::make_shared<detail::LatticeProfile>(Level::a, p, tau_r, tau_i, half_window,
                                                              centers(out.wells_a)),
                     half_window);
  out.b = Trajectory(std::make_shared<detail::LatticeProfile>(Level::b, p, tau_r, tau_i, half_window,
                                                              centers(out.wells_b)),
                     half_window);
  out.separation = p.period();
  out.omega = out.wells_b.front().frequency;
  return out;
}

}  // namespace ccgate
