#pragma once

// Trap-center and trap-frequency schedules in oscillator units
// (hbar = m = omega_ref = 1), kinetic phases and the adiabaticity functional.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <memory>
#include <numeric>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>

#include "ccgate/quadrature.hpp"
#include "ccgate/units.hpp"

namespace ccgate {

/// Time-dependent trap: displacement dx(t) from the base position and frequency w(t).
class TrajectoryProfile {
 public:
  virtual ~TrajectoryProfile() = default;

  virtual double offset(double t) const = 0;
  virtual double velocity(double t) const = 0;
  virtual double omega(double t) const = 0;
  virtual double omega_rate(double t) const = 0;

  virtual double acceleration(double t) const {
    const double h = 1e-4 * time_scale();
    return (velocity(t + h) - velocity(t - h)) / (2.0 * h);
  }

  virtual bool constant_frequency() const { return false; }
  /// Shortest time over which the schedule changes appreciably.
  virtual double time_scale() const = 0;
  /// Length scale used for the endpoint tolerance (typically d).
  virtual double amplitude() const = 0;
  /// Times where derivatives are discontinuous.
  virtual std::vector<double> breakpoints() const { return {}; }
};

/// Parameters of the sigmoid family dx(t)/d = (1 + e^{-(ti/tr)^2}) / (1 + e^{(t^2 - ti^2)/tr^2}).
struct SigmoidShape {
  double rise_time = 30.0;         // tau_r
  double interaction_time = 20.0;  // tau_i
  double distance = 10.0;          // d
};

inline double sigmoid_displacement(double t, double tau_r, double tau_i, double d) {
  if (!(tau_r > 0.0)) throw ConfigError("sigmoid_displacement: tau_r must be positive");
  const double ratio = tau_i / tau_r;
  const double numerator = 1.0 + std::exp(-ratio * ratio);
  const double u = (t * t - tau_i * tau_i) / (tau_r * tau_r);
  if (u > 700.0) return 0.0;
  return d * numerator / (1.0 + std::exp(u));
}

namespace detail {

// s = 1/(1+e^u) and its t-derivatives for u = (t^2 - ti^2)/tr^2.
struct SigmoidCore {
  double s, ds, d2s;
};

inline SigmoidCore sigmoid_core(double t, double tau_r, double tau_i) {
  const double tr2 = tau_r * tau_r;
  const double u = (t * t - tau_i * tau_i) / tr2;
  if (u > 700.0) return {0.0, 0.0, 0.0};
  const double s = 1.0 / (1.0 + std::exp(u));
  const double du = 2.0 * t / tr2;
  const double d2u = 2.0 / tr2;
  const double dsdu = -s * (1.0 - s);
  const double d2sdu2 = s * (1.0 - s) * (1.0 - 2.0 * s);
  return {s, dsdu * du, d2sdu2 * du * du + dsdu * d2u};
}

inline double sigmoid_time_scale(double tau_r, double tau_i) {
  return tau_r * tau_r / (2.0 * std::abs(tau_i) + tau_r);
}

class StationaryProfile final : public TrajectoryProfile {
 public:
  explicit StationaryProfile(double omega) : omega_(omega) {}
  double offset(double) const override { return 0.0; }
  double velocity(double) const override { return 0.0; }
  double acceleration(double) const override { return 0.0; }
  double omega(double) const override { return omega_; }
  double omega_rate(double) const override { return 0.0; }
  bool constant_frequency() const override { return true; }
  double time_scale() const override { return 1.0 / omega_; }
  double amplitude() const override { return 1.0; }

 private:
  double omega_;
};

class SigmoidProfile final : public TrajectoryProfile {
 public:
  SigmoidProfile(SigmoidShape shape, double omega)
      : shape_(shape),
        omega_(omega),
        prefactor_(shape.distance * (1.0 + std::exp(-std::pow(shape.interaction_time / shape.rise_time, 2)))) {}

  double offset(double t) const override {
    return sigmoid_displacement(t, shape_.rise_time, shape_.interaction_time, shape_.distance);
  }
  double velocity(double t) const override {
    return prefactor_ * sigmoid_core(t, shape_.rise_time, shape_.interaction_time).ds;
  }
  double acceleration(double t) const override {
    return prefactor_ * sigmoid_core(t, shape_.rise_time, shape_.interaction_time).d2s;
  }
  double omega(double) const override { return omega_; }
  double omega_rate(double) const override { return 0.0; }
  bool constant_frequency() const override { return true; }
  double time_scale() const override {
    return std::min(sigmoid_time_scale(shape_.rise_time, shape_.interaction_time), 1.0 / omega_);
  }
  double amplitude() const override { return std::abs(shape_.distance) > 0 ? std::abs(shape_.distance) : 1.0; }

 private:
  SigmoidShape shape_;
  double omega_;
  double prefactor_;
};

class PiecewiseVelocityProfile final : public TrajectoryProfile {
 public:
  PiecewiseVelocityProfile(double start, std::vector<std::pair<double, double>> segments, double omega)
      : omega_(omega) {
    double t = start;
    double x = 0.0;
    for (const auto& [duration, v] : segments) {
      if (!(duration > 0.0)) throw ConfigError("piecewise trajectory: segment durations must be positive");
      knots_.push_back(t);
      positions_.push_back(x);
      velocities_.push_back(v);
      t += duration;
      x += v * duration;
      scale_ = std::max(scale_, std::abs(x));
      min_duration_ = std::min(min_duration_, duration);
    }
    knots_.push_back(t);
    positions_.push_back(x);
    velocities_.push_back(0.0);
  }

  double offset(double t) const override {
    const std::size_t i = segment(t);
    if (i == npos) return 0.0;
    return positions_[i] + velocities_[i] * (t - knots_[i]);
  }
  double velocity(double t) const override {
    const std::size_t i = segment(t);
    return i == npos ? 0.0 : velocities_[i];
  }
  double acceleration(double) const override { return 0.0; }
  double omega(double) const override { return omega_; }
  double omega_rate(double) const override { return 0.0; }
  bool constant_frequency() const override { return true; }
  double time_scale() const override { return std::min(min_duration_, 1.0 / omega_); }
  double amplitude() const override { return scale_ > 0 ? scale_ : 1.0; }
  std::vector<double> breakpoints() const override { return knots_; }

 private:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  std::size_t segment(double t) const {
    if (t < knots_.front()) return npos;
    if (t >= knots_.back()) return knots_.size() - 1;
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    return static_cast<std::size_t>(it - knots_.begin()) - 1;
  }

  double omega_;
  std::vector<double> knots_, positions_, velocities_;
  double scale_ = 0.0;
  double min_duration_ = 1e300;
};

class FunctionProfile final : public TrajectoryProfile {
 public:
  using Fn = std::function<double(double)>;
  FunctionProfile(Fn offset, Fn velocity, Fn omega, Fn omega_rate, bool constant_frequency,
                  double time_scale, double amplitude)
      : offset_(std::move(offset)),
        velocity_(std::move(velocity)),
        omega_(std::move(omega)),
        omega_rate_(std::move(omega_rate)),
        constant_(constant_frequency),
        time_scale_(time_scale),
        amplitude_(amplitude) {}

  double offset(double t) const override { return offset_(t); }
  double velocity(double t) const override { return velocity_(t); }
  double omega(double t) const override { return omega_(t); }
  double omega_rate(double t) const override { return omega_rate_(t); }
  bool constant_frequency() const override { return constant_; }
  double time_scale() const override { return time_scale_; }
  double amplitude() const override { return amplitude_; }

 private:
  Fn offset_, velocity_, omega_, omega_rate_;
  bool constant_;
  double time_scale_, amplitude_;
};

class SampledProfile final : public TrajectoryProfile {
 public:
  SampledProfile(double t0, double dt, std::vector<double> offsets, std::vector<double> omegas)
      : t0_(t0),
        t1_(t0 + dt * static_cast<double>(offsets.size() - 1)),
        dt_(dt),
        offset_spline_(offsets.begin(), offsets.end(), t0, dt),
        omega_spline_(omegas.begin(), omegas.end(), t0, dt),
        constant_(std::all_of(omegas.begin(), omegas.end(), [&](double w) { return w == omegas.front(); })),
        amplitude_(std::max(1e-300, std::abs(*std::max_element(offsets.begin(), offsets.end(),
                                                             [](double a, double b) { return std::abs(a) < std::abs(b); })))) {}

  double offset(double t) const override { return offset_spline_(clamp(t)); }
  double velocity(double t) const override { return inside(t) ? offset_spline_.prime(t) : 0.0; }
  double acceleration(double t) const override { return inside(t) ? offset_spline_.double_prime(t) : 0.0; }
  double omega(double t) const override { return omega_spline_(clamp(t)); }
  double omega_rate(double t) const override { return inside(t) ? omega_spline_.prime(t) : 0.0; }
  bool constant_frequency() const override { return constant_; }
  double time_scale() const override { return 4.0 * dt_; }
  double amplitude() const override { return amplitude_; }

 private:
  double clamp(double t) const { return std::clamp(t, t0_, t1_); }
  bool inside(double t) const { return t > t0_ && t < t1_; }

  double t0_, t1_, dt_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> offset_spline_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> omega_spline_;
  bool constant_;
  double amplitude_;
};

}  // namespace detail

/// Default half window for the sigmoid family: 2 tau_i + 5 tau_r, widened
/// until the displacement at the window edge is below 1e-10 d.
inline double sigmoid_half_window(double tau_r, double tau_i) {
  double tau = 2.0 * std::abs(tau_i) + 5.0 * tau_r;
  while (sigmoid_displacement(tau, tau_r, tau_i, 1.0) >= 1e-10) tau *= 1.25;
  return tau;
}

/// Immutable trap schedule on the window [-tau, tau].
///
/// Invariants checked on construction: dx(+-tau) = 0 within 1e-9 of the
/// profile amplitude, and w(t) > 0 on a dense sample of the window.
class Trajectory {
 public:
  Trajectory(std::shared_ptr<const TrajectoryProfile> profile, double half_window)
      : profile_(std::move(profile)), half_window_(half_window) {
    if (!profile_) throw ConfigError("Trajectory: null profile");
    if (!(half_window_ > 0.0)) throw ConfigError("Trajectory: half window must be positive");
    const double tol = 1e-9 * profile_->amplitude();
    if (std::abs(profile_->offset(-half_window_)) > tol || std::abs(profile_->offset(half_window_)) > tol) {
      throw ConfigError("Trajectory: displacement must vanish at both window edges");
    }
    const int samples = 2001;
    for (int i = 0; i < samples; ++i) {
      const double t = -half_window_ + 2.0 * half_window_ * i / (samples - 1);
      if (!(profile_->omega(t) > 0.0)) throw ConfigError("Trajectory: trap frequency must stay positive");
    }
  }

  static Trajectory stationary(double omega, double half_window) {
    if (!(omega > 0.0)) throw ConfigError("Trajectory: omega must be positive");
    return Trajectory(std::make_shared<detail::StationaryProfile>(omega), half_window);
  }

  /// Sigmoid displacement with constant frequency; half_window <= 0 picks the default.
  static Trajectory sigmoid(SigmoidShape shape, double omega = 1.0, double half_window = 0.0) {
    if (!(shape.rise_time > 0.0)) throw ConfigError("Trajectory: tau_r must be positive");
    if (!(omega > 0.0)) throw ConfigError("Trajectory: omega must be positive");
    if (!(half_window > 0.0)) half_window = sigmoid_half_window(shape.rise_time, shape.interaction_time);
    return Trajectory(std::make_shared<detail::SigmoidProfile>(shape, omega), half_window);
  }

  /// Constant-velocity segments (duration, velocity) starting at -tau; stationary afterwards.
  static Trajectory piecewise_velocity(std::vector<std::pair<double, double>> segments, double omega,
                                       double half_window) {
    return Trajectory(std::make_shared<detail::PiecewiseVelocityProfile>(-half_window, std::move(segments), omega),
                      half_window);
  }

  static Trajectory from_functions(detail::FunctionProfile::Fn offset, detail::FunctionProfile::Fn velocity,
                                   detail::FunctionProfile::Fn omega, detail::FunctionProfile::Fn omega_rate,
                                   double half_window, double time_scale, double amplitude,
                                   bool constant_frequency) {
    return Trajectory(std::make_shared<detail::FunctionProfile>(std::move(offset), std::move(velocity),
                                                                std::move(omega), std::move(omega_rate),
                                                                constant_frequency, time_scale, amplitude),
                      half_window);
  }

  /// Uniformly sampled schedule on [-tau, tau]; derivatives from cubic B-splines.
  static Trajectory from_samples(std::vector<double> offsets, std::vector<double> omegas, double half_window) {
    if (offsets.size() < 4 || offsets.size() != omegas.size()) {
      throw ConfigError("Trajectory: need >= 4 matching offset/omega samples");
    }
    const double dt = 2.0 * half_window / static_cast<double>(offsets.size() - 1);
    return Trajectory(std::make_shared<detail::SampledProfile>(-half_window, dt, std::move(offsets), std::move(omegas)),
                      half_window);
  }

  double half_window() const { return half_window_; }
  double start() const { return -half_window_; }
  double end() const { return half_window_; }

  double offset(double t) const { return profile_->offset(t); }
  double velocity(double t) const { return profile_->velocity(t); }
  double acceleration(double t) const { return profile_->acceleration(t); }
  double omega(double t) const { return profile_->omega(t); }
  double omega_rate(double t) const { return profile_->omega_rate(t); }
  double ground_state_size(double t) const { return 1.0 / std::sqrt(omega(t)); }
  double oscillator_velocity(double t) const { return std::sqrt(omega(t)); }

  bool constant_frequency() const { return profile_->constant_frequency(); }
  double time_scale() const { return profile_->time_scale(); }
  double amplitude() const { return profile_->amplitude(); }
  std::vector<double> breakpoints() const { return profile_->breakpoints(); }

  /// Panel count for the composite quadrature: resolves the schedule's own
  /// time scale and the trap period.
  int default_panels() const {
    const double span = 2.0 * half_window_;
    const double by_shape = 8.0 * span / time_scale();
    const double by_period = 2.0 * span * omega(start());
    return static_cast<int>(std::ceil(std::max({1000.0, by_shape, by_period})));
  }

  /// The same schedule run backwards in time (t -> -t).
  Trajectory reversed() const {
    auto p = profile_;
    return from_functions([p](double t) { return p->offset(-t); }, [p](double t) { return -p->velocity(-t); },
                          [p](double t) { return p->omega(-t); }, [p](double t) { return -p->omega_rate(-t); },
                          half_window_, p->time_scale(), p->amplitude(), p->constant_frequency());
  }

 private:
  std::shared_ptr<const TrajectoryProfile> profile_;
  double half_window_;
};

/// Kinetic phase (1/2) int v(t)^2 dt over the window (m = hbar = 1).
inline double kinetic_phase(const Trajectory& traj, int panels = 0) {
  if (panels <= 0) panels = traj.default_panels();
  const auto cuts = traj.breakpoints();
  return 0.5 * quad::integrate_piecewise([&](double t) { const double v = traj.velocity(t); return v * v; },
                                         traj.start(), traj.end(), cuts, panels);
}

/// |int_{-tau}^{t} v(t') e^{i w t'} dt'| / a0, with w and a0 taken at -tau.
/// Only exact for constant-frequency schedules; otherwise a diagnostic.
inline double adiabaticity_functional(const Trajectory& traj, double t, int panels = 0) {
  if (panels <= 0) panels = traj.default_panels();
  t = std::clamp(t, traj.start(), traj.end());
  const double w = traj.omega(traj.start());
  const auto cuts = traj.breakpoints();
  const int n = std::max(1, static_cast<int>(std::ceil(panels * (t - traj.start()) / (2.0 * traj.half_window()))));
  const std::complex<double> integral = quad::integrate_piecewise(
      [&](double s) { return traj.velocity(s) * std::polar(1.0, w * s); }, traj.start(), t, cuts, n);
  return std::abs(integral) * std::sqrt(w);
}

struct PhaseResult {
  double kinetic_phase = 0.0;
  double adiabaticity_peak = 0.0;
  double adiabaticity_final = 0.0;
  /// max |x''| tau / v_osc; regime diagnostic, no threshold implied.
  double acceleration_ratio = 0.0;
  /// True when w(t) varies and the adiabaticity values are approximate.
  bool approximate = false;
};

/// Kinetic phase plus adiabaticity diagnostics from one cumulative sweep.
inline PhaseResult analyze_trajectory(const Trajectory& traj, int panels = 0) {
  if (panels <= 0) panels = traj.default_panels();
  PhaseResult r;
  r.kinetic_phase = kinetic_phase(traj, panels);
  r.approximate = !traj.constant_frequency();
  const double w = traj.omega(traj.start());
  const double h = 2.0 * traj.half_window() / panels;
  std::complex<double> running{};
  const auto cuts = traj.breakpoints();
  for (int p = 0; p < panels; ++p) {
    const double a = traj.start() + p * h;
    const double b = a + h;
    running += quad::integrate_piecewise([&](double s) { return traj.velocity(s) * std::polar(1.0, w * s); }, a, b,
                                         cuts, 1);
    r.adiabaticity_peak = std::max(r.adiabaticity_peak, std::abs(running) * std::sqrt(w));
    r.acceleration_ratio = std::max(r.acceleration_ratio, std::abs(traj.acceleration(b)));
  }
  r.adiabaticity_final = std::abs(running) * std::sqrt(w);
  r.acceleration_ratio *= traj.half_window() / traj.oscillator_velocity(traj.start());
  return r;
}

/// CSV columns: t, delta_x, velocity, omega, adiabaticity.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, int samples = 1000) {
  out << "t,delta_x,velocity,omega,adiabaticity\n";
  out.precision(17);
  const double w = traj.omega(traj.start());
  const int panels = traj.default_panels();
  const double h = 2.0 * traj.half_window() / (samples - 1);
  std::complex<double> running{};
  const int sub = std::max(1, panels / (samples - 1));
  const auto cuts = traj.breakpoints();
  for (int i = 0; i < samples; ++i) {
    const double t = traj.start() + i * h;
    if (i > 0) {
      running += quad::integrate_piecewise([&](double s) { return traj.velocity(s) * std::polar(1.0, w * s); },
                                           t - h, t, cuts, sub);
    }
    out << t << ',' << traj.offset(t) << ',' << traj.velocity(t) << ',' << traj.omega(t) << ','
        << std::abs(running) * std::sqrt(w) << '\n';
  }
}

}  // namespace ccgate
