#pragma once

// One atom in a moving, breathing harmonic trap.
//
// The state is expanded over the instantaneous eigenstates of the trap
// (comoving frame). In units hbar = m = 1 the frame change contributes
//   i lambda (a - a^dag) - i kappa (a^2 - a^dag^2),
//   lambda = v sqrt(w/2),  kappa = w' / (4 w),
// on top of the diagonal (n + 1/2) w. Amplitudes are reported relative to
// the undriven trap at the initial frequency, e^{-i w(-tau) (t + tau) / 2}.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <boost/numeric/odeint.hpp>

#include "ccgate/ode.hpp"
#include "ccgate/trajectory.hpp"
#include "ccgate/units.hpp"

namespace ccgate {

using cplx = std::complex<double>;
inline constexpr cplx I{0.0, 1.0};

struct MotionalState {
  Eigen::VectorXcd amplitudes;
  double time = 0.0;

  cplx ground() const { return amplitudes(0); }
  double norm() const { return amplitudes.squaredNorm(); }
  double ground_population() const { return std::norm(amplitudes(0)); }
  double ground_phase() const { return std::arg(amplitudes(0)); }

  static MotionalState level(int n, int levels, double time) {
    if (levels < 2) throw ConfigError("MotionalState: need at least 2 levels");
    if (n < 0 || n >= levels) throw ConfigError("MotionalState: level out of range");
    MotionalState s{Eigen::VectorXcd::Zero(levels), time};
    s.amplitudes(n) = 1.0;
    return s;
  }
};

/// Closed-form driven-oscillator solution for a constant-frequency trap started
/// in its ground state: coherent amplitude alpha(t) and log c_0(t) (gauge above).
struct ExactEvolution {
  double time = 0.0;
  cplx alpha{};
  cplx log_ground{};

  double ground_population() const { return std::exp(2.0 * log_ground.real()); }
  double phase() const { return log_ground.imag(); }
  cplx ground() const { return std::exp(log_ground); }
};

/// alpha(t) = sqrt(w/2) int v e^{i w t'} dt',  d/dt log c0 = -lambda e^{-i w t} int lambda e^{i w s} ds.
/// Integrated with Boost.Odeint's controlled Dormand-Prince stepper, independently
/// of the basis integrator below.
inline ExactEvolution exact_displaced_evolution(const Trajectory& traj,
                                                double t_end = std::numeric_limits<double>::quiet_NaN(),
                                                double tol = 1e-13) {
  if (!traj.constant_frequency()) {
    throw ConfigError("exact_displaced_evolution: requires a constant trap frequency");
  }
  if (std::isnan(t_end)) t_end = traj.end();
  t_end = std::clamp(t_end, traj.start(), traj.end());
  const double w = traj.omega(traj.start());
  const double root = std::sqrt(0.5 * w);
  using state_t = std::vector<cplx>;
  // y[0] = beta = -int lambda e^{iwt}, y[1] = log c0
  auto system = [&](const state_t& y, state_t& dy, double t) {
    const double lambda = traj.velocity(t) * root;
    const cplx rot = std::polar(1.0, w * t);
    dy[0] = -lambda * rot;
    dy[1] = lambda * std::conj(rot) * y[0];
  };
  namespace odeint = boost::numeric::odeint;
  auto stepper = odeint::make_controlled(tol, tol, odeint::runge_kutta_dopri5<state_t>());
  state_t y{cplx{}, cplx{}};
  std::vector<double> cuts{traj.start()};
  for (double c : traj.breakpoints()) {
    if (c > traj.start() && c < t_end) cuts.push_back(c);
  }
  cuts.push_back(t_end);
  std::sort(cuts.begin(), cuts.end());
  // Chunks no longer than the motion time scale keep the controller from
  // stepping over a short pulse out of a long flat stretch.
  const double chunk = 0.5 * std::min(traj.time_scale(), 1.0 / w);
  const double dt0 = 0.1 * chunk;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double span = cuts[i + 1] - cuts[i];
    if (!(span > 0.0)) continue;
    const int pieces = static_cast<int>(std::ceil(span / chunk));
    for (int k = 0; k < pieces; ++k) {
      const double a = cuts[i] + span * k / pieces;
      const double b = k + 1 == pieces ? cuts[i + 1] : cuts[i] + span * (k + 1) / pieces;
      odeint::integrate_adaptive(stepper, system, y, a, b, dt0);
    }
  }
  return {t_end, -y[0], y[1]};
}

/// Comoving single-particle Hamiltonian in units of hbar w_ref (see header comment).
inline void comoving_hamiltonian(double t, const Trajectory& traj, Eigen::MatrixXcd& h) {
  const Eigen::Index n = h.rows();
  h.setZero();
  const double w = traj.omega(t);
  const double lambda = traj.velocity(t) * std::sqrt(0.5 * w);
  const double kappa = traj.omega_rate(t) / (4.0 * w);
  for (Eigen::Index k = 0; k < n; ++k) {
    h(k, k) = (static_cast<double>(k) + 0.5) * w;
    if (k + 1 < n) {
      // <k|a|k+1> = sqrt(k+1)
      const double s = std::sqrt(static_cast<double>(k + 1));
      h(k, k + 1) = I * lambda * s;
      h(k + 1, k) = -I * lambda * s;
    }
    if (k + 2 < n) {
      const double s = std::sqrt(static_cast<double>((k + 1) * (k + 2)));
      h(k, k + 2) = -I * kappa * s;
      h(k + 2, k) = I * kappa * s;
    }
  }
}

inline Eigen::MatrixXcd comoving_hamiltonian(double t, const Trajectory& traj, int levels) {
  if (levels < 2) throw ConfigError("comoving_hamiltonian: need at least 2 levels");
  Eigen::MatrixXcd h(levels, levels);
  comoving_hamiltonian(t, traj, h);
  return h;
}

struct TdseOptions {
  double tol = 1e-9;
  double max_step = 0.0;  // 0: no limit beyond the integrator's own
};

struct TdseResult {
  Eigen::VectorXcd state;
  ode::Stats stats;
  double max_norm_drift = 0.0;
};

/// Integrates i c' = H(t) c from t0 to t1.
///
/// `hamiltonian(t, H)` fills a dense N x N matrix. The diagonal is removed by
/// carrying its running integral Theta_n alongside the amplitudes
/// (c_n = e^{-i Theta_n} c~_n), so the stepper only resolves the couplings.
/// `observe(t, c)` receives Schroedinger-picture amplitudes on accepted steps.
template <class Schedule, class Observer = ode::NoObserver>
TdseResult integrate_tdse(Schedule&& hamiltonian, const Eigen::VectorXcd& c0, double t0, double t1,
                          const TdseOptions& opt, Observer&& observe = {}) {
  if (!(opt.tol > 0.0)) throw ConfigError("integrate_tdse: tolerance must be positive");
  const Eigen::Index n = c0.size();
  const double norm0 = c0.squaredNorm();
  if (std::abs(norm0 - 1.0) > 1e-12) throw ConfigError("integrate_tdse: initial state must be normalized");
  Eigen::VectorXcd y(2 * n);
  y.head(n) = c0;
  y.tail(n).setZero();
  Eigen::MatrixXcd h(n, n);
  Eigen::VectorXcd c(n), r(n), rot(n);

  auto rhs = [&](double t, const Eigen::VectorXcd& yy, Eigen::VectorXcd& dy) {
    hamiltonian(t, h);
    for (Eigen::Index k = 0; k < n; ++k) {
      rot(k) = std::exp(I * yy(n + k));
      c(k) = yy(k) / rot(k);
    }
    r.noalias() = h * c;
    for (Eigen::Index k = 0; k < n; ++k) {
      r(k) -= h(k, k) * c(k);
      dy(k) = -I * rot(k) * r(k);
      dy(n + k) = h(k, k);
    }
  };

  TdseResult result;
  auto back = [n](const Eigen::VectorXcd& yy) {
    Eigen::VectorXcd out(n);
    for (Eigen::Index k = 0; k < n; ++k) out(k) = yy(k) * std::exp(-I * yy(n + k));
    return out;
  };
  auto watch = [&](double t, const Eigen::VectorXcd& yy) {
    const Eigen::VectorXcd cc = back(yy);
    result.max_norm_drift = std::max(result.max_norm_drift, std::abs(cc.squaredNorm() - norm0));
    observe(t, cc);
  };
  ode::Options o;
  o.rel_tol = opt.tol;
  o.abs_tol = opt.tol;
  if (opt.max_step > 0.0) o.max_step = opt.max_step;
  result.stats = ode::integrate(rhs, t0, t1, y, o, watch);
  result.state = back(y);
  return result;
}

struct SingleParticleResult {
  MotionalState state;
  ode::Stats stats;
  double max_norm_drift = 0.0;
  bool truncation_warning = false;
};

/// Evolves one atom over the full window, starting in level `initial`.
/// `observe(t, c)` sees amplitudes in the reporting gauge.
template <class Observer = ode::NoObserver>
SingleParticleResult evolve_single_particle(const Trajectory& traj, int levels, const TdseOptions& opt = {},
                                            int initial = 0, Observer&& observe = {}) {
  const double w0 = traj.omega(traj.start());
  const double t0 = traj.start();
  auto schedule = [&](double t, Eigen::MatrixXcd& h) { comoving_hamiltonian(t, traj, h); };
  auto gauge = [&](double t) { return std::exp(I * 0.5 * w0 * (t - t0)); };
  TdseOptions o = opt;
  if (!(o.max_step > 0.0)) o.max_step = 0.5 * traj.time_scale() + 0.5 / w0;
  const MotionalState start = MotionalState::level(initial, levels, t0);
  const auto res = integrate_tdse(schedule, start.amplitudes, t0, traj.end(), o,
                                  [&](double t, const Eigen::VectorXcd& c) { observe(t, Eigen::VectorXcd(c * gauge(t))); });
  SingleParticleResult out;
  out.state = {res.state * gauge(traj.end()), traj.end()};
  out.stats = res.stats;
  out.max_norm_drift = res.max_norm_drift;
  out.truncation_warning = std::norm(out.state.amplitudes(levels - 1)) > 100.0 * opt.tol;
  return out;
}

/// CSV trace columns: t, p_0..p_{N-1}, norm, phase_c0.
class SingleParticleTrace {
 public:
  explicit SingleParticleTrace(std::ostream& out, int levels) : out_(out) {
    out_.precision(17);
    out_ << "t";
    for (int k = 0; k < levels; ++k) out_ << ",p_" << k;
    out_ << ",norm,phase_c0\n";
  }
  void operator()(double t, const Eigen::VectorXcd& c) const {
    out_ << t;
    for (Eigen::Index k = 0; k < c.size(); ++k) out_ << ',' << std::norm(c(k));
    out_ << ',' << c.squaredNorm() << ',' << std::arg(c(0)) << '\n';
  }

 private:
  std::ostream& out_;
};

}  // namespace ccgate
