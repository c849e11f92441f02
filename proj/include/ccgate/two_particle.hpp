#pragma once

// Two atoms along the transport axis with a contact interaction.
//
// Atom 1 sits on the site at x = 0, atom 2 on the site at x = d; each rides its
// own trajectory. Transverse motion is frozen in Gaussian ground states of
// frequency w_perp, which folds the 3D coupling 4 pi a_s hbar^2 / m into
// g1D = 2 hbar w_perp a_s. A negative imaginary part of a_s removes norm.

#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccgate/quadrature.hpp"
#include "ccgate/single_particle.hpp"
#include "ccgate/trajectory.hpp"
#include "ccgate/units.hpp"

namespace ccgate {

enum class Branch { aa, ab, ba, bb };

inline constexpr std::array<Branch, 4> kBranches{Branch::aa, Branch::ab, Branch::ba, Branch::bb};

inline const char* branch_name(Branch b) {
  switch (b) {
    case Branch::aa: return "aa";
    case Branch::ab: return "ab";
    case Branch::ba: return "ba";
    case Branch::bb: return "bb";
  }
  return "?";
}

/// g1D = 2 hbar w_perp a_s.
inline cplx effective_1d_coupling(cplx scattering_length, double omega_perp, double hbar = 1.0) {
  if (!(omega_perp > 0.0)) throw ConfigError("effective_1d_coupling: omega_perp must be positive");
  return 2.0 * hbar * omega_perp * scattering_length;
}

struct InteractionModel {
  cplx scattering_length{};  // in units of a0
  double transverse_omega = 1.0;

  void validate() const {
    if (scattering_length.imag() > 0.0) {
      throw ConfigError("InteractionModel: Im(a_s) must be <= 0 (loss only)");
    }
    if (!(transverse_omega > 0.0)) throw ConfigError("InteractionModel: transverse frequency must be positive");
  }
  cplx coupling_1d() const { return effective_1d_coupling(scattering_length, transverse_omega); }
  cplx coupling_3d() const { return 4.0 * units::pi * scattering_length; }
};

/// Which trajectory each atom rides; atom 2's site is displaced by `separation`.
struct PairGeometry {
  Trajectory first;
  Trajectory second;
  double separation = 0.0;

  double center_first(double t) const { return first.offset(t); }
  double center_second(double t) const { return separation + second.offset(t); }
  double start() const { return std::max(first.start(), second.start()); }
  double end() const { return std::min(first.end(), second.end()); }
};

/// Branch xy: atom 1 follows trajectory x, atom 2 trajectory y.
inline PairGeometry branch_geometry(Branch branch, const Trajectory& a, const Trajectory& b, double separation) {
  switch (branch) {
    case Branch::aa: return {a, a, separation};
    case Branch::ab: return {a, b, separation};
    case Branch::ba: return {b, a, separation};
    case Branch::bb: return {b, b, separation};
  }
  throw ConfigError("branch_geometry: unknown branch");
}

/// int |phi_0(x - c1)|^2 |phi_0(x - c2)|^2 dx for Gaussian ground states of widths a1, a2.
inline double ground_density_overlap(double c1, double c2, double a1, double a2) {
  const double s2 = a1 * a1 + a2 * a2;
  const double dc = c1 - c2;
  return std::exp(-dc * dc / s2) / std::sqrt(units::pi * s2);
}

/// Interaction energy of the two instantaneous ground states, g1D times the density overlap.
inline cplx energy_shift(const PairGeometry& pair, const InteractionModel& model, double t) {
  return model.coupling_1d() * ground_density_overlap(pair.center_first(t), pair.center_second(t),
                                                      pair.first.ground_state_size(t),
                                                      pair.second.ground_state_size(t));
}

/// (1/hbar) int Delta E dt. The ab amplitude picks up e^{-i times this}, so a
/// negative imaginary part is half the log of the surviving probability.
inline cplx collisional_phase_adiabatic(const PairGeometry& pair, const InteractionModel& model, int panels = 0) {
  if (panels <= 0) panels = std::max(pair.first.default_panels(), pair.second.default_panels());
  std::vector<double> cuts = pair.first.breakpoints();
  for (double c : pair.second.breakpoints()) cuts.push_back(c);
  const double overlap = quad::integrate_piecewise(
      [&](double t) {
        return ground_density_overlap(pair.center_first(t), pair.center_second(t), pair.first.ground_state_size(t),
                                      pair.second.ground_state_size(t));
      },
      pair.start(), pair.end(), cuts, panels);
  return model.coupling_1d() * overlap;
}

/// T_{m'n',mn} = int phi_m'(x - c1) phi_n'(x - c2) phi_m(x - c1) phi_n(x - c2) dx.
class ContactTable {
 public:
  explicit ContactTable(int levels) : n_(levels), data_(static_cast<std::size_t>(levels) * levels * levels * levels) {}
  int levels() const { return n_; }
  double operator()(int mp, int np, int m, int n) const { return data_[index(mp, np, m, n)]; }
  double& operator()(int mp, int np, int m, int n) { return data_[index(mp, np, m, n)]; }

 private:
  std::size_t index(int mp, int np, int m, int n) const {
    return ((static_cast<std::size_t>(mp) * n_ + np) * n_ + m) * n_ + n;
  }
  int n_;
  std::vector<double> data_;
};

/// Applies the contact interaction to a two-particle amplitude matrix without
/// building the N^4 table: Gauss-Hermite quadrature on the combined Gaussian
/// envelope, 2N + 4 nodes (exact for the polynomial degree involved).
class ContactOperator {
 public:
  explicit ContactOperator(int levels)
      : n_(levels), rule_(quad::gauss_hermite(2 * levels + 4)), u_(levels, node_count()), v_(levels, node_count()),
        w_(node_count()), s_(node_count()), buf_(levels) {}

  int levels() const { return n_; }
  int node_count() const { return static_cast<int>(rule_.nodes.size()); }

  void update(double c1, double c2, double a1, double a2) {
    const double inv = 1.0 / (a1 * a1) + 1.0 / (a2 * a2);
    const double sigma = 1.0 / std::sqrt(inv);
    const double mu = (c1 / (a1 * a1) + c2 / (a2 * a2)) / inv;
    for (int q = 0; q < node_count(); ++q) {
      const double x = mu + sigma * rule_.nodes[q];
      quad::oscillator_functions(x, c1, a1, buf_);
      for (int k = 0; k < n_; ++k) u_(k, q) = buf_[k];
      quad::oscillator_functions(x, c2, a2, buf_);
      for (int k = 0; k < n_; ++k) v_(k, q) = buf_[k];
      w_(q) = sigma * rule_.scaled_weights[q];
    }
  }

  /// out += g T(C)
  void apply(const Eigen::MatrixXcd& c, Eigen::MatrixXcd& out, cplx g) {
    // s_q = sum_{mn} U_mq C_mn V_nq
    tmp_.noalias() = u_.transpose() * c;  // Q x N
    for (int q = 0; q < node_count(); ++q) {
      s_(q) = g * w_(q) * (tmp_.row(q) * v_.col(q)).value();
    }
    out.noalias() += u_ * s_.asDiagonal() * v_.transpose();
  }

  ContactTable table() const {
    ContactTable t(n_);
    for (int mp = 0; mp < n_; ++mp)
      for (int np = 0; np < n_; ++np)
        for (int m = 0; m < n_; ++m)
          for (int n = 0; n < n_; ++n) {
            double sum = 0.0;
            for (int q = 0; q < node_count(); ++q) sum += w_(q) * u_(mp, q) * u_(m, q) * v_(np, q) * v_(n, q);
            t(mp, np, m, n) = sum;
          }
    return t;
  }

 private:
  int n_;
  quad::GaussHermiteRule rule_;
  Eigen::MatrixXd u_, v_;
  Eigen::VectorXd w_;
  Eigen::VectorXcd s_;
  Eigen::MatrixXcd tmp_;
  std::vector<double> buf_;
};

inline ContactTable contact_matrix_elements(double c1, double c2, double a1, double a2, int levels) {
  if (levels < 1 || levels > 16) throw ConfigError("contact_matrix_elements: levels must be in [1, 16]");
  ContactOperator op(levels);
  op.update(c1, c2, a1, a2);
  return op.table();
}

struct TwoParticleState {
  Eigen::MatrixXcd amplitudes;  // C(m, n): atom 1 level m, atom 2 level n
  Branch branch = Branch::ab;
  double time = 0.0;

  double norm() const { return amplitudes.squaredNorm(); }
};

struct TwoParticleOptions {
  TdseOptions tdse{};
  int initial_first = 0;
  int initial_second = 0;
  /// Also run the non-interacting reference (product of single-particle runs).
  bool with_reference = true;
};

struct TwoParticleResult {
  TwoParticleState state;
  // Excess phase of the initial amplitude over the a_s = 0 reference, in the
  // convention |ab> -> e^{i phi}|ab>; for weak coupling it is minus the
  // adiabatic integral. NaN without reference.
  double collisional_phase = 0.0;
  double excitation_leakage = 0.0;
  double norm_loss = 0.0;
  bool truncation_warning = false;
  double max_norm_drift = 0.0;
  cplx reference_amplitude{};
  ode::Stats stats;
};

/// Integrates i C' = [H_1 x 1 + 1 x H_2 + g1D T(t)] C from C = |m0 n0>.
///
/// The diagonal oscillator energies are carried as two running phase integrals
/// (one per atom) so the stepper only resolves couplings and the interaction.
/// `observe(t, C)` receives amplitudes in the reporting gauge.
template <class Observer = ode::NoObserver>
TwoParticleResult evolve_two_particle(Branch branch, const PairGeometry& pair, const InteractionModel& model,
                                      int levels, const TwoParticleOptions& opt = {}, Observer&& observe = {}) {
  model.validate();
  if (levels < 2) throw ConfigError("evolve_two_particle: need at least 2 levels per atom");
  if (opt.initial_first < 0 || opt.initial_first >= levels || opt.initial_second < 0 ||
      opt.initial_second >= levels) {
    throw ConfigError("evolve_two_particle: initial levels out of range");
  }
  const int n = levels;
  const Eigen::Index nn = static_cast<Eigen::Index>(n) * n;
  const double t0 = pair.start(), t1 = pair.end();
  const double w1_0 = pair.first.omega(t0), w2_0 = pair.second.omega(t0);
  const cplx g = model.coupling_1d();

  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(nn + 2);
  y(opt.initial_first + static_cast<Eigen::Index>(n) * opt.initial_second) = 1.0;

  ContactOperator contact(n);
  Eigen::MatrixXcd k1(n, n), k2(n, n), c(n, n), r(n, n);
  Eigen::VectorXcd p1(n), p2(n);

  auto phases = [&](double om1, double om2) {
    for (int k = 0; k < n; ++k) {
      p1(k) = std::polar(1.0, -k * om1);
      p2(k) = std::polar(1.0, -k * om2);
    }
  };

  auto rhs = [&](double t, const Eigen::VectorXcd& yy, Eigen::VectorXcd& dy) {
    phases(yy(nn).real(), yy(nn + 1).real());
    Eigen::Map<const Eigen::MatrixXcd> ct(yy.data(), n, n);
    c = p1.asDiagonal() * ct * p2.asDiagonal();
    comoving_hamiltonian(t, pair.first, k1);
    comoving_hamiltonian(t, pair.second, k2);
    k1.diagonal().setZero();
    k2.diagonal().setZero();
    r.noalias() = k1 * c;
    r.noalias() += c * k2.transpose();
    if (g != cplx{}) {
      contact.update(pair.center_first(t), pair.center_second(t), pair.first.ground_state_size(t),
                     pair.second.ground_state_size(t));
      contact.apply(c, r, g);
    }
    Eigen::Map<Eigen::MatrixXcd> dct(dy.data(), n, n);
    dct = -I * (p1.conjugate().asDiagonal() * r * p2.conjugate().asDiagonal());
    dy(nn) = pair.first.omega(t);
    dy(nn + 1) = pair.second.omega(t);
  };

  auto to_report = [&](double t, const Eigen::VectorXcd& yy) {
    const double om1 = yy(nn).real(), om2 = yy(nn + 1).real();
    Eigen::MatrixXcd out(n, n);
    for (int m = 0; m < n; ++m)
      for (int k = 0; k < n; ++k) {
        out(m, k) = yy(m + static_cast<Eigen::Index>(n) * k) *
                    std::polar(1.0, -(m + 0.5) * om1 - (k + 0.5) * om2 + 0.5 * (w1_0 + w2_0) * (t - t0));
      }
    return out;
  };

  TwoParticleResult result;
  auto watch = [&](double t, const Eigen::VectorXcd& yy) {
    const Eigen::MatrixXcd cc = to_report(t, yy);
    const double norm = cc.squaredNorm();
    if (model.scattering_length.imag() == 0.0) {
      result.max_norm_drift = std::max(result.max_norm_drift, std::abs(norm - 1.0));
    }
    observe(t, cc);
  };

  ode::Options o;
  o.rel_tol = opt.tdse.tol;
  o.abs_tol = opt.tdse.tol;
  o.max_step = opt.tdse.max_step > 0.0
                   ? opt.tdse.max_step
                   : 0.5 * std::min(pair.first.time_scale(), pair.second.time_scale()) + 0.5 / std::max(w1_0, w2_0);
  result.stats = ode::integrate(rhs, t0, t1, y, o, watch);

  result.state = {to_report(t1, y), branch, t1};
  const double norm = result.state.norm();
  const cplx init = result.state.amplitudes(opt.initial_first, opt.initial_second);
  result.norm_loss = std::max(0.0, 1.0 - norm);
  result.excitation_leakage = norm > 0.0 ? std::max(0.0, 1.0 - std::norm(init) / norm) : 1.0;
  const double top = result.state.amplitudes.row(n - 1).squaredNorm() + result.state.amplitudes.col(n - 1).squaredNorm();
  result.truncation_warning = top > 100.0 * opt.tdse.tol;

  if (opt.with_reference) {
    const auto r1 = evolve_single_particle(pair.first, n, opt.tdse, opt.initial_first);
    const auto r2 = evolve_single_particle(pair.second, n, opt.tdse, opt.initial_second);
    result.reference_amplitude = r1.state.amplitudes(opt.initial_first) * r2.state.amplitudes(opt.initial_second);
    // The amplitude carries e^{-i int dE}; pick the 2 pi branch nearest that estimate.
    const double guess = -collisional_phase_adiabatic(pair, model).real();
    const double raw = std::arg(init / result.reference_amplitude);
    result.collisional_phase = raw + 2.0 * units::pi * std::round((guess - raw) / (2.0 * units::pi));
  } else {
    result.collisional_phase = std::numeric_limits<double>::quiet_NaN();
  }
  return result;
}

/// CSV trace columns: t, re_c00, im_c00, leakage, norm, delta_e (real part, units hbar w).
class TwoParticleTrace {
 public:
  TwoParticleTrace(std::ostream& out, const PairGeometry& pair, const InteractionModel& model)
      : out_(out), pair_(pair), model_(model) {
    out_.precision(17);
    out_ << "t,re_c00,im_c00,leakage,norm,delta_e\n";
  }
  void operator()(double t, const Eigen::MatrixXcd& c) const {
    const double norm = c.squaredNorm();
    const double leak = norm > 0 ? 1.0 - std::norm(c(0, 0)) / norm : 1.0;
    out_ << t << ',' << c(0, 0).real() << ',' << c(0, 0).imag() << ',' << leak << ',' << norm << ','
         << energy_shift(pair_, model_, t).real() << '\n';
  }

 private:
  std::ostream& out_;
  const PairGeometry& pair_;
  const InteractionModel& model_;
};

}  // namespace ccgate
