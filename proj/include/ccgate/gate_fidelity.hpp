#pragma once

// Four-branch phase gate: the internal state selects which trajectory each atom
// rides, the motion is traced out, and the result is compared with the ideal
// diagonal gate.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "ccgate/parallel.hpp"
#include "ccgate/single_particle.hpp"
#include "ccgate/two_particle.hpp"
#include "ccgate/units.hpp"

namespace ccgate {

struct GatePhases {
  double a = 0.0;
  double b = 0.0;
  double ab = 0.0;

  /// Phases of |aa>, |ab>, |ba>, |bb> under the ideal gate.
  std::array<double, 4> branch_phases() const { return {2.0 * a, a + b + ab, a + b, 2.0 * b}; }
};

inline int branch_index(Branch b) { return static_cast<int>(b); }

/// diag(e^{2i a}, e^{i(a + b + ab)}, e^{i(a + b)}, e^{2i b}) in the order aa, ab, ba, bb.
inline Eigen::Matrix4cd ideal_gate(const GatePhases& p) {
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
  const auto th = p.branch_phases();
  for (int i = 0; i < 4; ++i) u(i, i) = std::polar(1.0, th[i]);
  return u;
}

/// Boltzmann occupations exp(-n w / kT) over `levels`, normalized; kT in units of hbar w.
inline std::vector<double> thermal_occupations(double kt_over_hbar_omega, int levels) {
  if (!(kt_over_hbar_omega >= 0.0)) throw ConfigError("thermal_occupations: temperature must be >= 0");
  if (levels < 1) throw ConfigError("thermal_occupations: need at least one level");
  std::vector<double> p(levels, 0.0);
  if (kt_over_hbar_omega == 0.0) {
    p[0] = 1.0;
    return p;
  }
  double sum = 0.0;
  for (int n = 0; n < levels; ++n) sum += p[n] = std::exp(-n / kt_over_hbar_omega);
  for (double& x : p) x /= sum;
  return p;
}

inline std::vector<double> thermal_motional_state(double kelvin, double omega_rad_per_s, int levels) {
  if (!(kelvin >= 0.0)) throw ConfigError("thermal_motional_state: temperature must be >= 0");
  if (!(omega_rad_per_s > 0.0)) throw ConfigError("thermal_motional_state: omega must be positive");
  return thermal_occupations(units::boltzmann * kelvin / (units::hbar * omega_rad_per_s), levels);
}

/// Product occupations p_m p_n of the two atoms above `cutoff`, renormalized.
inline std::map<std::pair<int, int>, double> thermal_pairs(const std::vector<double>& p, double cutoff = 1e-6) {
  std::map<std::pair<int, int>, double> out;
  double sum = 0.0;
  for (std::size_t m = 0; m < p.size(); ++m)
    for (std::size_t n = 0; n < p.size(); ++n) {
      const double w = p[m] * p[n];
      if (w >= cutoff) {
        out[{static_cast<int>(m), static_cast<int>(n)}] = w;
        sum += w;
      }
    }
  for (auto& kv : out) kv.second /= sum;
  return out;
}

struct ChannelSpec {
  Trajectory a;
  Trajectory b;
  double separation = 0.0;
  InteractionModel interaction;
  int levels = 10;
  TdseOptions tdse{};
};

struct BranchRun {
  Branch branch = Branch::aa;
  int first = 0;
  int second = 0;
  Eigen::MatrixXcd amplitudes;
  double leakage = 0.0;
  double norm_loss = 0.0;
  bool truncation_warning = false;
};

/// Branch evolutions for every requested initial motional pair plus the
/// single-atom runs that fix the gate phases.
struct GateChannel {
  GatePhases phases;
  std::vector<BranchRun> runs;
  // single-atom final amplitude of level n started in level n, per trajectory
  std::vector<cplx> single_a;
  std::vector<cplx> single_b;

  const BranchRun* find(Branch b, int m, int n) const {
    for (const auto& r : runs)
      if (r.branch == b && r.first == m && r.second == n) return &r;
    return nullptr;
  }
  const BranchRun& at(Branch b, int m, int n) const {
    if (const auto* r = find(b, m, n)) return *r;
    throw ConfigError("GateChannel: no branch run for the requested motional pair");
  }
};

/// Runs all four branches for each pair in `pairs` (always including (0, 0)).
/// The gate phases come from the ground-state runs: phi^x = arg c^x_0 and
/// phi^ab the excess of the ab branch over c^a_0 c^b_0.
inline GateChannel simulate_channel(const ChannelSpec& spec, std::vector<std::pair<int, int>> pairs = {{0, 0}},
                                    unsigned workers = 1) {
  spec.interaction.validate();
  if (std::find(pairs.begin(), pairs.end(), std::pair<int, int>{0, 0}) == pairs.end()) pairs.insert(pairs.begin(), {0, 0});
  int top = 0;
  for (const auto& [m, n] : pairs) {
    if (m < 0 || n < 0 || m >= spec.levels || n >= spec.levels) throw ConfigError("simulate_channel: pair out of range");
    top = std::max({top, m, n});
  }

  GateChannel ch;
  ch.single_a.resize(top + 1);
  ch.single_b.resize(top + 1);
  ch.runs.resize(4 * pairs.size());
  const std::size_t singles = 2 * static_cast<std::size_t>(top + 1);

  parallel_for(singles + ch.runs.size(), workers, [&](std::size_t job) {
    if (job < singles) {
      const int level = static_cast<int>(job / 2);
      const Trajectory& t = job % 2 == 0 ? spec.a : spec.b;
      const auto r = evolve_single_particle(t, spec.levels, spec.tdse, level);
      (job % 2 == 0 ? ch.single_a : ch.single_b)[level] = r.state.amplitudes(level);
      return;
    }
    const std::size_t k = job - singles;
    const Branch br = kBranches[k % 4];
    const auto [m, n] = pairs[k / 4];
    TwoParticleOptions o;
    o.tdse = spec.tdse;
    o.initial_first = m;
    o.initial_second = n;
    o.with_reference = false;
    const auto res = evolve_two_particle(br, branch_geometry(br, spec.a, spec.b, spec.separation), spec.interaction,
                                         spec.levels, o);
    ch.runs[k] = {br, m, n, res.state.amplitudes, res.excitation_leakage, res.norm_loss, res.truncation_warning};
  });

  ch.phases.a = std::arg(ch.single_a[0]);
  ch.phases.b = std::arg(ch.single_b[0]);
  const cplx c00 = ch.at(Branch::ab, 0, 0).amplitudes(0, 0);
  const double raw = std::arg(c00 / (ch.single_a[0] * ch.single_b[0]));
  const double guess =
      -collisional_phase_adiabatic(branch_geometry(Branch::ab, spec.a, spec.b, spec.separation), spec.interaction).real();
  ch.phases.ab = raw + 2.0 * units::pi * std::round((guess - raw) / (2.0 * units::pi));
  return ch;
}

/// Reduced form of the fidelity for diagonal channels:
///   F(psi) = sum_ij q_i q_j Re M_ij,  q_i = |psi_i|^2,
///   M_ij = sum_mn p_mn e^{i(th_i - th_j)} <chi_i^mn | chi_j^mn>,
/// where chi_i^mn is the final motional state of branch i from |mn>.
inline Eigen::Matrix4d fidelity_kernel(const GateChannel& ch, const std::map<std::pair<int, int>, double>& occupation,
                                       const std::array<double, 4>& target) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (const auto& [pair, w] : occupation) {
    std::array<const Eigen::MatrixXcd*, 4> chi{};
    for (int i = 0; i < 4; ++i) chi[i] = &ch.at(kBranches[i], pair.first, pair.second).amplitudes;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const cplx overlap = (chi[i]->array().conjugate() * chi[j]->array()).sum();
        m(i, j) += w * std::polar(1.0, target[i] - target[j]) * overlap;
      }
  }
  return m.real();
}

/// <psi~| tr_ext(U (|psi><psi| x rho) U^dag) |psi~> for an arbitrary input.
inline double fidelity_for_input(const Eigen::Matrix4d& kernel, const Eigen::Vector4cd& psi) {
  const Eigen::Vector4d q = psi.cwiseAbs2() / psi.squaredNorm();
  return q.dot(kernel * q);
}

struct SimplexMinimum {
  double value = 0.0;
  Eigen::Vector4d weights = Eigen::Vector4d::Zero();
};

/// Exact minimum of q^T A q over the probability simplex. Each face is checked
/// for an interior stationary point of the restricted quadratic (KKT with the
/// face's active set); vertices are faces of size one.
inline SimplexMinimum minimize_on_simplex(const Eigen::Matrix4d& a) {
  const Eigen::Matrix4d s = 0.5 * (a + a.transpose());
  SimplexMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  for (int mask = 1; mask < 16; ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < 4; ++i)
      if (mask & (1 << i)) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(k + 1, k + 1);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
    for (int i = 0; i < k; ++i) {
      for (int j = 0; j < k; ++j) kkt(i, j) = 2.0 * s(idx[i], idx[j]);
      kkt(i, k) = kkt(k, i) = 1.0;
    }
    rhs(k) = 1.0;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd sol = lu.solve(rhs);
    Eigen::Vector4d q = Eigen::Vector4d::Zero();
    bool inside = true;
    for (int i = 0; i < k; ++i) {
      if (sol(i) < -1e-14) inside = false;
      q(idx[i]) = std::max(0.0, sol(i));
    }
    if (!inside) continue;
    q /= q.sum();
    const double v = q.dot(s * q);
    if (v < best.value) best = {v, q};
  }
  return best;
}

struct FidelityReport {
  double minimum = 1.0;
  double average = 1.0;
  Eigen::Vector4cd argmin = Eigen::Vector4cd::Zero();
  std::array<double, 4> leakage{};
  std::array<double, 4> norm_loss{};
  GatePhases phases;
  bool converged = true;
};

/// Haar average of F over pure two-qubit inputs: (sum_i M_ii + sum_ij M_ij) / 20.
inline double average_fidelity(const Eigen::Matrix4d& kernel) { return (kernel.trace() + kernel.sum()) / 20.0; }

enum class PhaseReference { ground, thermal };

/// Minimum fidelity for the occupations `p` (per atom). With the ground
/// reference the target phases are the channel's T = 0 phases; the thermal
/// reference re-extracts them from the occupation-weighted diagonal amplitudes.
inline FidelityReport min_fidelity(const GateChannel& ch, const std::vector<double>& p,
                                   PhaseReference reference = PhaseReference::ground, double cutoff = 1e-6) {
  const auto occ = thermal_pairs(p, cutoff);
  std::array<double, 4> target = ch.phases.branch_phases();
  if (reference == PhaseReference::thermal) {
    for (int i = 0; i < 4; ++i) {
      cplx acc{};
      for (const auto& [pair, w] : occ) acc += w * ch.at(kBranches[i], pair.first, pair.second).amplitudes(pair.first, pair.second);
      target[i] = std::arg(acc);
    }
  }
  const Eigen::Matrix4d kernel = fidelity_kernel(ch, occ, target);
  const auto mn = minimize_on_simplex(kernel);

  FidelityReport rep;
  rep.phases = ch.phases;
  rep.average = std::clamp(average_fidelity(kernel), 0.0, 1.0);
  rep.converged = std::isfinite(mn.value);
  rep.minimum = rep.converged ? std::clamp(mn.value, 0.0, rep.average) : std::min(kernel.diagonal().minCoeff(), 1.0);
  for (int i = 0; i < 4; ++i) rep.argmin(i) = std::sqrt(mn.weights(i));
  for (const auto& [pair, w] : occ)
    for (int i = 0; i < 4; ++i) {
      const auto& r = ch.at(kBranches[i], pair.first, pair.second);
      rep.leakage[i] += w * r.leakage;
      rep.norm_loss[i] += w * r.norm_loss;
    }
  return rep;
}

/// Motional pairs needed for the given temperatures (kT / hbar w) at `cutoff`.
inline std::vector<std::pair<int, int>> required_pairs(const std::vector<double>& temperatures, int levels,
                                                       double cutoff = 1e-6) {
  std::vector<std::pair<int, int>> out;
  for (double kt : temperatures)
    for (const auto& kv : thermal_pairs(thermal_occupations(kt, levels), cutoff))
      if (std::find(out.begin(), out.end(), kv.first) == out.end()) out.push_back(kv.first);
  std::sort(out.begin(), out.end());
  return out;
}

inline nlohmann::ordered_json to_json(const GatePhases& p) {
  return {{"a", p.a}, {"b", p.b}, {"ab", p.ab}};
}

inline nlohmann::ordered_json to_json(const FidelityReport& r) {
  nlohmann::ordered_json state = nlohmann::ordered_json::array();
  for (int i = 0; i < 4; ++i) state.push_back({{"re", r.argmin(i).real()}, {"im", r.argmin(i).imag()}});
  nlohmann::ordered_json leak, loss;
  for (int i = 0; i < 4; ++i) {
    leak[branch_name(kBranches[i])] = r.leakage[i];
    loss[branch_name(kBranches[i])] = r.norm_loss[i];
  }
  return {{"F", r.minimum},    {"F_avg", r.average}, {"argmin_state", state}, {"leakage", leak},
          {"norm_loss", loss}, {"phases", to_json(r.phases)}, {"converged", r.converged}};
}

}  // namespace ccgate
