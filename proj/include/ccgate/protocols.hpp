#pragma once

// Internal-state register experiments built from laser pulses and the
// collisional phase gate, plus the diagonal many-atom phase model.

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include "json.hpp"

#include "ccgate/gate_fidelity.hpp"
#include "ccgate/levels.hpp"
#include "ccgate/units.hpp"

namespace ccgate {

enum class Transition { ab, ac, cb };

inline Transition parse_transition(const std::string& s) {
  if (s == "ab" || s == "a-b") return Transition::ab;
  if (s == "ac" || s == "a-c") return Transition::ac;
  if (s == "cb" || s == "c-b") return Transition::cb;
  throw ConfigError("unknown transition '" + s + "' (expected ab, ac or cb)");
}

/// Dense amplitudes over the product of per-atom level sets. Every atom has
/// {a, b}; atom 0 may additionally carry c. Atom 0 is the most significant digit.
class RegisterState {
 public:
  static constexpr int kMaxAtoms = 12;

  explicit RegisterState(int atoms, bool first_has_c = false) : atoms_(atoms), first_has_c_(first_has_c) {
    if (atoms < 1 || atoms > kMaxAtoms) throw ConfigError("RegisterState: atom count must be in [1, 12]");
    dims_.assign(atoms, 2);
    if (first_has_c) dims_[0] = 3;
    std::size_t total = 1;
    for (int d : dims_) total *= d;
    amps_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(total));
    amps_(0) = 1.0;
  }

  int atoms() const { return atoms_; }
  bool first_has_c() const { return first_has_c_; }
  int dim(int atom) const { return dims_.at(atom); }
  Eigen::Index size() const { return amps_.size(); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Eigen::VectorXcd& amplitudes() { return amps_; }
  double norm() const { return amps_.squaredNorm(); }

  /// Upper bound on the state fidelity from imperfect collisions (product of multipliers).
  double fidelity_bound = 1.0;

  bool has_level(int atom, Level l) const { return l != Level::c || (atom == 0 && first_has_c_); }

  std::vector<Level> decode(Eigen::Index index) const {
    std::vector<Level> out(atoms_);
    for (int k = atoms_ - 1; k >= 0; --k) {
      out[k] = static_cast<Level>(index % dims_[k]);
      index /= dims_[k];
    }
    return out;
  }

  Eigen::Index encode(const std::vector<Level>& config) const {
    if (static_cast<int>(config.size()) != atoms_) throw ConfigError("RegisterState: configuration size mismatch");
    Eigen::Index index = 0;
    for (int k = 0; k < atoms_; ++k) {
      const int l = static_cast<int>(config[k]);
      if (l >= dims_[k]) throw ConfigError("RegisterState: level not available on this atom");
      index = index * dims_[k] + l;
    }
    return index;
  }

  cplx amplitude(const std::vector<Level>& config) const { return amps_(encode(config)); }

  /// Stride of atom k's digit in the flat index.
  Eigen::Index stride(int atom) const {
    Eigen::Index s = 1;
    for (int k = atom + 1; k < atoms_; ++k) s *= dims_[k];
    return s;
  }

 private:
  int atoms_;
  bool first_has_c_;
  std::vector<int> dims_;
  Eigen::VectorXcd amps_;
};

/// Two-level rotation on (lower, upper) = (a, b), (a, c) or (c, b):
///   |lower> -> cos(A/2)|lower> + e^{i phi} sin(A/2)|upper>
///   |upper> -> cos(A/2)|upper> - e^{-i phi} sin(A/2)|lower>
inline void apply_pulse(RegisterState& reg, const std::vector<int>& atoms, double area, double axis_phase,
                        Transition tr = Transition::ab) {
  Level lo = Level::a, hi = Level::b;
  if (tr == Transition::ac) hi = Level::c;
  if (tr == Transition::cb) lo = Level::c;
  const double c = std::cos(0.5 * area), s = std::sin(0.5 * area);
  const cplx up = std::polar(s, axis_phase);
  const cplx down = -std::polar(s, -axis_phase);
  for (int atom : atoms) {
    if (atom < 0 || atom >= reg.atoms()) throw ConfigError("apply_pulse: atom index out of range");
    if (!reg.has_level(atom, lo) || !reg.has_level(atom, hi)) {
      throw ConfigError(std::string("apply_pulse: transition ") + level_name(lo) + "-" + level_name(hi) +
                        " not available on atom " + std::to_string(atom));
    }
    const Eigen::Index stride = reg.stride(atom);
    const int d = reg.dim(atom);
    const Eigen::Index il = static_cast<int>(lo), ih = static_cast<int>(hi);
    auto& v = reg.amplitudes();
    for (Eigen::Index block = 0; block < v.size(); block += stride * d) {
      for (Eigen::Index off = 0; off < stride; ++off) {
        const Eigen::Index jl = block + il * stride + off, jh = block + ih * stride + off;
        const cplx x = v(jl), y = v(jh);
        v(jl) = c * x + down * y;
        v(jh) = up * x + c * y;
      }
    }
  }
}

inline void apply_pulse(RegisterState& reg, int atom, double area, double axis_phase, Transition tr = Transition::ab) {
  apply_pulse(reg, std::vector<int>{atom}, area, axis_phase, tr);
}

/// Phase table for one collision between atoms i (left) and j (right).
/// Single-atom phases accrue on both atoms; the interaction phase appears only
/// when atom i is in a (or c) and atom j in b (or a / b for c).
struct CollisionPhases {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double ab = 0.0;
  double ca = 0.0;
  double cb = 0.0;
  double fidelity = 1.0;  // multiplier on RegisterState::fidelity_bound

  static CollisionPhases from_gate(const GatePhases& g, double fidelity = 1.0) {
    CollisionPhases p;
    p.a = g.a;
    p.b = g.b;
    p.ab = g.ab;
    p.fidelity = fidelity;
    return p;
  }

  double single(Level l) const { return l == Level::a ? a : l == Level::b ? b : c; }
  double pair(Level li, Level lj) const {
    if (li == Level::a && lj == Level::b) return ab;
    if (li == Level::c && lj == Level::a) return ca;
    if (li == Level::c && lj == Level::b) return cb;
    return 0.0;
  }
};

inline void apply_collision(RegisterState& reg, int i, int j, const CollisionPhases& ph) {
  if (i == j) throw ConfigError("apply_collision: pair must be distinct");
  if (i < 0 || j < 0 || i >= reg.atoms() || j >= reg.atoms()) throw ConfigError("apply_collision: atom out of range");
  const Eigen::Index si = reg.stride(i), sj = reg.stride(j);
  auto& v = reg.amplitudes();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const auto li = static_cast<Level>((k / si) % reg.dim(i));
    const auto lj = static_cast<Level>((k / sj) % reg.dim(j));
    v(k) *= std::polar(1.0, ph.single(li) + ph.single(lj) + ph.pair(li, lj));
  }
  reg.fidelity_bound *= ph.fidelity;
}

struct RamseySettings {
  double first_area = units::pi / 2;
  double second_area = units::pi / 2;
  double first_phase = 0.0;
  double second_phase = 0.0;  // readout axis; away from 0 and pi the signal depends on the sign of phi^ab
};

struct RamseyResult {
  std::vector<double> population_a;
  std::vector<double> population_b;
  double total_b = 0.0;  // mean b population over atoms
};

inline RamseyResult measure_populations(const RegisterState& reg) {
  RamseyResult r;
  r.population_a.assign(reg.atoms(), 0.0);
  r.population_b.assign(reg.atoms(), 0.0);
  for (Eigen::Index k = 0; k < reg.size(); ++k) {
    const double p = std::norm(reg.amplitudes()(k));
    if (p == 0.0) continue;
    const auto cfg = reg.decode(k);
    for (int atom = 0; atom < reg.atoms(); ++atom) {
      if (cfg[atom] == Level::a) r.population_a[atom] += p;
      if (cfg[atom] == Level::b) r.population_b[atom] += p;
    }
  }
  for (double p : r.population_b) r.total_b += p / reg.atoms();
  return r;
}

/// Pulse, collision, pulse, measure on two atoms.
inline RamseyResult ramsey_signal(const GatePhases& phases, const RamseySettings& s = {}) {
  RegisterState reg(2);
  apply_pulse(reg, {0, 1}, s.first_area, s.first_phase);
  apply_collision(reg, 0, 1, CollisionPhases::from_gate(phases));
  apply_pulse(reg, {0, 1}, s.second_area, s.second_phase);
  return measure_populations(reg);
}

inline RamseyResult ramsey_signal(double phi_ab, const RamseySettings& s = {}) {
  return ramsey_signal(GatePhases{0.0, 0.0, phi_ab}, s);
}

/// |<target|psi>|^2 maximized over per-atom phases for a two-component target
/// (|x> + e^{i.}|y>)/sqrt2 with x, y differing on every atom: (|psi_x| + |psi_y|)^2 / 2.
inline double two_component_fidelity(const RegisterState& reg, const std::vector<Level>& x,
                                     const std::vector<Level>& y) {
  const double s = std::abs(reg.amplitude(x)) + std::abs(reg.amplitude(y));
  return 0.5 * s * s;
}

struct ProtocolOutcome {
  RegisterState state;
  double fidelity = 0.0;
};

/// EPR pair (|ab> - |ba>)/sqrt2: pi/2 on both atoms, collision, pi/2 on atom 2.
inline ProtocolOutcome epr_protocol(const CollisionPhases& phases) {
  RegisterState reg(2);
  apply_pulse(reg, {0, 1}, units::pi / 2, 0.0);
  apply_collision(reg, 0, 1, phases);
  apply_pulse(reg, 1, units::pi / 2, units::pi);
  const double f = two_component_fidelity(reg, {Level::a, Level::b}, {Level::b, Level::a});
  return {reg, f * reg.fidelity_bound};
}

inline ProtocolOutcome epr_protocol(double phi_ab) {
  CollisionPhases p;
  p.ab = phi_ab;
  return epr_protocol(p);
}

/// GHZ (|a...a> - |b...b>)/sqrt2 in one sweep: atom 1 in (|a> + |c>)/sqrt2, the
/// others in (|a> + |b>)/sqrt2; the c-well of atom 1 collides with each other
/// atom; then pi/2 pulses on atoms 2..N and c -> b on atom 1.
/// `collisions[k]` is the phase table for the collision of atom 1 with atom k + 2.
inline ProtocolOutcome ghz_protocol(int atoms, const std::vector<CollisionPhases>& collisions,
                                    const std::vector<int>& order = {}) {
  if (atoms < 2 || atoms > RegisterState::kMaxAtoms) throw ConfigError("ghz_protocol: atom count must be in [2, 12]");
  if (static_cast<int>(collisions.size()) != atoms - 1) throw ConfigError("ghz_protocol: need one phase table per collision");
  RegisterState reg(atoms, true);
  apply_pulse(reg, 0, units::pi / 2, 0.0, Transition::ac);
  std::vector<int> rest;
  for (int k = 1; k < atoms; ++k) rest.push_back(k);
  apply_pulse(reg, rest, units::pi / 2, 0.0);
  std::vector<int> seq = order.empty() ? rest : order;
  if (seq.size() != rest.size()) throw ConfigError("ghz_protocol: collision order must list atoms 2..N");
  for (int k : seq) apply_collision(reg, 0, k, collisions.at(k - 1));
  apply_pulse(reg, rest, units::pi / 2, units::pi);
  apply_pulse(reg, 0, units::pi, 0.0, Transition::cb);
  const double f = two_component_fidelity(reg, std::vector<Level>(atoms, Level::a), std::vector<Level>(atoms, Level::b));
  return {reg, f * reg.fidelity_bound};
}

/// Ideal table: the c-b collision carries pi more phase than the c-a collision.
inline CollisionPhases ideal_ghz_collision() {
  CollisionPhases p;
  p.ca = 0.0;
  p.cb = units::pi;
  return p;
}

inline ProtocolOutcome ghz_protocol(int atoms) {
  return ghz_protocol(atoms, std::vector<CollisionPhases>(atoms - 1, ideal_ghz_collision()));
}

/// Time-dependent coefficient for the Fock model: piecewise constant on
/// [t_k, t_{k+1}) or piecewise linear through samples; zero outside.
class Schedule {
 public:
  enum class Kind { constant, piecewise_constant, linear };

  Schedule() = default;
  static Schedule constant(double value) {
    Schedule s;
    s.kind_ = Kind::constant;
    s.value_ = value;
    return s;
  }
  /// values[k] holds on [times[k], times[k+1]); times.size() == values.size() + 1.
  static Schedule piecewise(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() + 1 || values.empty()) throw ConfigError("Schedule: need n+1 breakpoints for n values");
    if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("Schedule: breakpoints must be sorted");
    Schedule s;
    s.kind_ = Kind::piecewise_constant;
    s.t_ = std::move(times);
    s.v_ = std::move(values);
    return s;
  }
  static Schedule sampled(std::vector<double> times, std::vector<double> values) {
    if (times.size() != values.size() || times.size() < 2) throw ConfigError("Schedule: need at least two samples");
    if (!std::is_sorted(times.begin(), times.end())) throw ConfigError("Schedule: sample times must be sorted");
    Schedule s;
    s.kind_ = Kind::linear;
    s.t_ = std::move(times);
    s.v_ = std::move(values);
    return s;
  }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::constant: return value_;
      case Kind::piecewise_constant: {
        if (t < t_.front() || t >= t_.back()) return 0.0;
        const auto k = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin() - 1;
        return v_[k];
      }
      case Kind::linear: {
        if (t < t_.front() || t > t_.back()) return 0.0;
        auto k = std::upper_bound(t_.begin(), t_.end(), t) - t_.begin() - 1;
        k = std::min<std::ptrdiff_t>(k, static_cast<std::ptrdiff_t>(t_.size()) - 2);
        const double f = (t - t_[k]) / (t_[k + 1] - t_[k]);
        return v_[k] + f * (v_[k + 1] - v_[k]);
      }
    }
    return 0.0;
  }

  /// Exact integral over [t0, t1].
  double integral(double t0, double t1) const {
    if (t1 < t0) return -integral(t1, t0);
    switch (kind_) {
      case Kind::constant: return value_ * (t1 - t0);
      case Kind::piecewise_constant: {
        double sum = 0.0;
        for (std::size_t k = 0; k < v_.size(); ++k) {
          const double a = std::max(t0, t_[k]), b = std::min(t1, t_[k + 1]);
          if (b > a) sum += v_[k] * (b - a);
        }
        return sum;
      }
      case Kind::linear: {
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < t_.size(); ++k) {
          const double a = std::max(t0, t_[k]), b = std::min(t1, t_[k + 1]);
          if (b > a) sum += 0.5 * ((*this)(a) + (*this)(b)) * (b - a);
        }
        return sum;
      }
    }
    return 0.0;
  }

 private:
  Kind kind_ = Kind::constant;
  double value_ = 0.0;
  std::vector<double> t_, v_;
};

struct FockCoefficients {
  Schedule omega_a, omega_b, u_aa, u_bb;
  std::map<std::pair<int, int>, Schedule> u_ab;  // (site of a, site of b); absent pairs are zero

  /// u_ab nonzero only between site i's a-well and site i+1's b-well, the
  /// pairs one sweep brings into overlap.
  static FockCoefficients neighbour_sweep(int sites, Schedule omega_a, Schedule omega_b, Schedule u_aa, Schedule u_bb,
                                          const Schedule& u_ab) {
    FockCoefficients c{std::move(omega_a), std::move(omega_b), std::move(u_aa), std::move(u_bb), {}};
    for (int i = 0; i + 1 < sites; ++i) c.u_ab[{i, i + 1}] = u_ab;
    return c;
  }
};

struct FockConfig {
  std::vector<int> n_a;
  std::vector<int> n_b;

  void validate() const {
    if (n_a.size() != n_b.size()) throw ConfigError("FockConfig: a and b occupation lists differ in length");
    for (int n : n_a)
      if (n < 0) throw ConfigError("FockConfig: occupations must be non-negative");
    for (int n : n_b)
      if (n < 0) throw ConfigError("FockConfig: occupations must be non-negative");
  }
  int sites() const { return static_cast<int>(n_a.size()); }
};

/// Phase of a Fock configuration under the diagonal Hamiltonian between t0 and t1:
///   -int [ sum_i (w^a n^a_i + w^b n^b_i + u^aa n^a_i (n^a_i - 1) + u^bb n^b_i (n^b_i - 1))
///          + sum_ij u^ab_ij n^a_i n^b_j ] dt.
/// Occupations are untouched.
inline double fock_phase_evolution(const FockConfig& cfg, const FockCoefficients& coef, double t0, double t1) {
  cfg.validate();
  double linear_a = 0.0, linear_b = 0.0, pair_a = 0.0, pair_b = 0.0;
  for (int i = 0; i < cfg.sites(); ++i) {
    linear_a += cfg.n_a[i];
    linear_b += cfg.n_b[i];
    pair_a += static_cast<double>(cfg.n_a[i]) * (cfg.n_a[i] - 1);
    pair_b += static_cast<double>(cfg.n_b[i]) * (cfg.n_b[i] - 1);
  }
  double phase = linear_a * coef.omega_a.integral(t0, t1) + linear_b * coef.omega_b.integral(t0, t1) +
                 pair_a * coef.u_aa.integral(t0, t1) + pair_b * coef.u_bb.integral(t0, t1);
  for (const auto& [ij, u] : coef.u_ab) {
    const auto [i, j] = ij;
    if (i < 0 || j < 0 || i >= cfg.sites() || j >= cfg.sites()) throw ConfigError("FockCoefficients: u_ab site out of range");
    phase += static_cast<double>(cfg.n_a[i]) * cfg.n_b[j] * u.integral(t0, t1);
  }
  return -phase;
}

inline double fock_phase_evolution(const FockConfig& cfg, const FockCoefficients& coef, double t) {
  return fock_phase_evolution(cfg, coef, 0.0, t);
}

// ---- protocol scripts ----

inline CollisionPhases collision_phases_from_json(const nlohmann::json& j) {
  CollisionPhases p;
  p.a = j.value("a", 0.0);
  p.b = j.value("b", 0.0);
  p.c = j.value("c", 0.0);
  p.ab = j.value("ab", 0.0);
  p.ca = j.value("ca", 0.0);
  p.cb = j.value("cb", 0.0);
  p.fidelity = j.value("fidelity", 1.0);
  if (!(p.fidelity >= 0.0 && p.fidelity <= 1.0)) throw ConfigError("protocol.collision.fidelity must be in [0, 1]");
  return p;
}

/// Runs an ordered step list:
///   {"atoms": N, "first_has_c": bool, "target": "ghz" | "epr" | "none",
///    "steps": [{"op": "pulse", "atoms": [..], "area_rad": x, "phase_rad": y, "transition": "ab"},
///              {"op": "collision", "pair": [i, j], "phases": {"a":..,"b":..,"ab":..,"c":..,"ca":..,"cb":..}}]}
/// Returns populations, the amplitude table for N <= 6, and the target fidelity if requested.
inline nlohmann::ordered_json run_protocol_script(const nlohmann::json& script) {
  const int atoms = script.value("atoms", 2);
  RegisterState reg(atoms, script.value("first_has_c", false));
  if (!script.contains("steps") || !script["steps"].is_array()) throw ConfigError("protocol.steps must be an array");
  int index = 0;
  for (const auto& step : script["steps"]) {
    const std::string where = "protocol.steps[" + std::to_string(index++) + "]";
    const std::string op = step.value("op", "");
    if (op == "pulse") {
      std::vector<int> targets = step.value("atoms", std::vector<int>{});
      if (targets.empty()) throw ConfigError(where + ".atoms must list at least one atom");
      apply_pulse(reg, targets, step.value("area_rad", units::pi / 2), step.value("phase_rad", 0.0),
                  parse_transition(step.value("transition", std::string("ab"))));
    } else if (op == "collision") {
      const auto pair = step.value("pair", std::vector<int>{});
      if (pair.size() != 2) throw ConfigError(where + ".pair must have two entries");
      apply_collision(reg, pair[0], pair[1], collision_phases_from_json(step.value("phases", nlohmann::json::object())));
    } else {
      throw ConfigError(where + ".op must be 'pulse' or 'collision'");
    }
  }
  nlohmann::ordered_json out;
  out["atoms"] = atoms;
  out["norm"] = reg.norm();
  const auto pops = measure_populations(reg);
  out["population_a"] = pops.population_a;
  out["population_b"] = pops.population_b;
  if (atoms <= 6) {
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (Eigen::Index k = 0; k < reg.size(); ++k) {
      std::string label;
      for (Level l : reg.decode(k)) label += level_name(l);
      table.push_back({{"state", label}, {"re", reg.amplitudes()(k).real()}, {"im", reg.amplitudes()(k).imag()}});
    }
    out["amplitudes"] = table;
  }
  const std::string target = script.value("target", std::string("none"));
  if (target == "ghz") {
    out["fidelity"] = reg.fidelity_bound * two_component_fidelity(reg, std::vector<Level>(atoms, Level::a),
                                                                  std::vector<Level>(atoms, Level::b));
  } else if (target == "epr") {
    if (atoms != 2) throw ConfigError("protocol.target 'epr' needs two atoms");
    out["fidelity"] = reg.fidelity_bound * two_component_fidelity(reg, {Level::a, Level::b}, {Level::b, Level::a});
  } else if (target != "none") {
    throw ConfigError("protocol.target must be 'ghz', 'epr' or 'none'");
  }
  return out;
}

}  // namespace ccgate
