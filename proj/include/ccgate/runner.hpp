#pragma once

// Scenario configs, single runs, parameter sweeps and result emission.
//
// Config fields carry SI units in their names; everything is converted to
// oscillator units (hbar = m = omega = 1) before the numerics see it.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ccgate/gate_fidelity.hpp"
#include "ccgate/lattice.hpp"
#include "ccgate/parallel.hpp"
#include "ccgate/protocols.hpp"
#include "ccgate/trajectory.hpp"
#include "ccgate/two_particle.hpp"
#include "ccgate/units.hpp"

#ifndef CCGATE_VERSION
#define CCGATE_VERSION "0.3.0"
#endif

namespace ccgate {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

inline constexpr const char* kToolVersion = CCGATE_VERSION;

enum class TrajectoryFamily { sigmoid, lattice };

struct Scenario {
  std::string name = "scenario";
  std::string species = "Rb87";
  double mass_kg = 0.0;
  double omega_rad_per_s = 0.0;
  double omega_perp_rad_per_s = 0.0;  // 0: same as omega
  double scattering_length_m = 0.0;
  double loss_ratio = 0.0;  // Im(a_s) = -loss_ratio * Re(a_s)

  TrajectoryFamily family = TrajectoryFamily::sigmoid;
  double tau_r_per_omega = 30.0;
  double tau_i_per_omega = 20.0;
  double distance_a0 = 10.0;       // sigmoid only
  double wavelength_m = 780e-9;    // lattice only
  int lattice_samples = 1000;

  int levels = 10;
  double tolerance = 1e-9;
  double occupation_cutoff = 1e-6;
  PhaseReference phase_reference = PhaseReference::ground;
  std::vector<double> temperatures_kT_over_hbar_omega{0.0};

  std::optional<json> protocol;

  units::UnitSystem unit_system() const { return {mass_kg, omega_rad_per_s}; }
  double omega_perp_internal() const {
    return omega_perp_rad_per_s > 0.0 ? omega_perp_rad_per_s / omega_rad_per_s : 1.0;
  }
};

namespace detail {

inline const json& require(const json& j, const std::string& key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + "." + key + " is required");
  return j.at(key);
}

inline double number(const json& j, const std::string& key, const std::string& where, std::optional<double> fallback = {}) {
  if (!j.is_object() || !j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(where + "." + key + " is required");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(where + "." + key + " must be finite");
  return x;
}

inline void positive(double x, const std::string& field) {
  if (!(x > 0.0)) throw ConfigError(field + " must be positive");
}

inline units::Species species_by_name(const std::string& name) {
  if (name == "Rb87") return units::rubidium87();
  if (name == "Na23") return units::sodium23();
  throw ConfigError("species.name '" + name + "' unknown (Rb87, Na23) and no species.mass_kg given");
}

}  // namespace detail

/// Parses and validates a config; error messages name the offending field.
inline Scenario parse_scenario(const json& j) {
  using namespace detail;
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  Scenario s;
  s.name = j.value("name", std::string("scenario"));

  const auto& sp = require(j, "species", "config");
  if (sp.is_string()) {
    s.species = sp.get<std::string>();
    s.mass_kg = species_by_name(s.species).mass_kg;
  } else {
    s.species = sp.value("name", std::string("custom"));
    s.mass_kg = sp.contains("mass_kg") ? number(sp, "mass_kg", "species") : species_by_name(s.species).mass_kg;
  }
  positive(s.mass_kg, "species.mass_kg");

  const auto& trap = require(j, "trap", "config");
  s.omega_rad_per_s = number(trap, "omega_rad_per_s", "trap");
  positive(s.omega_rad_per_s, "trap.omega_rad_per_s");
  s.omega_perp_rad_per_s = number(trap, "omega_perp_rad_per_s", "trap", 0.0);
  if (s.omega_perp_rad_per_s < 0.0) throw ConfigError("trap.omega_perp_rad_per_s must be positive (or 0 for omega)");

  const auto& inter = require(j, "interaction", "config");
  s.scattering_length_m = number(inter, "scattering_length_m", "interaction");
  s.loss_ratio = number(inter, "loss_ratio", "interaction", 0.0);
  if (s.loss_ratio < 0.0) throw ConfigError("interaction.loss_ratio must be >= 0 (Im a_s = -loss_ratio Re a_s)");

  const auto& tr = require(j, "trajectory", "config");
  const std::string fam = tr.value("family", std::string(""));
  if (fam == "sigmoid") {
    s.family = TrajectoryFamily::sigmoid;
  } else if (fam == "lattice") {
    s.family = TrajectoryFamily::lattice;
  } else {
    throw ConfigError("trajectory.family must be 'sigmoid' or 'lattice'");
  }
  s.tau_r_per_omega = number(tr, "tau_r_per_omega", "trajectory");
  positive(s.tau_r_per_omega, "trajectory.tau_r_per_omega");
  s.tau_i_per_omega = number(tr, "tau_i_per_omega", "trajectory");
  if (s.tau_i_per_omega < 0.0) throw ConfigError("trajectory.tau_i_per_omega must be >= 0");
  if (s.family == TrajectoryFamily::sigmoid) {
    s.distance_a0 = number(tr, "distance_a0", "trajectory");
    positive(s.distance_a0, "trajectory.distance_a0");
  } else {
    s.wavelength_m = number(tr, "wavelength_m", "trajectory");
    positive(s.wavelength_m, "trajectory.wavelength_m");
    s.lattice_samples = tr.value("samples", 1000);
    if (s.lattice_samples < 16) throw ConfigError("trajectory.samples must be >= 16");
  }

  const json num = j.value("numerics", json::object());
  s.levels = num.value("levels", 10);
  if (s.levels < 2 || s.levels > 40) throw ConfigError("numerics.levels must be in [2, 40]");
  s.tolerance = number(num, "tolerance", "numerics", 1e-9);
  positive(s.tolerance, "numerics.tolerance");
  s.occupation_cutoff = number(num, "occupation_cutoff", "numerics", 1e-6);
  positive(s.occupation_cutoff, "numerics.occupation_cutoff");
  const std::string ref = num.value("phase_reference", std::string("ground"));
  if (ref == "ground") {
    s.phase_reference = PhaseReference::ground;
  } else if (ref == "thermal") {
    s.phase_reference = PhaseReference::thermal;
  } else {
    throw ConfigError("numerics.phase_reference must be 'ground' or 'thermal'");
  }

  if (j.contains("temperatures_kT_over_hbar_omega")) {
    const auto& t = j.at("temperatures_kT_over_hbar_omega");
    if (!t.is_array() || t.empty()) throw ConfigError("temperatures_kT_over_hbar_omega must be a non-empty array");
    s.temperatures_kT_over_hbar_omega.clear();
    for (const auto& v : t) {
      if (!v.is_number() || !(v.get<double>() >= 0.0)) {
        throw ConfigError("temperatures_kT_over_hbar_omega entries must be numbers >= 0");
      }
      s.temperatures_kT_over_hbar_omega.push_back(v.get<double>());
    }
  }
  if (j.contains("protocol") && !j.at("protocol").is_null()) s.protocol = j.at("protocol");
  return s;
}

/// Normalized echo; parse_scenario(to_json(s)) reproduces s exactly.
inline ojson to_json(const Scenario& s) {
  ojson j;
  j["name"] = s.name;
  j["species"] = {{"name", s.species}, {"mass_kg", s.mass_kg}};
  j["trap"] = {{"omega_rad_per_s", s.omega_rad_per_s}, {"omega_perp_rad_per_s", s.omega_perp_rad_per_s}};
  j["interaction"] = {{"scattering_length_m", s.scattering_length_m}, {"loss_ratio", s.loss_ratio}};
  ojson tr;
  tr["family"] = s.family == TrajectoryFamily::sigmoid ? "sigmoid" : "lattice";
  tr["tau_r_per_omega"] = s.tau_r_per_omega;
  tr["tau_i_per_omega"] = s.tau_i_per_omega;
  if (s.family == TrajectoryFamily::sigmoid) {
    tr["distance_a0"] = s.distance_a0;
  } else {
    tr["wavelength_m"] = s.wavelength_m;
    tr["samples"] = s.lattice_samples;
  }
  j["trajectory"] = tr;
  j["numerics"] = {{"levels", s.levels},
                   {"tolerance", s.tolerance},
                   {"occupation_cutoff", s.occupation_cutoff},
                   {"phase_reference", s.phase_reference == PhaseReference::ground ? "ground" : "thermal"}};
  j["temperatures_kT_over_hbar_omega"] = s.temperatures_kT_over_hbar_omega;
  if (s.protocol) j["protocol"] = ojson::parse(s.protocol->dump());
  return j;
}

/// FNV-1a (64 bit) of the normalized echo, as 16 hex digits.
inline std::string scenario_hash(const Scenario& s) {
  const std::string text = to_json(s).dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

/// Shipped configurations: a single sigmoid gate point and the lattice scheme.
inline json preset_config(const std::string& name) {
  if (name == "fig2") {
    return json::parse(R"({
      "name": "fig2",
      "species": {"name": "Rb87"},
      "trap": {"omega_rad_per_s": 628318.5307179586},
      "interaction": {"scattering_length_m": 5.1e-9, "loss_ratio": 0.0},
      "trajectory": {"family": "sigmoid", "tau_r_per_omega": 30.0, "tau_i_per_omega": 20.0, "distance_a0": 10.0},
      "numerics": {"levels": 10, "tolerance": 1e-9},
      "temperatures_kT_over_hbar_omega": [0.0],
      "sweep": {"axes": [
        {"path": "trajectory.tau_r_per_omega", "values": [5, 10, 15, 20, 25, 30, 35, 40, 45, 50]},
        {"path": "trajectory.tau_i_per_omega", "values": [0, 5, 10, 15, 20, 25, 30, 35, 40, 45]}
      ]}
    })");
  }
  if (name == "fig3") {
    return json::parse(R"({
      "name": "fig3",
      "species": {"name": "Rb87"},
      "trap": {"omega_rad_per_s": 628318.5307179586},
      "interaction": {"scattering_length_m": 5.1e-9, "loss_ratio": 0.0},
      "trajectory": {"family": "lattice", "tau_r_per_omega": 30.0, "tau_i_per_omega": 20.0, "wavelength_m": 7.8e-7},
      "numerics": {"levels": 10, "tolerance": 1e-9},
      "temperatures_kT_over_hbar_omega": [0.0, 0.05, 0.1, 0.15, 0.2],
      "sweep": {"axes": [
        {"path": "interaction.loss_ratio", "values": [0.0, 0.01, 0.05]}
      ]}
    })");
  }
  throw ConfigError("unknown preset '" + name + "' (fig2, fig3)");
}

/// Trajectories, separation and interaction in oscillator units.
struct ScenarioGeometry {
  ChannelSpec channel;
  std::optional<LatticeTrajectories> lattice;
};

inline ScenarioGeometry build_geometry(const Scenario& s) {
  const auto u = s.unit_system();
  const double as = u.to_internal_length(s.scattering_length_m);
  InteractionModel model{cplx(as, -s.loss_ratio * as), s.omega_perp_internal()};
  TdseOptions tdse;
  tdse.tol = s.tolerance;
  if (s.family == TrajectoryFamily::sigmoid) {
    auto a = Trajectory::sigmoid({s.tau_r_per_omega, s.tau_i_per_omega, s.distance_a0}, 1.0);
    auto b = Trajectory::stationary(1.0, a.half_window());
    return {ChannelSpec{std::move(a), std::move(b), s.distance_a0, model, s.levels, tdse}, std::nullopt};
  }
  const double k = u.to_internal_wavevector(2.0 * units::pi / s.wavelength_m);
  auto lt = lattice_to_trajectories(s.tau_r_per_omega, s.tau_i_per_omega, LatticeParams::from_trap_frequency(1.0, k),
                                    s.lattice_samples);
  ChannelSpec spec{lt.a, lt.b, lt.separation, model, s.levels, tdse};
  return {std::move(spec), std::move(lt)};
}

struct TemperaturePoint {
  double kt = 0.0;
  FidelityReport report;
};

struct RunResult {
  Scenario scenario;
  double collisional_phase_adiabatic = 0.0;
  GatePhases phases;
  std::vector<TemperaturePoint> points;
  std::optional<ojson> protocol;
  bool truncation_warning = false;
};

/// lattice -> trajectories -> four-branch channel -> fidelity per temperature
/// (-> protocol script). Deterministic for a given scenario.
inline RunResult run_scenario(const Scenario& s, unsigned workers = 1) {
  const auto geo = build_geometry(s);
  RunResult r;
  r.scenario = s;
  const auto pair = branch_geometry(Branch::ab, geo.channel.a, geo.channel.b, geo.channel.separation);
  r.collisional_phase_adiabatic = collisional_phase_adiabatic(pair, geo.channel.interaction).real();
  const auto pairs = required_pairs(s.temperatures_kT_over_hbar_omega, s.levels, s.occupation_cutoff);
  const auto channel = simulate_channel(geo.channel, pairs, workers);
  r.phases = channel.phases;
  for (const auto& run : channel.runs) r.truncation_warning = r.truncation_warning || run.truncation_warning;
  for (double kt : s.temperatures_kT_over_hbar_omega) {
    r.points.push_back({kt, min_fidelity(channel, thermal_occupations(kt, s.levels), s.phase_reference,
                                         s.occupation_cutoff)});
  }
  if (s.protocol) {
    json script = *s.protocol;
    // "phases": "channel" substitutes the simulated gate, with its T = 0 fidelity as multiplier.
    if (script.contains("steps")) {
      for (auto& step : script["steps"]) {
        if (step.value("op", "") == "collision" && step.contains("phases") && step["phases"] == "channel") {
          step["phases"] = {{"a", r.phases.a}, {"b", r.phases.b}, {"ab", r.phases.ab},
                            {"fidelity", r.points.front().report.minimum}};
        }
      }
    }
    r.protocol = run_protocol_script(script);
  }
  return r;
}

inline ojson units_block(const Scenario& s) {
  const auto u = s.unit_system();
  return {{"length_m", u.length_m()},
          {"time_s", u.time_s()},
          {"energy_J", u.energy_j()},
          {"phase", "rad"},
          {"temperature", "kT / (hbar omega)"}};
}

inline ojson to_json(const RunResult& r) {
  ojson j;
  j["tool"] = "ccgate";
  j["version"] = kToolVersion;
  j["scenario_hash"] = scenario_hash(r.scenario);
  j["scenario"] = to_json(r.scenario);
  j["units"] = units_block(r.scenario);
  j["collisional_phase_adiabatic"] = r.collisional_phase_adiabatic;
  j["phases"] = to_json(r.phases);
  j["truncation_warning"] = r.truncation_warning;
  ojson pts = ojson::array();
  for (const auto& p : r.points) {
    ojson rec = to_json(p.report);
    rec["kT_over_hbar_omega"] = p.kt;
    pts.push_back(rec);
  }
  j["results"] = pts;
  if (r.protocol) j["protocol"] = *r.protocol;
  return j;
}

/// Sets a dotted path ("trajectory.tau_r_per_omega") in a config, creating objects as needed.
inline void set_path(json& config, const std::string& path, const json& value) {
  if (path.empty()) throw ConfigError("sweep axis path must not be empty");
  json* node = &config;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("sweep axis path '" + path + "' has an empty component");
    if (!node->is_object()) throw ConfigError("sweep axis path '" + path + "' runs through a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      return;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

struct SweepAxis {
  std::string path;
  std::vector<double> values;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;  // one or two

  void validate() const {
    if (axes.empty() || axes.size() > 2) throw ConfigError("sweep.axes must hold one or two axes");
    for (std::size_t k = 0; k < axes.size(); ++k) {
      const auto& ax = axes[k];
      const std::string where = "sweep.axes[" + std::to_string(k) + "]";
      if (ax.path.empty()) throw ConfigError(where + ".path is required");
      if (ax.values.empty()) throw ConfigError(where + ".values must be non-empty");
      bool up = true, down = true;
      for (std::size_t i = 1; i < ax.values.size(); ++i) {
        up = up && ax.values[i] > ax.values[i - 1];
        down = down && ax.values[i] < ax.values[i - 1];
      }
      if (ax.values.size() > 1 && !up && !down) throw ConfigError(where + ".values must be strictly monotone");
    }
  }
  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
  }
};

inline SweepSpec parse_sweep(const json& j) {
  SweepSpec s;
  if (!j.is_object() || !j.contains("axes") || !j["axes"].is_array()) throw ConfigError("sweep.axes must be an array");
  for (const auto& ax : j["axes"]) {
    SweepAxis a;
    a.path = ax.value("path", std::string());
    if (!ax.contains("values") || !ax["values"].is_array()) throw ConfigError("sweep axis '" + a.path + "' needs values");
    for (const auto& v : ax["values"]) {
      if (!v.is_number()) throw ConfigError("sweep axis '" + a.path + "' values must be numbers");
      a.values.push_back(v.get<double>());
    }
    s.axes.push_back(std::move(a));
  }
  s.validate();
  return s;
}

struct GridPoint {
  std::vector<double> coordinates;
  std::optional<RunResult> result;
  std::string error;  // empty on success
  int error_code = 0;
};

struct SweepResult {
  SweepSpec spec;
  std::vector<GridPoint> points;  // axis 1 outermost
};

/// Runs every grid point; a failing point records its message and leaves the rest intact.
inline SweepResult run_sweep(const json& base, const SweepSpec& spec, unsigned workers = 1) {
  spec.validate();
  json config = base;
  config.erase("sweep");
  parse_scenario(config);  // fail fast on the base config
  SweepResult out;
  out.spec = spec;
  out.points.resize(spec.size());
  const std::size_t inner = spec.axes.size() == 2 ? spec.axes[1].values.size() : 1;
  parallel_for(out.points.size(), workers, [&](std::size_t i) {
    GridPoint& pt = out.points[i];
    json cfg = config;
    pt.coordinates.push_back(spec.axes[0].values[i / inner]);
    set_path(cfg, spec.axes[0].path, pt.coordinates.back());
    if (spec.axes.size() == 2) {
      pt.coordinates.push_back(spec.axes[1].values[i % inner]);
      set_path(cfg, spec.axes[1].path, pt.coordinates.back());
    }
    try {
      pt.result = run_scenario(parse_scenario(cfg));
    } catch (const ConfigError& e) {
      pt.error = e.what();
      pt.error_code = 1;
    } catch (const std::exception& e) {
      pt.error = e.what();
      pt.error_code = 2;
    }
  });
  return out;
}

inline ojson to_json(const SweepResult& r, const json& base) {
  ojson j;
  j["tool"] = "ccgate";
  j["version"] = kToolVersion;
  j["base_scenario"] = ojson::parse(base.dump());
  ojson axes = ojson::array();
  for (const auto& a : r.spec.axes) axes.push_back({{"path", a.path}, {"values", a.values}});
  j["axes"] = axes;
  ojson pts = ojson::array();
  for (const auto& p : r.points) {
    ojson rec;
    rec["coordinates"] = p.coordinates;
    if (p.result) {
      rec["record"] = to_json(*p.result);
    } else {
      rec["error"] = p.error;
      rec["error_code"] = p.error_code;
    }
    pts.push_back(rec);
  }
  j["points"] = pts;
  return j;
}

namespace detail {
inline std::string csv_number(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}
}  // namespace detail

/// One row per grid point and temperature:
/// axis columns, kT_over_hbar_omega, F, F_avg, phi_ab, leakage, norm_loss, status.
inline std::string to_csv(const SweepResult& r) {
  using detail::csv_number;
  std::ostringstream o;
  for (const auto& a : r.spec.axes) o << a.path << ',';
  o << "kT_over_hbar_omega,F,F_avg,phi_ab,leakage,norm_loss,status\n";
  for (const auto& p : r.points) {
    auto prefix = [&] {
      for (double c : p.coordinates) o << csv_number(c) << ',';
    };
    if (!p.result) {
      prefix();
      std::string msg = p.error;
      for (char& c : msg)
        if (c == ',' || c == '\n') c = ';';
      o << ",,,,,,error: " << msg << '\n';
      continue;
    }
    for (const auto& t : p.result->points) {
      prefix();
      o << csv_number(t.kt) << ',' << csv_number(t.report.minimum) << ',' << csv_number(t.report.average) << ','
        << csv_number(p.result->phases.ab) << ',' << csv_number(t.report.leakage[branch_index(Branch::ab)]) << ','
        << csv_number(t.report.norm_loss[branch_index(Branch::ab)]) << ",ok\n";
    }
  }
  return o.str();
}

inline std::string to_csv(const RunResult& r) {
  SweepResult s;
  s.points.push_back({{}, r, "", 0});
  return to_csv(s);
}

/// Lattice transport data: t, delta_x_a / d, 1 + delta_x_b / d, omega_a, omega_b (units of omega).
inline std::string lattice_csv(const Scenario& s) {
  if (s.family != TrajectoryFamily::lattice) throw ConfigError("trajectory.family must be 'lattice' for lattice output");
  const auto geo = build_geometry(s);
  const auto& lt = *geo.lattice;
  std::ostringstream o;
  o.precision(12);
  o << "t,delta_x_a_over_d,one_plus_delta_x_b_over_d,omega_a,omega_b\n";
  const int n = 400;
  for (int i = 0; i < n; ++i) {
    const double t = lt.a.start() + (lt.a.end() - lt.a.start()) * i / (n - 1);
    o << t << ',' << lt.a.offset(t) / lt.separation << ',' << 1.0 + lt.b.offset(t) / lt.separation << ','
      << lt.a.omega(t) << ',' << lt.b.omega(t) << '\n';
  }
  return o.str();
}

/// Writes `text` to `path`; failures name the path.
inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

inline json read_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config '" + path + "'");
  try {
    return json::parse(f, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace ccgate
