// ccgate: run gate scenarios, sweeps, register protocols and lattice traces.
//
//   ccgate run      --preset fig2 --format json --out fig2.json
//   ccgate sweep    --config my.json --workers 4 --format csv --out grid.csv
//   ccgate protocol --config ghz.json
//   ccgate lattice  --preset fig3 --out fig3a.csv
//
// Exit codes: 0 success, 1 config error, 2 numeric failure.

#include <iostream>
#include <string>
#include <thread>

#include "CLI11.hpp"
#include "ccgate/runner.hpp"

namespace {

struct Options {
  std::string config;
  std::string preset;
  std::string out;
  std::string format = "json";
  unsigned workers = 1;
};

ccgate::json load(const Options& o) {
  if (!o.config.empty() && !o.preset.empty()) throw ccgate::ConfigError("give either --config or --preset, not both");
  if (!o.preset.empty()) return ccgate::preset_config(o.preset);
  if (o.config.empty()) throw ccgate::ConfigError("--config or --preset is required");
  return ccgate::read_config_file(o.config);
}

void emit(const Options& o, const std::string& text) {
  if (o.out.empty() || o.out == "-") {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    ccgate::write_file(o.out, text);
  }
}

int run(const std::string& verb, const Options& o) {
  using namespace ccgate;
  const json config = load(o);
  if (o.format != "json" && o.format != "csv") throw ConfigError("--format must be csv or json");
  if (verb == "run") {
    json cfg = config;
    cfg.erase("sweep");
    const auto result = run_scenario(parse_scenario(cfg), o.workers);
    emit(o, o.format == "json" ? to_json(result).dump(2) : to_csv(result));
    if (result.truncation_warning) std::cerr << "warning: top basis level populated; consider more levels\n";
  } else if (verb == "sweep") {
    if (!config.contains("sweep")) throw ConfigError("config has no 'sweep' section");
    const auto grid = run_sweep(config, parse_sweep(config["sweep"]), o.workers);
    emit(o, o.format == "json" ? to_json(grid, config).dump(2) : to_csv(grid));
    for (const auto& p : grid.points)
      if (!p.error.empty()) std::cerr << "point failed: " << p.error << '\n';
  } else if (verb == "protocol") {
    const json script = config.contains("protocol") ? config["protocol"] : config;
    if (o.format != "json") throw ConfigError("protocol output is JSON only");
    emit(o, run_protocol_script(script).dump(2));
  } else if (verb == "lattice") {
    json cfg = config;
    cfg.erase("sweep");
    emit(o, lattice_csv(parse_scenario(cfg)));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collisional phase gate simulator"};
  app.require_subcommand(1);
  Options opt;
  for (const char* verb : {"run", "sweep", "protocol", "lattice"}) {
    auto* sub = app.add_subcommand(verb);
    sub->add_option("--config", opt.config, "scenario config (JSON)");
    sub->add_option("--preset", opt.preset, "shipped scenario")->check(CLI::IsMember({"fig2", "fig3"}));
    sub->add_option("--out", opt.out, "output path (default stdout)");
    sub->add_option("--format", opt.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", opt.workers, "parallel workers")->check(CLI::Range(1u, 256u));
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return run(app.get_subcommands().front()->get_name(), opt);
  } catch (const ccgate::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
