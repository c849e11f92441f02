// Runs one sigmoid gate point and prints the phases and fidelity.
//
//   gate_point [tau_r] [tau_i] [distance_a0]

#include <cstdio>
#include <cstdlib>

#include "ccgate/runner.hpp"

int main(int argc, char** argv) {
  using namespace ccgate;
  auto cfg = preset_config("fig2");
  cfg.erase("sweep");
  if (argc > 1) cfg["trajectory"]["tau_r_per_omega"] = std::atof(argv[1]);
  if (argc > 2) cfg["trajectory"]["tau_i_per_omega"] = std::atof(argv[2]);
  if (argc > 3) cfg["trajectory"]["distance_a0"] = std::atof(argv[3]);
  const auto r = run_scenario(parse_scenario(cfg));
  const auto& rep = r.points.front().report;
  std::printf("adiabatic int dE    %.6f\n", r.collisional_phase_adiabatic);
  std::printf("phi_a phi_b phi_ab  %.6f %.6f %.6f\n", r.phases.a, r.phases.b, r.phases.ab);
  std::printf("F  F_avg            %.8f %.8f\n", rep.minimum, rep.average);
  std::printf("ab leakage          %.3e\n", rep.leakage[branch_index(Branch::ab)]);
}
