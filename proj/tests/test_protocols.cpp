#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include <gtest/gtest.h>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "ccgate/protocols.hpp"

using namespace ccgate;

namespace {

// Single-atom rotation in the {a, b} basis, written out independently.
Eigen::Matrix2cd rotation(double area, double phase) {
  const double c = std::cos(area / 2), s = std::sin(area / 2);
  Eigen::Matrix2cd u;
  u << c, -std::polar(s, -phase), std::polar(s, phase), c;
  return u;
}

Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

// Two-atom collision as a 4 x 4 diagonal in the order aa, ab, ba, bb.
Eigen::Matrix4cd collision(double pa, double pb, double pab) {
  Eigen::Vector4cd d(std::polar(1.0, 2 * pa), std::polar(1.0, pa + pb + pab), std::polar(1.0, pa + pb),
                     std::polar(1.0, 2 * pb));
  return d.asDiagonal();
}

}  // namespace

TEST(Pulses, MatchKroneckerConstruction) {
  RegisterState reg(3);
  std::mt19937 rng(5);
  std::normal_distribution<double> g;
  for (Eigen::Index k = 0; k < reg.size(); ++k) reg.amplitudes()(k) = cplx(g(rng), g(rng));
  reg.amplitudes().normalize();
  const Eigen::VectorXcd before = reg.amplitudes();
  apply_pulse(reg, 1, 0.9, 0.4);
  const Eigen::MatrixXcd id = Eigen::Matrix2cd::Identity();
  const Eigen::MatrixXcd u = kron(kron(id, rotation(0.9, 0.4)), id);
  EXPECT_LT((reg.amplitudes() - u * before).norm(), 1e-14);
  EXPECT_NEAR(reg.norm(), 1.0, 1e-14);
}

TEST(Pulses, TwoPiIsMinusIdentityAndPiSwaps) {
  RegisterState reg(1);
  apply_pulse(reg, 0, 2 * M_PI, 0.3);
  EXPECT_NEAR(std::abs(reg.amplitudes()(0) + 1.0), 0.0, 1e-14);
  RegisterState flip(1);
  apply_pulse(flip, 0, M_PI, 0.0);
  EXPECT_NEAR(std::norm(flip.amplitude({Level::b})), 1.0, 1e-15);
}

TEST(Pulses, ThreeLevelTransitions) {
  RegisterState reg(2, true);
  apply_pulse(reg, 0, M_PI, 0.0, Transition::ac);
  EXPECT_NEAR(std::norm(reg.amplitude({Level::c, Level::a})), 1.0, 1e-15);
  apply_pulse(reg, 0, M_PI, 0.0, Transition::cb);
  EXPECT_NEAR(std::norm(reg.amplitude({Level::b, Level::a})), 1.0, 1e-15);
  EXPECT_THROW(apply_pulse(reg, 1, M_PI, 0.0, Transition::ac), ConfigError);
  EXPECT_THROW(apply_pulse(reg, 2, M_PI, 0.0), ConfigError);
  EXPECT_THROW(parse_transition("ad"), ConfigError);
  EXPECT_EQ(parse_transition("c-b"), Transition::cb);
}

TEST(Register, EncodeDecodeRoundTrip) {
  RegisterState reg(4, true);
  EXPECT_EQ(reg.size(), 24);
  for (Eigen::Index k = 0; k < reg.size(); ++k) EXPECT_EQ(reg.encode(reg.decode(k)), k);
  EXPECT_THROW(RegisterState(13), ConfigError);
  EXPECT_THROW(reg.encode({Level::a, Level::c, Level::a, Level::a}), ConfigError);
}

TEST(Collisions, DiagonalPhasesMatchGateTable) {
  RegisterState reg(2);
  apply_pulse(reg, {0, 1}, M_PI / 2, 0.0);
  const Eigen::VectorXcd before = reg.amplitudes();
  apply_collision(reg, 0, 1, CollisionPhases::from_gate({0.3, -0.2, 1.1}));
  EXPECT_LT((reg.amplitudes() - collision(0.3, -0.2, 1.1) * before).norm(), 1e-15);
  EXPECT_THROW(apply_collision(reg, 1, 1, {}), ConfigError);
}

TEST(Ramsey, MatchesMatrixProduct) {
  for (double phi : {0.0, 0.7, M_PI / 2, -M_PI / 2, M_PI}) {
    for (double readout : {0.0, M_PI / 2}) {
      RamseySettings s;
      s.first_area = M_PI / 3;
      s.second_area = M_PI / 3;
      s.second_phase = readout;
      const auto r = ramsey_signal(phi, s);
      Eigen::Vector4cd v(1, 0, 0, 0);
      const Eigen::MatrixXcd p1 = kron(rotation(s.first_area, 0), rotation(s.first_area, 0));
      const Eigen::MatrixXcd p2 = kron(rotation(s.second_area, readout), rotation(s.second_area, readout));
      const Eigen::Vector4cd out = p2 * collision(0, 0, phi) * p1 * v;
      const double pb0 = std::norm(out(2)) + std::norm(out(3));
      const double pb1 = std::norm(out(1)) + std::norm(out(3));
      EXPECT_NEAR(r.population_b[0], pb0, 1e-14);
      EXPECT_NEAR(r.population_b[1], pb1, 1e-14);
      EXPECT_NEAR(r.total_b, 0.5 * (pb0 + pb1), 1e-14);
    }
  }
}

TEST(Ramsey, NoCollisionPhaseGivesFullTransfer) {
  EXPECT_NEAR(ramsey_signal(0.0).total_b, 1.0, 1e-15);
  // with the readout axis along the first pulse the signal cannot see the sign
  EXPECT_NEAR(ramsey_signal(0.8).total_b, ramsey_signal(-0.8).total_b, 1e-15);
  RamseySettings s{M_PI / 3, M_PI / 3, 0.0, M_PI / 2};
  EXPECT_GT(std::abs(ramsey_signal(M_PI / 2, s).total_b - ramsey_signal(-M_PI / 2, s).total_b), 0.1);
}

TEST(Epr, PerfectAtPiAndMatchesMatrixOracle) {
  EXPECT_NEAR(epr_protocol(M_PI).fidelity, 1.0, 1e-14);
  for (double phi : {0.0, 0.5, 2.0, M_PI}) {
    const Eigen::MatrixXcd p1 = kron(rotation(M_PI / 2, 0), rotation(M_PI / 2, 0));
    const Eigen::MatrixXcd p2 = kron(Eigen::Matrix2cd::Identity(), rotation(M_PI / 2, M_PI));
    const Eigen::Vector4cd out = p2 * collision(0, 0, phi) * p1 * Eigen::Vector4cd(1, 0, 0, 0);
    const double s = std::abs(out(1)) + std::abs(out(2));
    EXPECT_NEAR(epr_protocol(phi).fidelity, 0.5 * s * s, 1e-14) << phi;
  }
  EXPECT_NEAR(epr_protocol(0.0).fidelity, 0.25, 1e-14);
}

TEST(Epr, SingleAtomPhasesNeedReadoutCompensation) {
  CollisionPhases p;
  p.a = 0.4;
  p.b = 1.3;
  p.ab = M_PI;
  // equal shifts on both wells are a global phase
  CollisionPhases same = p;
  same.b = same.a;
  EXPECT_NEAR(epr_protocol(same).fidelity, 1.0, 1e-14);
  // unequal ones rotate atom 2 before its last pulse; shifting that pulse's axis by b - a undoes it
  EXPECT_LT(epr_protocol(p).fidelity, 0.99);
  RegisterState reg(2);
  apply_pulse(reg, {0, 1}, M_PI / 2, 0.0);
  apply_collision(reg, 0, 1, p);
  apply_pulse(reg, 1, M_PI / 2, M_PI + p.b - p.a);
  EXPECT_NEAR(two_component_fidelity(reg, {Level::a, Level::b}, {Level::b, Level::a}), 1.0, 1e-14);
  same.fidelity = 0.9;
  EXPECT_NEAR(epr_protocol(same).fidelity, 0.9, 1e-14);
}

TEST(Ghz, PerfectForTwoToEightAtoms) {
  for (int n = 2; n <= 8; ++n) {
    const auto out = ghz_protocol(n);
    EXPECT_NEAR(out.fidelity, 1.0, 1e-12) << n;
    // equal weight on the two branches and nothing else
    EXPECT_NEAR(std::norm(out.state.amplitude(std::vector<Level>(n, Level::a))), 0.5, 1e-12);
    EXPECT_NEAR(std::norm(out.state.amplitude(std::vector<Level>(n, Level::b))), 0.5, 1e-12);
  }
  EXPECT_THROW(ghz_protocol(1), ConfigError);
}

TEST(Ghz, CollisionOrderDoesNotMatter) {
  std::vector<CollisionPhases> tables(4, ideal_ghz_collision());
  for (int k = 0; k < 4; ++k) tables[k].cb += 0.05 * (k + 1);
  const auto ref = ghz_protocol(5, tables);
  const auto shuffled = ghz_protocol(5, tables, {4, 2, 1, 3});
  EXPECT_LT((ref.state.amplitudes() - shuffled.state.amplitudes()).norm(), 1e-14);
  EXPECT_THROW(ghz_protocol(5, tables, {1, 2}), ConfigError);
}

TEST(Ghz, OneFaultyCollision) {
  for (double eps : {0.1, 0.5, 1.0}) {
    std::vector<CollisionPhases> tables(3, ideal_ghz_collision());
    tables[1].cb += eps;
    const double expect = std::pow(0.5 * (1.0 + std::cos(eps / 2)), 2);
    EXPECT_NEAR(ghz_protocol(4, tables).fidelity, expect, 1e-12) << eps;
  }
}

TEST(Ghz, CommonPhaseOnBothWellsIsHarmless) {
  std::vector<CollisionPhases> tables(2, ideal_ghz_collision());
  for (auto& t : tables) {
    t.ca += 0.6;
    t.cb += 0.6;
  }
  EXPECT_NEAR(ghz_protocol(3, tables).fidelity, 1.0, 1e-12);
}

TEST(Fock, AgreesWithMatrixExponentialOfNumberOperators) {
  // Two sites, modes (a0, b0, a1, b1), at most 2 bosons per mode.
  const int cap = 3;
  Eigen::MatrixXcd n1 = Eigen::MatrixXcd::Zero(cap, cap);
  for (int k = 0; k < cap; ++k) n1(k, k) = k;
  const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(cap, cap);
  auto mode = [&](int which) {
    Eigen::MatrixXcd m = which == 0 ? n1 : id;
    for (int k = 1; k < 4; ++k) m = kron(m, which == k ? n1 : id);
    return m;
  };
  const Eigen::MatrixXcd na0 = mode(0), nb0 = mode(1), na1 = mode(2), nb1 = mode(3);
  const Eigen::MatrixXcd one = Eigen::MatrixXcd::Identity(na0.rows(), na0.cols());
  const double wa = 0.7, wb = 1.3, uaa = 0.11, ubb = 0.05, uab = 0.4, t = 2.3;
  const Eigen::MatrixXcd h = wa * (na0 + na1) + wb * (nb0 + nb1) + uaa * (na0 * (na0 - one) + na1 * (na1 - one)) +
                             ubb * (nb0 * (nb0 - one) + nb1 * (nb1 - one)) + uab * na0 * nb1;
  const Eigen::MatrixXcd u = (cplx(0, -t) * h).exp();
  const auto coef = FockCoefficients::neighbour_sweep(2, Schedule::constant(wa), Schedule::constant(wb),
                                                      Schedule::constant(uaa), Schedule::constant(ubb),
                                                      Schedule::constant(uab));
  for (int a0 = 0; a0 < cap; ++a0)
    for (int b0 = 0; b0 < cap; ++b0)
      for (int a1 = 0; a1 < cap; ++a1)
        for (int b1 = 0; b1 < cap; ++b1) {
          const int idx = ((a0 * cap + b0) * cap + a1) * cap + b1;
          const double phase = fock_phase_evolution({{a0, a1}, {b0, b1}}, coef, t);
          // diagonal: occupations are conserved
          EXPECT_NEAR(std::norm(u(idx, idx)), 1.0, 1e-12);
          EXPECT_NEAR(std::abs(u(idx, idx) - std::polar(1.0, phase)), 0.0, 1e-11);
        }
}

TEST(Fock, PhaseIsAdditiveInTime) {
  const auto step = Schedule::piecewise({0.0, 1.0, 2.5, 4.0}, {0.3, 1.0, -0.2});
  const auto ramp = Schedule::sampled({0.0, 2.0, 4.0}, {0.0, 1.0, 0.5});
  FockCoefficients coef{step, ramp, Schedule::constant(0.1), ramp, {}};
  coef.u_ab[{0, 1}] = step;
  const FockConfig cfg{{2, 1}, {0, 3}};
  for (double mid : {0.4, 1.7, 3.1})
    EXPECT_NEAR(fock_phase_evolution(cfg, coef, 0.0, mid) + fock_phase_evolution(cfg, coef, mid, 4.0),
                fock_phase_evolution(cfg, coef, 0.0, 4.0), 1e-13);
  // exact integrals of the schedules
  EXPECT_NEAR(step.integral(0.0, 4.0), 0.3 + 1.5 - 0.3, 1e-15);
  EXPECT_NEAR(ramp.integral(0.0, 4.0), 1.0 + 1.5, 1e-15);
  EXPECT_NEAR(ramp(3.0), 0.75, 1e-15);
  EXPECT_EQ(step(5.0), 0.0);
}

TEST(Fock, EmptyLatticeHasNoPhaseAndBadInputThrows) {
  const auto coef = FockCoefficients::neighbour_sweep(3, Schedule::constant(1), Schedule::constant(1),
                                                      Schedule::constant(1), Schedule::constant(1),
                                                      Schedule::constant(1));
  EXPECT_EQ(fock_phase_evolution({{0, 0, 0}, {0, 0, 0}}, coef, 5.0), 0.0);
  EXPECT_THROW(fock_phase_evolution({{0, 1}, {0}}, coef, 1.0), ConfigError);
  EXPECT_THROW(fock_phase_evolution({{0, 1}, {0, 1}}, coef, 1.0), ConfigError);  // u_ab pair (1, 2) off the lattice
  EXPECT_THROW(Schedule::piecewise({0.0, 1.0}, {1.0, 2.0}), ConfigError);
}

TEST(Scripts, GhzScriptMatchesBuiltInProtocol) {
  std::ifstream in(CCGATE_TEST_DATA "/ghz3.json");
  const auto script = nlohmann::json::parse(in)["protocol"];
  const auto out = run_protocol_script(script);
  EXPECT_NEAR(out["fidelity"].get<double>(), 1.0, 1e-12);
  const auto ref = ghz_protocol(3);
  for (const auto& row : out["amplitudes"]) {
    std::vector<Level> cfg;
    for (char ch : row["state"].get<std::string>()) cfg.push_back(ch == 'a' ? Level::a : ch == 'b' ? Level::b : Level::c);
    const cplx amp(row["re"].get<double>(), row["im"].get<double>());
    EXPECT_NEAR(std::abs(amp - ref.state.amplitude(cfg)), 0.0, 1e-14);
  }
}

TEST(Scripts, RejectMalformedSteps) {
  using nlohmann::json;
  EXPECT_THROW(run_protocol_script(json{{"atoms", 2}}), ConfigError);
  EXPECT_THROW(run_protocol_script(json{{"atoms", 2}, {"steps", {{{"op", "measure"}}}}}), ConfigError);
  EXPECT_THROW(run_protocol_script(json{{"atoms", 2}, {"steps", {{{"op", "collision"}, {"pair", {0}}}}}}), ConfigError);
  EXPECT_THROW(run_protocol_script(json{{"atoms", 3}, {"target", "epr"}, {"steps", json::array()}}), ConfigError);
  EXPECT_THROW(run_protocol_script(json{{"atoms", 2},
                                        {"steps", {{{"op", "collision"}, {"pair", {0, 1}}, {"phases", {{"fidelity", 2.0}}}}}}}),
               ConfigError);
}

TEST(Scripts, EprScriptFromGatePhases) {
  using nlohmann::json;
  const json script = {{"atoms", 2},
                       {"target", "epr"},
                       {"steps",
                        {{{"op", "pulse"}, {"atoms", {0, 1}}, {"area_rad", M_PI / 2}},
                         {{"op", "collision"}, {"pair", {0, 1}}, {"phases", {{"ab", M_PI}, {"a", 0.2}, {"b", 0.2}}}},
                         {{"op", "pulse"}, {"atoms", {1}}, {"area_rad", M_PI / 2}, {"phase_rad", M_PI}}}}};
  EXPECT_NEAR(run_protocol_script(script)["fidelity"].get<double>(), 1.0, 1e-14);
}
