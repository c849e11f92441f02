#include <cmath>
#include <sstream>

#include <gtest/gtest.h>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/factorials.hpp>
#include <boost/math/special_functions/hermite.hpp>

#include "ccgate/two_particle.hpp"

using namespace ccgate;

namespace {

// phi_n(x) for a trap of width a, via Boost's physicists' Hermite polynomials.
double phi(int n, double x, double a) {
  const double y = x / a;
  const double norm = 1.0 / std::sqrt(std::pow(2.0, n) * boost::math::factorial<double>(n) * std::sqrt(M_PI) * a);
  return norm * boost::math::hermite(n, y) * std::exp(-0.5 * y * y);
}

double brute_table(int mp, int np, int m, int n, double c1, double c2, double a1, double a2) {
  // the integrand is negligible 12 widths away from both centers
  const double span = 12.0 * std::max(a1, a2);
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      [&](double x) { return phi(mp, x - c1, a1) * phi(m, x - c1, a1) * phi(np, x - c2, a2) * phi(n, x - c2, a2); },
      std::min(c1, c2) - span, std::max(c1, c2) + span, 15, 1e-14);
}

PairGeometry meeting(double tau_r, double tau_i, double d) {
  const auto a = Trajectory::sigmoid({tau_r, tau_i, 0.5 * d});
  const auto b = Trajectory::sigmoid({tau_r, tau_i, -0.5 * d});
  return branch_geometry(Branch::ab, a, b, d);
}

}  // namespace

TEST(Coupling, OneDimensionalReductionMatchesTransverseIntegral) {
  // g1D = g3D int |phi_perp(y)|^4 dy int |phi_perp(z)|^4 dz
  for (double wp : {1.0, 3.0, 40.0}) {
    const double a = 1.0 / std::sqrt(wp);
    boost::math::quadrature::tanh_sinh<double> ts;
    const double one = ts.integrate([&](double y) { return std::pow(phi(0, y, a), 4); },
                                    -std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity());
    InteractionModel m{0.013, wp};
    EXPECT_NEAR(std::abs(m.coupling_1d() - m.coupling_3d() * one * one), 0.0, 1e-12 * std::abs(m.coupling_1d()));
  }
  EXPECT_THROW((InteractionModel{cplx(0.1, 0.01), 1.0}.validate()), ConfigError);
  EXPECT_THROW(effective_1d_coupling(0.1, 0.0), ConfigError);
}

TEST(Contact, GroundOverlapClosedForm) {
  boost::math::quadrature::tanh_sinh<double> ts;
  for (auto [c1, c2, a1, a2] : {std::array{0.0, 0.0, 1.0, 1.0}, std::array{0.3, 1.9, 1.0, 0.7},
                               std::array{-1.0, 2.0, 1.3, 1.3}}) {
    const double ref = brute_table(0, 0, 0, 0, c1, c2, a1, a2);
    EXPECT_NEAR(ground_density_overlap(c1, c2, a1, a2), ref, 1e-13);
  }
  EXPECT_NEAR(ground_density_overlap(0, 0, 1, 1), 1.0 / std::sqrt(2.0 * M_PI), 1e-15);
}

TEST(Contact, TableMatchesBruteForceAndIsSymmetric) {
  const double c1 = 0.4, c2 = 1.7, a1 = 1.0, a2 = 0.8;
  const int n = 5;
  const auto t = contact_matrix_elements(c1, c2, a1, a2, n);
  for (int mp = 0; mp < n; ++mp)
    for (int np = 0; np < n; ++np)
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) {
          EXPECT_NEAR(t(mp, np, m, k), t(m, np, mp, k), 1e-14);
          EXPECT_NEAR(t(mp, np, m, k), t(mp, k, m, np), 1e-14);
        }
  for (auto idx : {std::array{0, 0, 0, 0}, std::array{1, 0, 0, 0}, std::array{2, 3, 1, 4}, std::array{4, 4, 4, 4}})
    EXPECT_NEAR(t(idx[0], idx[1], idx[2], idx[3]), brute_table(idx[0], idx[1], idx[2], idx[3], c1, c2, a1, a2), 1e-12)
        << idx[0] << idx[1] << idx[2] << idx[3];
  EXPECT_THROW(contact_matrix_elements(0, 0, 1, 1, 17), ConfigError);
}

TEST(Contact, ApplyMatchesTableContraction) {
  const int n = 4;
  ContactOperator op(n);
  op.update(0.2, -0.5, 1.0, 1.2);
  const auto t = op.table();
  const Eigen::MatrixXcd c = Eigen::MatrixXcd::Random(n, n);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  const cplx g(0.7, -0.1);
  op.apply(c, out, g);
  for (int mp = 0; mp < n; ++mp)
    for (int np = 0; np < n; ++np) {
      cplx ref{};
      for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k) ref += t(mp, np, m, k) * c(m, k);
      EXPECT_NEAR(std::abs(out(mp, np) - g * ref), 0.0, 1e-13);
    }
}

TEST(TwoParticle, NoInteractionFactorizes) {
  const auto pair = meeting(3.0, 2.0, 2.0);
  const int n = 10;
  const auto r = evolve_two_particle(Branch::ab, pair, {0.0, 1.0}, n, {{1e-10}});
  const auto s1 = evolve_single_particle(pair.first, n, {1e-10});
  const auto s2 = evolve_single_particle(pair.second, n, {1e-10});
  const Eigen::MatrixXcd product = s1.state.amplitudes * s2.state.amplitudes.transpose();
  EXPECT_LT((r.state.amplitudes - product).norm(), 1e-7);
  EXPECT_NEAR(r.collisional_phase, 0.0, 1e-7);
  EXPECT_LT(r.max_norm_drift, 1e-8);
}

TEST(TwoParticle, WeakCouplingMatchesAdiabaticIntegral) {
  const auto pair = meeting(20.0, 10.0, 6.0);
  const InteractionModel model{0.002, 1.0};
  const auto r = evolve_two_particle(Branch::ab, pair, model, 8, {{1e-10}});
  const double adiabatic = collisional_phase_adiabatic(pair, model).real();
  EXPECT_GT(adiabatic, 0.0);
  EXPECT_NEAR(r.collisional_phase, -adiabatic, 0.01 * adiabatic);
  EXPECT_LT(r.excitation_leakage, 1e-5);
}

TEST(TwoParticle, AdiabaticPhaseIsLinearInScatteringLength) {
  const auto pair = meeting(10.0, 5.0, 4.0);
  const double one = collisional_phase_adiabatic(pair, {0.01, 1.0}).real();
  EXPECT_NEAR(collisional_phase_adiabatic(pair, {0.03, 1.0}).real(), 3.0 * one, 1e-12);
  EXPECT_NEAR(collisional_phase_adiabatic(pair, {0.01, 2.0}).real(), 2.0 * one, 1e-12);
}

TEST(TwoParticle, AdiabaticPhaseMatchesIndependentQuadrature) {
  const auto pair = meeting(10.0, 5.0, 4.0);
  const InteractionModel model{0.05, 1.0};
  boost::math::quadrature::tanh_sinh<double> ts;
  const double ref = ts.integrate([&](double t) { return energy_shift(pair, model, t).real(); }, pair.start(), pair.end());
  EXPECT_NEAR(collisional_phase_adiabatic(pair, model).real(), ref, 1e-9 * ref);
}

TEST(TwoParticle, LossIsMonotoneInImaginaryPart) {
  const auto pair = meeting(8.0, 4.0, 4.0);
  double last = -1.0;
  for (double im : {0.0, -0.005, -0.02, -0.05}) {
    const auto r = evolve_two_particle(Branch::ab, pair, {cplx(0.05, im), 1.0}, 6, {{1e-9}, 0, 0, false});
    EXPECT_GT(r.norm_loss, last);
    if (im == 0.0) EXPECT_LT(r.norm_loss, 1e-7);
    last = r.norm_loss;
  }
  // adiabatic estimate of the surviving probability, to first order in a_s
  const InteractionModel lossy{cplx(0.05, -0.005), 1.0};
  const auto r = evolve_two_particle(Branch::ab, pair, lossy, 8, {{1e-10}, 0, 0, false});
  const double survive = std::exp(2.0 * collisional_phase_adiabatic(pair, lossy).imag());
  EXPECT_NEAR(std::log(1.0 - r.norm_loss), std::log(survive), 0.05 * std::abs(std::log(survive)));
}

TEST(TwoParticle, RelabelingAtomsLeavesPhaseUnchanged) {
  const auto a = Trajectory::sigmoid({4.0, 3.0, 1.0});
  const auto b = Trajectory::sigmoid({4.0, 3.0, -1.0});
  const PairGeometry fwd{a, b, 2.0};
  const PairGeometry swapped{b, a, -2.0};
  const InteractionModel model{0.1, 1.0};
  const auto r1 = evolve_two_particle(Branch::ab, fwd, model, 8, {{1e-10}});
  const auto r2 = evolve_two_particle(Branch::ba, swapped, model, 8, {{1e-10}});
  EXPECT_NEAR(r1.collisional_phase, r2.collisional_phase, 1e-7);
  EXPECT_LT((r1.state.amplitudes - r2.state.amplitudes.transpose()).norm(), 1e-7);
}

TEST(TwoParticle, SlowerTransportLeaksLess) {
  const InteractionModel model{0.05, 1.0};
  const auto fast = evolve_two_particle(Branch::ab, meeting(2.0, 2.0, 3.0), model, 10, {{1e-9}, 0, 0, false});
  const auto slow = evolve_two_particle(Branch::ab, meeting(15.0, 2.0, 3.0), model, 10, {{1e-9}, 0, 0, false});
  EXPECT_LT(slow.excitation_leakage, 1e-4);
  EXPECT_GT(fast.excitation_leakage, 10.0 * slow.excitation_leakage);
}

TEST(TwoParticle, BasisConvergenceTrend) {
  // Strong overlap: the phase converges as the basis grows.
  const auto pair = meeting(6.0, 4.0, 4.0);
  const InteractionModel model{0.1, 1.0};
  std::vector<double> phi;
  for (int n : {4, 6, 8, 10}) phi.push_back(evolve_two_particle(Branch::ab, pair, model, n, {{1e-10}}).collisional_phase);
  const double d1 = std::abs(phi[1] - phi[0]), d2 = std::abs(phi[3] - phi[2]);
  EXPECT_LT(d2, d1);
}

TEST(TwoParticle, RejectsBadInput) {
  const auto pair = meeting(3.0, 1.0, 1.0);
  EXPECT_THROW(evolve_two_particle(Branch::ab, pair, {cplx(0.1, 0.1), 1.0}, 4), ConfigError);
  EXPECT_THROW(evolve_two_particle(Branch::ab, pair, {0.1, 1.0}, 1), ConfigError);
  TwoParticleOptions opt;
  opt.initial_second = 4;
  EXPECT_THROW(evolve_two_particle(Branch::ab, pair, {0.1, 1.0}, 4, opt), ConfigError);
}

TEST(TwoParticle, TraceCsv) {
  const auto pair = meeting(3.0, 1.0, 1.0);
  const InteractionModel model{0.05, 1.0};
  std::ostringstream out;
  TwoParticleTrace trace(out, pair, model);
  evolve_two_particle(Branch::ab, pair, model, 4, {{1e-8}, 0, 0, false}, trace);
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')), "t,re_c00,im_c00,leakage,norm,delta_e");
}
