#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ccgate/lattice.hpp"

using namespace ccgate;

namespace {

const LatticeParams kParams = LatticeParams::from_trap_frequency(1.0, 0.27);

// Closed form: V^a = V0/2 - (V0 R / 8) cos(2kz + chi) with R = sqrt(10 + 6 cos 4 theta),
// so the a-well is a pure sinusoid with curvature V0 R k^2 / 2.
double omega_a_closed(double theta, const LatticeParams& p) {
  const double r = std::sqrt(10.0 + 6.0 * std::cos(4.0 * theta));
  return std::sqrt(p.depth * r * p.wavevector * p.wavevector / 2.0 / p.mass);
}

std::vector<double> theta_path(double from, double to, int n) {
  std::vector<double> th(n);
  for (int i = 0; i < n; ++i) th[i] = from + (to - from) * i / (n - 1);
  return th;
}

}  // namespace

TEST(Lattice, DerivativesMatchFiniteDifferences) {
  for (Level l : {Level::a, Level::b})
    for (double z : {0.3, 4.1, 9.7})
      for (double th : {0.0, 0.4, 1.2}) {
        const auto d = state_potential_derivatives(l, z, th, kParams);
        const double h = 1e-4;
        auto v = [&](double zz, double tt) { return state_potential(l, zz, tt, kParams); };
        EXPECT_NEAR(d.value, v(z, th), 1e-14);
        EXPECT_NEAR(d.dz, (v(z + h, th) - v(z - h, th)) / (2 * h), 1e-8);
        EXPECT_NEAR(d.dzz, (v(z + h, th) - 2 * v(z, th) + v(z - h, th)) / (h * h), 1e-6);
        EXPECT_NEAR(d.dz_dtheta,
                    (v(z + h, th + h) - v(z - h, th + h) - v(z + h, th - h) + v(z - h, th - h)) / (4 * h * h), 1e-5);
      }
}

TEST(Lattice, BWellFrequencyConstant) {
  const auto path = theta_path(0.0, M_PI / 2, 801);
  const auto wells = track_well(Level::b, path, 0, kParams);
  for (const auto& w : wells) EXPECT_NEAR(w.frequency, 1.0, 1e-6);
}

TEST(Lattice, AWellFrequencyMatchesClosedFormAndDips) {
  const auto path = theta_path(M_PI / 2, 0.0, 801);
  const auto wells = track_well(Level::a, path, 0, kParams);
  double lowest = 10.0;
  for (std::size_t i = 0; i < wells.size(); ++i) {
    EXPECT_NEAR(wells[i].frequency, omega_a_closed(path[i], kParams), 1e-9);
    lowest = std::min(lowest, wells[i].frequency);
  }
  EXPECT_NEAR(lowest, 1.0 / std::sqrt(2.0), 1e-6);
  EXPECT_NEAR(wells.front().frequency, 1.0, 1e-9);
  EXPECT_NEAR(wells.back().frequency, 1.0, 1e-9);
}

TEST(Lattice, WellsCoincideAtZeroAngle) {
  const std::vector<double> zero{0.0};
  for (int site : {-1, 0, 3}) {
    // the b-well of site n and the a-well of site n + 1 meet halfway
    const auto b = track_well(Level::b, zero, site, kParams);
    const auto a_next = track_well(Level::a, zero, site + 1, kParams);
    EXPECT_LT(std::abs(a_next[0].center - b[0].center) * kParams.wavevector, 1e-9);
    EXPECT_NEAR(a_next[0].frequency, b[0].frequency, 1e-9);
  }
}

TEST(Lattice, TrackedCentersMoveOppositely) {
  const auto path = theta_path(M_PI / 2, 0.0, 401);
  const auto a = track_well(Level::a, path, 0, kParams);
  const auto b = track_well(Level::b, path, 0, kParams);
  const double quarter = 0.25 * kParams.period();
  EXPECT_NEAR(a.back().center - a.front().center, -quarter * 2, 1e-9);
  EXPECT_NEAR(b.back().center - b.front().center, quarter * 2, 1e-9);
}

TEST(Lattice, CoarsePathLosesTrack) {
  // A single jump across half a period cannot be followed.
  const std::vector<double> jump{M_PI / 2, 0.0};
  EXPECT_THROW(track_well(Level::b, jump, 0, kParams), LostMinimumError);
  EXPECT_THROW(LatticeParams::from_trap_frequency(1.0, -1.0), ConfigError);
  EXPECT_THROW(state_potential(Level::c, 0.0, 0.0, kParams), ConfigError);
}

TEST(Lattice, TrajectoriesFollowScheduleFigureShape) {
  const auto lt = lattice_to_trajectories(30.0, 20.0, kParams, 1000);
  const double d = lt.separation;
  EXPECT_NEAR(d, M_PI / kParams.wavevector, 1e-12);
  EXPECT_NEAR(lt.omega, 1.0, 1e-9);
  // a moves to +x, b to -x, each by d/2 at the plateau
  EXPECT_NEAR(lt.a.offset(0.0), 0.5 * d, 1e-9 * d);
  EXPECT_NEAR(lt.b.offset(0.0), -0.5 * d, 1e-9 * d);
  for (double t : {-60.0, -25.0, 10.0, 45.0}) {
    EXPECT_GE(lt.a.offset(t), -1e-12);
    EXPECT_LE(lt.b.offset(t), 1e-12);
    EXPECT_NEAR(lt.b.omega(t), 1.0, 1e-6);
    EXPECT_LE(lt.a.omega(t), 1.0 + 1e-9);
  }
  // meeting point: atom 1 (a, site 0) and atom 2 (b, site 1)
  EXPECT_NEAR(lt.a.offset(0.0), d + lt.b.offset(0.0), 1e-9 * d);
}

TEST(Lattice, TrajectoryDerivativesConsistent) {
  const auto lt = lattice_to_trajectories(10.0, 5.0, kParams, 500);
  for (const Trajectory* tr : {&lt.a, &lt.b})
    for (double t : {-20.0, -8.0, -1.0, 3.0, 14.0}) {
      const double h = 1e-5;
      EXPECT_NEAR(tr->velocity(t), (tr->offset(t + h) - tr->offset(t - h)) / (2 * h), 1e-7);
      EXPECT_NEAR(tr->omega_rate(t), (tr->omega(t + h) - tr->omega(t - h)) / (2 * h), 1e-7);
    }
}
