#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>

#include <Eigen/Dense>

#include "ccgate/units.hpp"

namespace ccgate::ode {

/// Step size collapsed below `min_step` or the step budget ran out.
class StiffnessError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct Options {
  double rel_tol = 1e-9;
  double abs_tol = 1e-9;
  double initial_step = 0.0;  // 0: pick automatically
  double max_step = std::numeric_limits<double>::infinity();
  double min_step = 1e-12;
  std::size_t max_steps = 20'000'000;
};

struct Stats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t evaluations = 0;
};

struct NoObserver {
  template <class State>
  void operator()(double, const State&) const {}
};

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
inline constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                        b6 = 11.0 / 84;
// b - b* (error weights); the 7th stage is the FSAL derivative at the new point.
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

inline double error_norm(const Eigen::VectorXcd& err, const Eigen::VectorXcd& y0,
                         const Eigen::VectorXcd& y1, const Options& opt) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < err.size(); ++i) {
    const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    worst = std::max(worst, std::abs(err[i]) / scale);
  }
  return worst;
}

}  // namespace detail

/// Adaptive Dormand-Prince 5(4) integration of y' = f(t, y) from t0 to t1
/// (t1 > t0) for complex state vectors. `rhs(t, y, dydt)` must fill dydt.
/// The observer sees every accepted step including the final one.
template <class Rhs, class Observer = NoObserver>
Stats integrate(Rhs&& rhs, double t0, double t1, Eigen::VectorXcd& y, const Options& opt,
                Observer&& observe = {}) {
  using namespace detail;
  Stats stats;
  if (!(t1 > t0)) return stats;
  const Eigen::Index n = y.size();
  Eigen::VectorXcd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y_new(n), err(n);

  rhs(t0, y, k1);
  ++stats.evaluations;

  double h = opt.initial_step;
  if (!(h > 0.0)) {
    const double d0 = y.norm();
    const double d1 = k1.norm();
    h = (d0 > 1e-5 && d1 > 1e-5) ? 0.01 * d0 / d1 : 1e-4;
    h = std::min(h, 0.1);
  }
  h = std::min({h, opt.max_step, t1 - t0});

  double t = t0;
  observe(t, y);
  while (t < t1) {
    if (stats.accepted + stats.rejected >= opt.max_steps) {
      throw StiffnessError("dormand_prince: step budget exhausted");
    }
    bool last = false;
    if (t + h >= t1 || t1 - (t + h) < 1e-12 * std::max(1.0, std::abs(t1))) {
      h = t1 - t;
      last = true;
    }

    tmp = y + h * a21 * k1;
    rhs(t + c2 * h, tmp, k2);
    tmp = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, tmp, k3);
    tmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, tmp, k4);
    tmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, tmp, k5);
    tmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, tmp, k6);
    y_new = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, y_new, k7);
    stats.evaluations += 6;

    err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    const double e = error_norm(err, y, y_new, opt);

    if (e <= 1.0) {
      t = last ? t1 : t + h;
      y.swap(y_new);
      k1.swap(k7);
      ++stats.accepted;
      observe(t, y);
      const double factor = e == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(e, -0.2), 0.2, 5.0);
      h = std::min(h * factor, opt.max_step);
    } else {
      ++stats.rejected;
      const double factor = std::isfinite(e) ? std::clamp(0.9 * std::pow(e, -0.2), 0.1, 0.9) : 0.1;
      h *= factor;
      if (h < opt.min_step) {
        std::ostringstream msg;
        msg << "dormand_prince: step size underflow (h = " << h << ") at t = " << t;
        throw StiffnessError(msg.str());
      }
    }
  }
  return stats;
}

}  // namespace ccgate::ode
