#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "ccgate/units.hpp"

namespace ccgate::quad {

/// Normalized Hermite functions psi_0..psi_{n-1} at y,
/// psi_k(y) = (2^k k! sqrt(pi))^{-1/2} H_k(y) exp(-y^2/2).
/// Three-term recurrence, stable for the orders used here (k < ~200).
inline void hermite_functions(double y, std::span<double> out) {
  const std::size_t n = out.size();
  if (n == 0) return;
  out[0] = std::exp(-0.5 * y * y) / std::pow(std::numbers::pi, 0.25);
  if (n == 1) return;
  out[1] = std::sqrt(2.0) * y * out[0];
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const double kk = static_cast<double>(k);
    out[k + 1] = std::sqrt(2.0 / (kk + 1.0)) * y * out[k] - std::sqrt(kk / (kk + 1.0)) * out[k - 1];
  }
}

inline std::vector<double> hermite_functions(double y, std::size_t n) {
  std::vector<double> v(n);
  hermite_functions(y, v);
  return v;
}

/// Oscillator eigenfunctions phi_k(x) = a^{-1/2} psi_k((x - center) / a).
inline void oscillator_functions(double x, double center, double width, std::span<double> out) {
  hermite_functions((x - center) / width, out);
  const double s = 1.0 / std::sqrt(width);
  for (double& v : out) v *= s;
}

/// Gauss-Hermite rule for weight exp(-x^2).
///
/// `scaled_weights` are w_q exp(x_q^2), which is what a caller integrating a
/// function that already carries its own Gaussian factor needs; computing
/// them as 1 / sum_k psi_k(x_q)^2 keeps the outer nodes accurate.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::vector<double> scaled_weights;
};

inline GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw ConfigError("gauss_hermite: node count must be >= 1");
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  GaussHermiteRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  rule.scaled_weights.resize(n);
  std::vector<double> psi(static_cast<std::size_t>(n) + 1);
  for (int q = 0; q < n; ++q) {
    double x = eig.eigenvalues()(q);
    // Newton polish on psi_n(x) = 0 using psi_n' = sqrt(2n) psi_{n-1} - x psi_n.
    for (int it = 0; it < 3; ++it) {
      hermite_functions(x, psi);
      const double f = psi[n];
      const double df = std::sqrt(2.0 * n) * psi[n - 1] - x * psi[n];
      if (df == 0.0) break;
      x -= f / df;
    }
    hermite_functions(x, psi);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) sum += psi[k] * psi[k];
    rule.nodes[q] = x;
    rule.scaled_weights[q] = 1.0 / sum;
    rule.weights[q] = std::exp(-x * x) / sum;
  }
  return rule;
}

/// Composite 8-point Gauss-Legendre over [a, b] split into `panels` equal panels.
template <class F>
auto integrate_composite(F&& f, double a, double b, int panels) -> decltype(f(a)) {
  using R = decltype(f(a));
  using rule = boost::math::quadrature::gauss<double, 8>;
  const auto& x = rule::abscissa();
  const auto& w = rule::weights();
  R total{};
  if (b == a || panels < 1) return total;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    const double half = 0.5 * h;
    R panel{};
    for (std::size_t i = 0; i < x.size(); ++i) {
      panel += w[i] * (f(mid - half * x[i]) + f(mid + half * x[i]));
    }
    total += half * panel;
  }
  return total;
}

/// Composite rule respecting interior breakpoints (kinks of the integrand).
/// Panels are distributed in proportion to segment length, at least one each.
template <class F>
auto integrate_piecewise(F&& f, double a, double b, std::span<const double> breakpoints, int panels)
    -> decltype(f(a)) {
  std::vector<double> cuts{a};
  for (double c : breakpoints) {
    if (c > a && c < b) cuts.push_back(c);
  }
  cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  decltype(f(a)) total{};
  for (std::size_t s = 0; s + 1 < cuts.size(); ++s) {
    const double len = cuts[s + 1] - cuts[s];
    if (len <= 0.0) continue;
    const int n = std::max(1, static_cast<int>(std::ceil(panels * len / (b - a))));
    total += integrate_composite(f, cuts[s], cuts[s + 1], n);
  }
  return total;
}

}  // namespace ccgate::quad
