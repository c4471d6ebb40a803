#pragma once

/// @file
/// @brief Gauss-Legendre rules on [0, 1].

#include <cmath>
#include <numbers>
#include <vector>

#include "../errors.hpp"

namespace rotinterp::minaccel {

struct QuadratureRule
{
  std::vector<double> nodes;    ///< xi_p in (0, 1), increasing
  std::vector<double> weights;  ///< W_p, summing to 1
  [[nodiscard]] int size() const { return static_cast<int>(nodes.size()); }
};

/// P-point Gauss-Legendre rule, exact for polynomials of degree 2P - 1.
/// Roots of P_P found by Newton's method from Chebyshev-like guesses.
inline QuadratureRule gauss_legendre(int points)
{
  if (points < 1) {
    throw PreconditionError("gauss_legendre: need at least one point");
  }
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(points));
  rule.weights.resize(static_cast<std::size_t>(points));
  const int n = points;
  for (int i = 0; i < n; ++i) {
    double x  = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int m = 2; m <= n; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0              = p1;
        p1              = p2;
      }
      dp              = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) <= 1e-16) {
        break;
      }
    }
    // Map [-1, 1] -> [0, 1]; store in increasing order.
    const auto slot          = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[slot]         = 0.5 * (1.0 + x);
    rule.weights[slot]       = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

}  // namespace rotinterp::minaccel
