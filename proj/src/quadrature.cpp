#include "spindle/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace spindle {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(std::size_t n, double x) {
  double p0 = 1.0, p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (std::size_t k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = p2;
  }
  return {p1, static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
  if (n == 0) throw std::invalid_argument("Gauss-Legendre rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 1.0;
    if (n % 2 == 1 && i == n / 2) {
      x = 0.0;
      dp = legendre_with_derivative(n, 0.0).second;
    } else {
      for (int iter = 0; iter < 100; ++iter) {
        const auto [p, d] = legendre_with_derivative(n, x);
        const double dx = p / d;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      dp = legendre_with_derivative(n, x).second;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = mid - half * x;
    rule.nodes[n - 1 - i] = mid + half * x;
    rule.weights[i] = half * w;
    rule.weights[n - 1 - i] = half * w;
  }
  return rule;
}

QuadratureRule gauss_chebyshev_unit(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Gauss-Chebyshev rule needs at least one node");
  QuadratureRule rule;
  rule.nodes.resize(n);
  rule.weights.assign(n, std::numbers::pi / static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double x = std::cos((2.0 * k + 1.0) * std::numbers::pi / (2.0 * n));
    rule.nodes[k] = 0.5 * (1.0 + x);
  }
  return rule;
}

}  // namespace spindle
