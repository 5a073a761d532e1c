#pragma once

#include <cstddef>
#include <vector>

namespace spindle {

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const { return nodes.size(); }
};

/// Gauss-Legendre rule on [a, b], exact for polynomials of degree 2n - 1.
QuadratureRule gauss_legendre(std::size_t n, double a = -1.0, double b = 1.0);

/// Gauss-Chebyshev (first kind) rule for int_0^1 f(t) / sqrt(t (1 - t)) dt.
/// Weights are all pi / n.
QuadratureRule gauss_chebyshev_unit(std::size_t n);

}  // namespace spindle
