#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "spindle/geometry.hpp"

namespace spindle {

/// Ascending nodes z_0 < ... < z_{N-1} in [0, 1), N >= 8.
struct RadialGrid {
  std::vector<double> nodes;

  RadialGrid() = default;
  explicit RadialGrid(std::vector<double> z);
  static RadialGrid uniform(double z_lo, double z_hi, std::size_t n);

  std::size_t size() const { return nodes.size(); }
  double operator[](std::size_t i) const { return nodes[i]; }
  /// Trapezoid weights for int_{z_0}^{z_i} on the first i + 1 nodes.
  std::vector<double> trapezoid_weights(std::size_t i) const;
};

/// Weakly singular kernel of the harmonic channel of degree l:
///   K_l(r, rho) = W(r, rho) rho g sqrt(g^2 + (r^2 - rho^2) g'^2) P_l(sqrt(1 - rho^2/r^2)) / (r sqrt(r + rho))
/// with g, g' evaluated at rho.
class VolterraKernel {
 public:
  VolterraKernel(int l, SymmetricCurve curve, Weighting weight);

  int degree() const { return l_; }
  double K(double r, double rho) const;
  /// Closed form K_l(z, z) = W(z, z) g(z)^2 c_l / sqrt(2 z), c_l = P_l(0).
  double diagonal(double z) const;
  /// Q_l(z, rho) = int_0^1 K(rho + (z - rho) t, rho) / sqrt(t (1 - t)) dt by
  /// Gauss-Chebyshev quadrature; Q(z, z) = pi K(z, z).
  double Q(double z, double rho, std::size_t nodes = 64) const;

 private:
  int l_;
  double c_l_;
  SymmetricCurve curve_;
  Weighting weight_;
};

/// int_{z_0}^{z} d(r) / sqrt(z - r) dr for d sampled on the grid, linear between
/// nodes, with the 1/sqrt singularity integrated exactly on each piece. The
/// samples are taken to vanish below z_0.
double abel_integrate(std::span<const double> d, const RadialGrid& grid, double z);

/// d/dz int_{z_0}^{z} d(r) / sqrt(z - r) dr at every node, computed as
/// d(z_0)/sqrt(z - z_0) + int d'(r)/sqrt(z - r) dr with d' from second-order
/// finite differences. The value at z_0 is 0 (d must vanish there).
std::vector<double> abel_derivative(std::span<const double> d, const RadialGrid& grid);

/// Lower-triangular kernel table H(z_i, z_j), j <= i, row-major N x N.
struct KernelTable {
  std::size_t n = 0;
  std::vector<double> values;

  explicit KernelTable(std::size_t n_ = 0) : n(n_), values(n_ * n_, 0.0) {}
  double& operator()(std::size_t i, std::size_t j) { return values[i * n + j]; }
  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

/// Second-kind equation u(z) + int_{z_0}^{z} H(z, rho) u(rho) drho = v(z) on a grid.
struct SecondKindSystem {
  RadialGrid grid;
  std::vector<double> v;
  KernelTable H;
};

/// From first-kind data d(r) = int_0^r u(rho) K(r, rho) / sqrt(r - rho) drho
/// (d is the harmonic data coefficient divided by 4 pi) build
///   v = (1 / (pi K(z, z))) d/dz int d / sqrt(z - r),  H = (1 / (pi K(z, z))) dQ/dz.
/// dQ/dz uses a centred difference with step h/4 (h the local grid spacing),
/// second-order one-sided where the centred stencil would leave rho <= z.
/// Throws std::domain_error where K(z, z) vanishes on the grid (e.g. odd l).
SecondKindSystem build_second_kind(const VolterraKernel& kernel, std::span<const double> d, const RadialGrid& grid);

/// Kernel table only; reusable across channels of the same degree.
KernelTable second_kind_kernel(const VolterraKernel& kernel, const RadialGrid& grid);
/// Right-hand side only.
std::vector<double> second_kind_rhs(const VolterraKernel& kernel, std::span<const double> d, const RadialGrid& grid);

/// Trapezoidal product integration with the diagonal term taken implicitly.
std::vector<double> solve_second_kind(const SecondKindSystem& sys);
std::vector<double> solve_second_kind(std::span<const double> v, const KernelTable& H, const RadialGrid& grid);

/// Same discrete equation solved by summing the resolvent (Neumann) series
/// u = sum_k (-T)^k v of the trapezoid operator T. Stops when a term falls below
/// tol times |v| or after max_terms; throws std::runtime_error if the series diverges.
std::vector<double> solve_second_kind_neumann(std::span<const double> v, const KernelTable& H,
                                              const RadialGrid& grid, std::size_t max_terms = 500,
                                              double tol = 1e-15);

}  // namespace spindle
