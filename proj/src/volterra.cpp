#include "spindle/volterra.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spindle/harmonics.hpp"
#include "spindle/quadrature.hpp"

namespace spindle {

RadialGrid::RadialGrid(std::vector<double> z) : nodes(std::move(z)) {
  if (nodes.size() < 8) throw std::invalid_argument("radial grid needs at least 8 nodes");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!(nodes[i] >= 0.0 && nodes[i] < 1.0)) throw std::invalid_argument("radial grid nodes must lie in [0, 1)");
    if (i > 0 && !(nodes[i] > nodes[i - 1])) throw std::invalid_argument("radial grid must be strictly increasing");
  }
}

RadialGrid RadialGrid::uniform(double z_lo, double z_hi, std::size_t n) {
  if (n < 2) throw std::invalid_argument("radial grid needs at least 8 nodes");
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = z_lo + (z_hi - z_lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return RadialGrid(std::move(z));
}

std::vector<double> RadialGrid::trapezoid_weights(std::size_t i) const {
  std::vector<double> w(i + 1, 0.0);
  for (std::size_t j = 0; j < i; ++j) {
    const double h = nodes[j + 1] - nodes[j];
    w[j] += 0.5 * h;
    w[j + 1] += 0.5 * h;
  }
  return w;
}

VolterraKernel::VolterraKernel(int l, SymmetricCurve curve, Weighting weight)
    : l_(l), c_l_(legendre_p(l, 0.0)), curve_(std::move(curve)), weight_(std::move(weight)) {}

double VolterraKernel::K(double r, double rho) const {
  if (!(r > 0.0)) throw std::domain_error("kernel needs r > 0");
  const double g = curve_.g(rho), gp = curve_.g_prime(rho);
  const double x = std::sqrt(std::max(0.0, 1.0 - (rho / r) * (rho / r)));
  return weight_.in_volterra_coords(r, rho) * rho * g * std::sqrt(g * g + (r * r - rho * rho) * gp * gp) *
         legendre_p(l_, x) / (r * std::sqrt(r + rho));
}

double VolterraKernel::diagonal(double z) const {
  const double g = curve_.g(z);
  return weight_.in_volterra_coords(z, z) * g * g * c_l_ / std::sqrt(2.0 * z);
}

double VolterraKernel::Q(double z, double rho, std::size_t nodes) const {
  if (rho > z) throw std::domain_error("Q(z, rho) needs rho <= z");
  if (rho == z) return std::numbers::pi * K(z, z);
  const auto rule = gauss_chebyshev_unit(nodes);
  double s = 0.0;
  for (std::size_t k = 0; k < rule.size(); ++k) s += rule.weights[k] * K(rho + (z - rho) * rule.nodes[k], rho);
  return s;
}

namespace {

// int_a^b (linear from da to db) / sqrt(z - r) dr for z >= b.
double linear_abel_piece(double a, double b, double da, double db, double z) {
  const double sa = std::sqrt(z - a), sb = std::sqrt(z - b);
  const double diff = (b - a) / (sa + sb);  // sa - sb without cancellation
  const double m0 = 2.0 * diff;
  // int_a^b (r - a) / sqrt(z - r) dr = (2/3)(sa - sb)^2 (2 sa + sb)
  const double m1 = (2.0 / 3.0) * diff * diff * (2.0 * sa + sb);
  return da * m0 + (db - da) / (b - a) * m1;
}

void check_samples(std::span<const double> d, const RadialGrid& grid) {
  if (d.size() != grid.size())
    throw std::invalid_argument("sample count " + std::to_string(d.size()) + " does not match radial grid " +
                                std::to_string(grid.size()));
}

}  // namespace

double abel_integrate(std::span<const double> d, const RadialGrid& grid, double z) {
  check_samples(d, grid);
  const auto& x = grid.nodes;
  if (z < x.front() || z > x.back()) throw std::domain_error("abel_integrate endpoint outside the grid span");
  double s = 0.0;
  for (std::size_t j = 0; j + 1 < x.size() && x[j] < z; ++j) {
    const double b = std::min(x[j + 1], z);
    const double db = b == x[j + 1] ? d[j + 1] : d[j] + (d[j + 1] - d[j]) * (b - x[j]) / (x[j + 1] - x[j]);
    s += linear_abel_piece(x[j], b, d[j], db, z);
  }
  return s;
}

namespace {

// Second-order derivative of samples on a possibly nonuniform grid.
std::vector<double> grid_derivative(std::span<const double> d, const std::vector<double>& x) {
  const std::size_t n = x.size();
  std::vector<double> out(n);
  auto three_point = [&](std::size_t i0, std::size_t at) {
    // derivative at x[at] of the parabola through i0, i0+1, i0+2
    const double x0 = x[i0], x1 = x[i0 + 1], x2 = x[i0 + 2], t = x[at];
    const double l0 = ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2));
    const double l1 = ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2));
    const double l2 = ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1));
    return l0 * d[i0] + l1 * d[i0 + 1] + l2 * d[i0 + 2];
  };
  out[0] = three_point(0, 0);
  for (std::size_t i = 1; i + 1 < n; ++i) out[i] = three_point(i - 1, i);
  out[n - 1] = three_point(n - 3, n - 1);
  return out;
}

}  // namespace

std::vector<double> abel_derivative(std::span<const double> d, const RadialGrid& grid) {
  check_samples(d, grid);
  const auto dp = grid_derivative(d, grid.nodes);
  std::vector<double> out(grid.size(), 0.0);
  const double z0 = grid[0];
  for (std::size_t i = 1; i < grid.size(); ++i)
    out[i] = d[0] / std::sqrt(grid[i] - z0) + abel_integrate(dp, grid, grid[i]);
  return out;
}

KernelTable second_kind_kernel(const VolterraKernel& kernel, const RadialGrid& grid) {
  const std::size_t n = grid.size();
  KernelTable H(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = grid[i];
    const double kzz = kernel.diagonal(z);
    if (kzz == 0.0 || !std::isfinite(kzz))
      throw std::domain_error("kernel diagonal vanishes at z = " + std::to_string(z) + " (degree " +
                              std::to_string(kernel.degree()) + ")");
    const double h = 0.25 * (i + 1 < n ? grid[i + 1] - grid[i] : grid[i] - grid[i - 1]);
    for (std::size_t j = 0; j <= i; ++j) {
      const double rho = grid[j];
      double dq;
      if (z - h >= rho) {
        dq = (kernel.Q(z + h, rho) - kernel.Q(z - h, rho)) / (2.0 * h);
      } else {
        dq = (-3.0 * kernel.Q(z, rho) + 4.0 * kernel.Q(z + h, rho) - kernel.Q(z + 2.0 * h, rho)) / (2.0 * h);
      }
      H(i, j) = dq / (std::numbers::pi * kzz);
    }
  }
  return H;
}

std::vector<double> second_kind_rhs(const VolterraKernel& kernel, std::span<const double> d, const RadialGrid& grid) {
  auto v = abel_derivative(d, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double kzz = kernel.diagonal(grid[i]);
    if (kzz == 0.0 || !std::isfinite(kzz))
      throw std::domain_error("kernel diagonal vanishes at z = " + std::to_string(grid[i]) + " (degree " +
                              std::to_string(kernel.degree()) + ")");
    v[i] /= std::numbers::pi * kzz;
  }
  return v;
}

SecondKindSystem build_second_kind(const VolterraKernel& kernel, std::span<const double> d, const RadialGrid& grid) {
  return {grid, second_kind_rhs(kernel, d, grid), second_kind_kernel(kernel, grid)};
}

std::vector<double> solve_second_kind(const SecondKindSystem& sys) { return solve_second_kind(sys.v, sys.H, sys.grid); }

std::vector<double> solve_second_kind(std::span<const double> v, const KernelTable& H, const RadialGrid& grid) {
  const std::size_t n = grid.size();
  if (v.size() != n || H.n != n) throw std::invalid_argument("second-kind system sizes disagree");
  std::vector<double> u(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = grid.trapezoid_weights(i);
    double s = v[i];
    for (std::size_t j = 0; j < i; ++j) s -= w[j] * H(i, j) * u[j];
    u[i] = s / (1.0 + w[i] * H(i, i));
  }
  return u;
}

std::vector<double> solve_second_kind_neumann(std::span<const double> v, const KernelTable& H,
                                              const RadialGrid& grid, std::size_t max_terms, double tol) {
  const std::size_t n = grid.size();
  if (v.size() != n || H.n != n) throw std::invalid_argument("second-kind system sizes disagree");
  // T(i, j) = w_ij H(i, j): the trapezoid discretization of the integral operator.
  KernelTable T(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = grid.trapezoid_weights(i);
    for (std::size_t j = 0; j <= i; ++j) T(i, j) = w[j] * H(i, j);
  }
  double vnorm = 0.0;
  for (double x : v) vnorm = std::max(vnorm, std::abs(x));
  std::vector<double> u(v.begin(), v.end()), term(v.begin(), v.end()), next(n);
  for (std::size_t k = 1; k <= max_terms; ++k) {
    double tnorm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j <= i; ++j) s -= T(i, j) * term[j];
      next[i] = s;
      tnorm = std::max(tnorm, std::abs(s));
    }
    term.swap(next);
    for (std::size_t i = 0; i < n; ++i) u[i] += term[i];
    if (!std::isfinite(tnorm)) throw std::runtime_error("resolvent series diverged");
    if (tnorm <= tol * vnorm) return u;
  }
  throw std::runtime_error("resolvent series did not converge in " + std::to_string(max_terms) + " terms");
}

}  // namespace spindle
