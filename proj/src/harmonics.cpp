#include "spindle/harmonics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spindle/quadrature.hpp"

namespace spindle {

namespace {

void check_degree(int l, int m) {
  if (l < 0 || std::abs(m) > l)
    throw std::invalid_argument("invalid harmonic index (l=" + std::to_string(l) + ", m=" + std::to_string(m) + ")");
}

}  // namespace

double legendre_p(int l, double x) {
  if (l < 0) throw std::invalid_argument("Legendre degree must be >= 0");
  if (l == 0) return 1.0;
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= l; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

std::vector<double> assoc_legendre_table(int lmax, double x) {
  if (lmax < 0) throw std::invalid_argument("band limit must be >= 0");
  std::vector<double> table(legendre_table_index(lmax, lmax) + 1, 0.0);
  const double s = std::sqrt(std::max(0.0, 1.0 - x * x));
  double pmm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  for (int m = 0; m <= lmax; ++m) {
    if (m > 0) pmm *= std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * s;
    table[legendre_table_index(m, m)] = pmm;
    if (m + 1 > lmax) continue;
    double prev2 = pmm;
    double prev1 = x * std::sqrt(2.0 * m + 3.0) * pmm;
    table[legendre_table_index(m + 1, m)] = prev1;
    for (int l = m + 2; l <= lmax; ++l) {
      const double l2 = static_cast<double>(l) * l;
      const double m2 = static_cast<double>(m) * m;
      const double a = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
      const double lm1 = l - 1.0;
      const double b = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
      const double cur = a * (x * prev1 - b * prev2);
      table[legendre_table_index(l, m)] = cur;
      prev2 = prev1;
      prev1 = cur;
    }
  }
  return table;
}

double assoc_legendre_normalized(int l, int m, double x) {
  check_degree(l, m);
  if (m < 0) throw std::invalid_argument("assoc_legendre_normalized expects m >= 0");
  return assoc_legendre_table(l, x)[legendre_table_index(l, m)];
}

complex sph_harm(int l, int m, double theta, double phi) {
  check_degree(l, m);
  const int am = std::abs(m);
  const double p = assoc_legendre_normalized(l, am, std::cos(phi));
  const complex y = p * std::polar(1.0, am * theta);
  if (m >= 0) return y;
  return (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
}

HarmonicCoefficients::HarmonicCoefficients(int lmax) : lmax_(lmax) {
  if (lmax < 0) throw std::invalid_argument("band limit must be >= 0");
  values_.assign(static_cast<std::size_t>((lmax + 1) * (lmax + 1)), complex{});
}

complex& HarmonicCoefficients::at(int l, int m) {
  if (l > lmax_) throw std::out_of_range("degree above band limit");
  check_degree(l, m);
  return values_[index(l, m)];
}

const complex& HarmonicCoefficients::at(int l, int m) const {
  if (l > lmax_) throw std::out_of_range("degree above band limit");
  check_degree(l, m);
  return values_[index(l, m)];
}

SphereGrid SphereGrid::make(std::size_t n_theta, std::size_t n_phi) {
  if (n_theta == 0 || n_phi == 0) throw std::invalid_argument("sphere grid must be non-empty");
  SphereGrid g;
  g.n_theta = n_theta;
  g.n_phi = n_phi;
  g.theta.resize(n_theta);
  for (std::size_t k = 0; k < n_theta; ++k) g.theta[k] = 2.0 * std::numbers::pi * k / static_cast<double>(n_theta);
  // Descending cos(phi) so colatitudes ascend.
  const auto rule = gauss_legendre(n_phi);
  for (std::size_t j = 0; j < n_phi; ++j) {
    const double x = rule.nodes[n_phi - 1 - j];
    g.cos_phi.push_back(x);
    g.phi.push_back(std::acos(x));
    g.phi_weights.push_back(rule.weights[n_phi - 1 - j]);
  }
  return g;
}

SphereGrid SphereGrid::for_band_limit(int lmax) {
  if (lmax < 0) throw std::invalid_argument("band limit must be >= 0");
  return make(static_cast<std::size_t>(2 * lmax + 1), static_cast<std::size_t>(lmax + 1));
}

bool SphereGrid::resolves(int lmax) const {
  return n_phi >= static_cast<std::size_t>(lmax + 1) && n_theta >= static_cast<std::size_t>(2 * lmax + 1);
}

HarmonicCoefficients analyze(std::span<const double> samples, const SphereGrid& grid, int lmax) {
  if (samples.size() != grid.size())
    throw std::invalid_argument("sample count " + std::to_string(samples.size()) + " does not match sphere grid " +
                                std::to_string(grid.size()));
  if (!grid.resolves(lmax))
    throw std::invalid_argument("sphere grid " + std::to_string(grid.n_theta) + "x" + std::to_string(grid.n_phi) +
                                " under-samples band limit " + std::to_string(lmax));
  HarmonicCoefficients out(lmax);
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(grid.n_theta);
  std::vector<complex> am(static_cast<std::size_t>(lmax + 1));
  for (std::size_t j = 0; j < grid.n_phi; ++j) {
    // azimuthal Fourier sums at this colatitude
    for (int m = 0; m <= lmax; ++m) {
      complex acc{};
      for (std::size_t k = 0; k < grid.n_theta; ++k)
        acc += samples[k * grid.n_phi + j] * std::polar(1.0, -m * grid.theta[k]);
      am[m] = acc * dtheta;
    }
    const auto plm = assoc_legendre_table(lmax, grid.cos_phi[j]);
    for (int l = 0; l <= lmax; ++l)
      for (int m = 0; m <= l; ++m) out.at(l, m) += grid.phi_weights[j] * plm[legendre_table_index(l, m)] * am[m];
  }
  for (int l = 0; l <= lmax; ++l)
    for (int m = 1; m <= l; ++m) out.at(l, -m) = (m % 2 == 0 ? 1.0 : -1.0) * std::conj(out.at(l, m));
  return out;
}

complex synthesize(const HarmonicCoefficients& coeffs, double theta, double phi) {
  const int lmax = coeffs.lmax();
  if (lmax < 0) return {};
  const auto plm = assoc_legendre_table(lmax, std::cos(phi));
  complex sum{};
  for (int l = 0; l <= lmax; ++l) {
    for (int m = -l; m <= l; ++m) {
      const int am = std::abs(m);
      complex y = plm[legendre_table_index(l, am)] * std::polar(1.0, am * theta);
      if (m < 0) y = (am % 2 == 0 ? 1.0 : -1.0) * std::conj(y);
      sum += coeffs.at(l, m) * y;
    }
  }
  return sum;
}

double synthesize_real(const HarmonicCoefficients& coeffs, double theta, double phi) {
  const int lmax = coeffs.lmax();
  if (lmax < 0) return 0.0;
  const auto plm = assoc_legendre_table(lmax, std::cos(phi));
  double sum = 0.0;
  for (int l = 0; l <= lmax; ++l) {
    sum += coeffs.at(l, 0).real() * plm[legendre_table_index(l, 0)];
    for (int m = 1; m <= l; ++m)
      sum += 2.0 * (coeffs.at(l, m) * std::polar(1.0, m * theta)).real() * plm[legendre_table_index(l, m)];
  }
  return sum;
}

double odd_energy_fraction(const HarmonicCoefficients& coeffs) {
  double odd = 0.0, total = 0.0;
  for (int l = 0; l <= coeffs.lmax(); ++l)
    for (int m = -l; m <= l; ++m) {
      const double e = std::norm(coeffs.at(l, m));
      total += e;
      if (l % 2 == 1) odd += e;
    }
  return total > 0.0 ? odd / total : 0.0;
}

double symmetrize_even(const HarmonicCoefficients& coeffs, double theta, double phi, double odd_tolerance) {
  if (odd_energy_fraction(coeffs) > odd_tolerance)
    throw std::invalid_argument("odd-degree coefficients present; field is not reducible to its even part");
  if (phi > 0.5 * std::numbers::pi) return 0.0;
  const int lmax = coeffs.lmax();
  if (lmax < 0) return 0.0;
  const auto plm = assoc_legendre_table(lmax, std::cos(phi));
  double sum = 0.0;
  for (int l = 0; l <= lmax; l += 2) {
    sum += coeffs.at(l, 0).real() * plm[legendre_table_index(l, 0)];
    for (int m = 1; m <= l; ++m)
      sum += 2.0 * (coeffs.at(l, m) * std::polar(1.0, m * theta)).real() * plm[legendre_table_index(l, m)];
  }
  return 2.0 * sum;
}

HarmonicProfileSet::HarmonicProfileSet(int lmax_, std::vector<double> grid_) : lmax(lmax_), grid(std::move(grid_)) {
  if (lmax < 0) throw std::invalid_argument("band limit must be >= 0");
  profiles.assign(static_cast<std::size_t>((lmax + 1) * (lmax + 1)), std::vector<complex>(grid.size()));
}

HarmonicCoefficients HarmonicProfileSet::slice(std::size_t i) const {
  HarmonicCoefficients c(lmax);
  for (std::size_t k = 0; k < profiles.size(); ++k) c.values()[k] = profiles[k].at(i);
  return c;
}

}  // namespace spindle
