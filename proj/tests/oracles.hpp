#pragma once

// High-accuracy reference data for densities f = psi(|x|) E(x / |x|) with E a
// polynomial: the azimuthal trapezoid rule is exact for E, and the colatitude
// integral is split where the surface crosses the support [a, b] of psi, so each
// piece is analytic and a 64-point Gauss rule reaches rounding level.

#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "spindle/geometry.hpp"
#include "spindle/volume.hpp"

namespace oracle {

using Angular = std::function<double(const spindle::Vec3&)>;

struct RadialBump {
  double a, b;
  int power = 4;
  double operator()(double rho) const {
    if (rho <= a || rho >= b) return 0.0;
    return std::pow(std::sin(std::numbers::pi * (rho - a) / (b - a)), power);
  }
};

inline double gk(const std::function<double(double)>& f, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return boost::math::quadrature::gauss<double, 64>::integrate(f, lo, hi);
}

// Colatitudes where rho(phi) = c for a surface rho = R(r sin phi) monotone in sin phi.
inline void add_crossings(std::vector<double>& cuts, double r, double c, bool apple) {
  // spindle: sin phi = (1 - c^2) / (2 c r); apple: (c^2 - 1) / (2 c r)
  const double s = (apple ? c * c - 1.0 : 1.0 - c * c) / (2.0 * c * r);
  if (s > 0.0 && s < 1.0) {
    cuts.push_back(std::asin(s));
    cuts.push_back(std::numbers::pi - std::asin(s));
  }
}

// int over phi in [0, pi] of g(phi) with breaks where the surface meets |x| = a, b.
inline double split_phi(const std::function<double(double)>& g, double r, const RadialBump& psi, bool apple) {
  std::vector<double> cuts{0.0, 0.5 * std::numbers::pi, std::numbers::pi};
  add_crossings(cuts, r, psi.a, apple);
  add_crossings(cuts, r, psi.b, apple);
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) total += gk(g, cuts[k], cuts[k + 1]);
  return total;
}

inline double azimuthal_sum(const Angular& E, const spindle::Rotation& h, double phi, int n_theta = 24) {
  double s = 0.0;
  for (int k = 0; k < n_theta; ++k) {
    const double t = 2.0 * std::numbers::pi * k / n_theta;
    s += E(h({std::sin(phi) * std::cos(t), std::sin(phi) * std::sin(t), std::cos(phi)}));
  }
  return s * 2.0 * std::numbers::pi / n_theta;
}

/// Spindle (apple) transform of psi(|x|) E(x/|x|).
inline double surface(const RadialBump& psi, const Angular& E, double r, double alpha, double beta, bool apple) {
  const auto h = spindle::Rotation::euler(alpha, beta);
  auto g = [&](double phi) {
    const double s = r * std::sin(phi);
    const double q = std::sqrt(s * s + 1.0);
    const double rho = apple ? q + s : 1.0 / (q + s);
    const double p = psi(rho);
    if (p == 0.0) return 0.0;
    const double arc = rho * std::sqrt((1.0 + r * r) / (1.0 + s * s));
    return p * rho * std::sin(phi) * arc * azimuthal_sum(E, h, phi);
  };
  return split_phi(g, r, psi, apple);
}

/// Interior transform (volume under the spindle) of psi(|x|) E(x/|x|).
inline double interior(const RadialBump& psi, const Angular& E, double r, double alpha, double beta) {
  const auto h = spindle::Rotation::euler(alpha, beta);
  auto Psi = [&](double top) {
    return gk([&](double t) { return t * t * psi(t); }, psi.a, std::min(top, psi.b));
  };
  auto g = [&](double phi) {
    const double s = r * std::sin(phi);
    const double rho = 1.0 / (std::sqrt(s * s + 1.0) + s);
    if (rho <= psi.a) return 0.0;
    return Psi(rho) * std::sin(phi) * azimuthal_sum(E, h, phi);
  };
  return split_phi(g, r, psi, false);
}

}  // namespace oracle
