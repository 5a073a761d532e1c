#include "spindle/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spindle {

TorusParams TorusParams::from_offset(double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("torus offset must be >= 0, got " + std::to_string(r));
  return {r, std::sqrt(1.0 + r * r)};
}

double SymmetricCurve::profile(double phi) const { return g(std::sin(phi)); }

double SymmetricCurve::rho(double r, double phi) const { return g(r * std::sin(phi)); }

double SymmetricCurve::rho_prime(double r, double phi) const {
  return g_prime(r * std::sin(phi)) * r * std::cos(phi);
}

SymmetricCurve SymmetricCurve::spindle(double delta) {
  return {[delta](double x) { return std::sqrt(1.0 + delta * delta * x * x) - delta * x; },
          [delta](double x) { return delta * delta * x / std::sqrt(1.0 + delta * delta * x * x) - delta; }};
}

SymmetricCurve SymmetricCurve::apple(double delta) {
  return {[delta](double x) { return std::sqrt(1.0 + delta * delta * x * x) + delta * x; },
          [delta](double x) { return delta * delta * x / std::sqrt(1.0 + delta * delta * x * x) + delta; }};
}

double Weighting::in_volterra_coords(double r, double rho) const {
  const double s = r > 0.0 ? std::min(1.0, rho / r) : 0.0;
  return w(r, std::asin(s));
}

Weighting Weighting::unit() {
  return {[](double, double) { return 1.0; }};
}

double spindle_rho(double r, double phi) {
  const double s = r * std::sin(phi);
  // Same root written without cancellation for large r sin(phi).
  return 1.0 / (std::sqrt(s * s + 1.0) + s);
}

double apple_rho(double r, double phi) {
  const double s = r * std::sin(phi);
  return std::sqrt(s * s + 1.0) + s;
}

double arc_element(double r, double phi, double rho) {
  const double s = std::sin(phi);
  return rho * std::sqrt((1.0 + r * r) / (1.0 + r * r * s * s));
}

double delta_for_epsilon(double eps, bool interior) {
  if (interior) {
    if (!(eps > 0.0 && eps <= 1.0))
      throw std::domain_error("interior radius must lie in (0, 1], got " + std::to_string(eps));
    return (1.0 - eps * eps) / (2.0 * eps);
  }
  if (!(eps >= 1.0)) throw std::domain_error("exterior radius must be >= 1, got " + std::to_string(eps));
  return (eps * eps - 1.0) / (2.0 * eps);
}

double r_for_height(double H) {
  if (!(H > 0.0 && H <= 1.0)) throw std::domain_error("spindle height must lie in (0, 1], got " + std::to_string(H));
  return (1.0 - H * H) / (2.0 * H);
}

}  // namespace spindle
