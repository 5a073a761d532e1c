#pragma once

#include <functional>

namespace spindle {

/// Spindle torus with tube centre offset r and tube radius R = sqrt(1 + r^2),
/// so that its tips sit on the unit sphere at the poles of the rotation axis.
struct TorusParams {
  double r = 0.0;
  double R = 1.0;

  static TorusParams from_offset(double r);
  /// Height of the spindle apex above the source/detector chord.
  double height() const { return R - r; }
};

/// Surface of revolution rho(r, phi) = p(asin(r sin phi)) generated by a
/// colatitude profile p on [0, pi/2]. g(x) = p(asin x) is the same curve
/// expressed in the Volterra variable x = r sin phi.
struct SymmetricCurve {
  std::function<double(double)> g;
  std::function<double(double)> g_prime;

  double profile(double phi) const;
  double rho(double r, double phi) const;
  /// d rho / d phi at fixed r.
  double rho_prime(double r, double phi) const;

  /// p(phi) = sqrt(1 + d^2 sin^2 phi) - d sin phi; reproduces the spindle at offset d*r.
  static SymmetricCurve spindle(double delta);
  /// p(phi) = sqrt(1 + d^2 sin^2 phi) + d sin phi; reproduces the apple at offset d*r.
  static SymmetricCurve apple(double delta);
};

/// Weighting w(r, phi) of the generalized transform. W(r, rho) = w(r, asin(rho/r))
/// is the same weight in Volterra coordinates.
struct Weighting {
  std::function<double(double, double)> w;

  double operator()(double r, double phi) const { return w(r, phi); }
  double in_volterra_coords(double r, double rho) const;

  static Weighting unit();
};

double spindle_rho(double r, double phi);
double apple_rho(double r, double phi);

/// Arc length element dv/dphi of the meridian arc through (rho, phi).
double arc_element(double r, double phi, double rho);

/// Offset delta whose spindle (interior) or apple (exterior) equator sits at radius eps.
double delta_for_epsilon(double eps, bool interior);

/// Offset r of the spindle whose apex height above the chord is H (H = R - r).
double r_for_height(double H);

}  // namespace spindle
