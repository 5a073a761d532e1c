#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "spindle/forward.hpp"
#include "spindle/geometry.hpp"
#include "spindle/harmonics.hpp"
#include "spindle/volterra.hpp"
#include "spindle/volume.hpp"

namespace spindle {

/// Configuration of the harmonic inversion of spindle or apple data for a density
/// supported in the annulus eps1 <= |x| <= eps2 intersected with x3 > 0.
///
/// The scan offsets are r = delta z with delta chosen so that the surface at
/// z = 1 grazes the far side of the annulus (eps1 for spindles, eps2 for
/// apples). The Volterra variable z runs over [z_lo, 1) with z_lo half the
/// value where the surfaces first reach the annulus, so data vanish there.
struct AnalyticPlan {
  TransformKind kind = TransformKind::spindle;
  double eps1 = 0.5;
  double eps2 = 0.9;
  int lmax = 8;
  std::size_t n_radial = 128;
  /// Odd-degree data energy above this fraction of the total is an error.
  double odd_tolerance = 0.01;
  /// The Volterra equations are solved on a grid `refine` times finer than the
  /// data offsets, with the data interpolated (4th order); high degrees amplify
  /// discretization error strongly, so this matters more than n_radial.
  std::size_t refine = 4;

  void validate() const;
  /// True for apple and apple-interior data.
  bool exterior() const;
  double delta() const;
  SymmetricCurve curve() const;
  /// The scaled transforms are exactly S_{w,p} with w = 1.
  Weighting weight() const { return Weighting::unit(); }
  RadialGrid radial_grid() const;
  /// Offsets delta z_i and the smallest sphere grid resolving lmax (or the given one).
  ScanGrid scan_grid(std::size_t n_theta = 0, std::size_t n_phi = 0) const;
  /// Radius g(z) reached by the scaled curve, and its inverse.
  double radius_at(double z) const;
  double z_at_radius(double rho) const;
};

/// Per-offset harmonic analysis of data sampled on a harmonic scan grid
/// (alpha uniform, beta at Gauss-Legendre colatitudes). Profiles are indexed
/// by the data's r values.
HarmonicProfileSet data_to_coefficients(const ScatterData& data, int lmax);

/// Recovers u_lm(z) = F_lm(g(z)) for even l on z = r / delta by solving one
/// second-kind Volterra equation per channel; odd channels are left zero.
/// Throws std::invalid_argument if the data's odd-degree energy exceeds the
/// plan tolerance (support not confined to the upper half space).
HarmonicProfileSet invert_surface_data(const ScatterData& data, const AnalyticPlan& plan);

/// Radial multiplier m(|x|) with f~ = m f (interior: (1 - |x|^2)/2, apple
/// interior: (|x|^2 - 1)/2, identity for surface transforms).
double tilde_multiplier(TransformKind kind, double radius);

/// Synthesizes 2 sum_{even l} F_lm(|x|) Y_l^m on x3 > 0 (zero below and outside
/// the recovered radii). Profiles are resampled in |x| by monotone cubic
/// interpolation; for interior kinds the tilde multiplier is divided out.
VoxelVolume profiles_to_volume(const HarmonicProfileSet& profiles, const AnalyticPlan& plan, const VolumeShape& shape);

/// Interior data I f on ascending offsets r to spindle data S f~ on the same offsets:
/// S f~(r) = -r sqrt(1 + r^2) dI/dr, derivative by 5-point finite differences.
ScatterData reduce_interior(const ScatterData& interior);

/// Weighted interior data I_w f(r') = int_0^{r'} w1(r', t) G(t) dt sampled at
/// r' = 1 / r: solves G + int L G = (dI_w/dr') / w1(r', r'), L = d_{r'} w1 / w1(r', r'),
/// taking G = 0 below the smallest sampled r', and returns spindle data
/// S_{w2} f~(r) = sqrt(1 + r^2) G(1/r) / r. dw1 may be empty (finite differences).
ScatterData reduce_weighted_interior(const ScatterData& interior, const std::function<double(double, double)>& w1,
                                     const std::function<double(double, double)>& dw1 = {});

/// Apple-interior data to apple data: A f~(r) = r sqrt(1 + r^2) dAI/dr.
ScatterData reduce_apple_interior(const ScatterData& interior);

/// Complete harmonic pipeline for any of the four transforms.
VoxelVolume invert_analytic(const ScatterData& data, const AnalyticPlan& plan, const VolumeShape& shape);

/// Derivative weights at x0 for the given stencil points (Fornberg's algorithm).
std::vector<double> finite_difference_weights(double x0, std::span<const double> points, int order);

}  // namespace spindle
