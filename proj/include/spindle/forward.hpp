#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include "spindle/geometry.hpp"
#include "spindle/volume.hpp"

namespace spindle {

using Density = std::function<double(const Vec3&)>;

enum class TransformKind { spindle, interior, apple, apple_interior };

std::string to_string(TransformKind kind);
TransformKind parse_transform_kind(std::string_view name);

/// Tensor quadrature over a surface or region of revolution: Gauss-Legendre in
/// colatitude on [0, pi], trapezoid in azimuth, Gauss-Legendre in radius for
/// the volume transforms.
struct SurfaceQuadrature {
  std::size_t n_theta = 180;
  std::size_t n_phi = 90;
  std::size_t n_radial = 64;
};

/// Spindle transform: integral of f over the spindle with offset r whose axis is
/// h e3, h = U(alpha) V(beta), with area element rho^2 sin(phi) sqrt((1+r^2)/(1+r^2 sin^2 phi)).
double spindle_forward_quad(const Density& f, double r, double alpha, double beta, const SurfaceQuadrature& q = {});

/// Generalized transform over the surface rho = curve.rho(r, phi) with weight w(r, phi):
/// integrand w rho sin(phi) sqrt(rho^2 + (d rho / d phi)^2).
double generalized_forward_quad(const Density& f, const SymmetricCurve& curve, const Weighting& weight, double r,
                                double alpha, double beta, const SurfaceQuadrature& q = {});

/// Spindle transform with an extra weight w(r, phi) on the spindle area element.
double weighted_spindle_forward_quad(const Density& f, const Weighting& weight, double r, double alpha, double beta,
                                     const SurfaceQuadrature& q = {});

/// Volume integral over the spindle interior, 0 <= rho <= spindle_rho(r, phi).
double interior_forward_quad(const Density& f, double r, double alpha, double beta, const SurfaceQuadrature& q = {});

/// Apple transform, same area element as the spindle on rho = apple_rho(r, phi).
double apple_forward_quad(const Density& f, double r, double alpha, double beta, const SurfaceQuadrature& q = {});

/// Volume integral over 1 <= rho <= apple_rho(r, phi).
double apple_interior_forward_quad(const Density& f, double r, double alpha, double beta,
                                   const SurfaceQuadrature& q = {});

double forward_quad(TransformKind kind, const Density& f, double r, double alpha, double beta,
                    const SurfaceQuadrature& q = {});

/// Calls visit(x, weight) for every quadrature node of the transform's surface
/// (or solid) at (r, alpha, beta); the weights carry the area or volume element
/// and, for surface transforms, the optional weighting w(r, phi).
void for_each_node(TransformKind kind, double r, double alpha, double beta, const SurfaceQuadrature& q,
                   const Weighting* weight, const std::function<void(const Vec3&, double)>& visit);

/// forward_quad at every node of the scan grid.
ScatterData forward_quad(TransformKind kind, const Density& f, const ScanGrid& grid, const SurfaceQuadrature& q = {});

}  // namespace spindle
