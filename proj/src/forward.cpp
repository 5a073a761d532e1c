#include "spindle/forward.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "spindle/quadrature.hpp"

namespace spindle {

std::string to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::spindle: return "spindle";
    case TransformKind::interior: return "interior";
    case TransformKind::apple: return "apple";
    case TransformKind::apple_interior: return "apple-interior";
  }
  return "unknown";
}

TransformKind parse_transform_kind(std::string_view name) {
  if (name == "spindle") return TransformKind::spindle;
  if (name == "interior") return TransformKind::interior;
  if (name == "apple") return TransformKind::apple;
  if (name == "apple-interior") return TransformKind::apple_interior;
  throw std::invalid_argument("unknown transform '" + std::string(name) + "'");
}

namespace {

struct AzimuthTable {
  std::vector<double> c, s;
  double dtheta;
  explicit AzimuthTable(std::size_t n) : c(n), s(n), dtheta(2.0 * std::numbers::pi / static_cast<double>(n)) {
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = std::cos(dtheta * k);
      s[k] = std::sin(dtheta * k);
    }
  }
};

// Calls visit(point, weight) for every node of the (phi, theta) lattice on the
// surface rho = rho_of(phi), weight = area_of(phi, rho) times the tensor rule.
template <class RhoFn, class AreaFn, class Visit>
void visit_surface(double alpha, double beta, const SurfaceQuadrature& q, RhoFn rho_of, AreaFn area_of,
                   Visit&& visit) {
  const auto h = Rotation::euler(alpha, beta);
  const auto rule = gauss_legendre(q.n_phi, 0.0, std::numbers::pi);
  const AzimuthTable az(q.n_theta);
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double phi = rule.nodes[j];
    const double sp = std::sin(phi), cp = std::cos(phi);
    const double rho = rho_of(phi);
    const double w = rule.weights[j] * area_of(phi, rho) * az.dtheta;
    if (w == 0.0) continue;
    for (std::size_t k = 0; k < q.n_theta; ++k) visit(h({rho * sp * az.c[k], rho * sp * az.s[k], rho * cp}), w);
  }
}

// Same for the solid lo_of(phi) <= rho <= hi_of(phi), volume element rho^2 sin(phi).
template <class LoFn, class HiFn, class Visit>
void visit_region(double alpha, double beta, const SurfaceQuadrature& q, LoFn lo_of, HiFn hi_of, Visit&& visit) {
  const auto h = Rotation::euler(alpha, beta);
  const auto rule = gauss_legendre(q.n_phi, 0.0, std::numbers::pi);
  const auto radial = gauss_legendre(q.n_radial, 0.0, 1.0);
  const AzimuthTable az(q.n_theta);
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const double phi = rule.nodes[j];
    const double sp = std::sin(phi), cp = std::cos(phi);
    const double lo = lo_of(phi), len = hi_of(phi) - lo;
    if (len <= 0.0) continue;
    for (std::size_t i = 0; i < radial.size(); ++i) {
      const double rho = lo + len * radial.nodes[i];
      const double w = rule.weights[j] * sp * radial.weights[i] * len * rho * rho * az.dtheta;
      for (std::size_t k = 0; k < q.n_theta; ++k) visit(h({rho * sp * az.c[k], rho * sp * az.s[k], rho * cp}), w);
    }
  }
}

template <class Visit>
void visit_kind(TransformKind kind, double r, double alpha, double beta, const SurfaceQuadrature& q,
                const Weighting* weight, Visit&& visit) {
  auto wt = [&](double phi) { return weight ? (*weight)(r, phi) : 1.0; };
  switch (kind) {
    case TransformKind::spindle:
      return visit_surface(
          alpha, beta, q, [r](double phi) { return spindle_rho(r, phi); },
          [&](double phi, double rho) { return wt(phi) * rho * std::sin(phi) * arc_element(r, phi, rho); }, visit);
    case TransformKind::apple:
      return visit_surface(
          alpha, beta, q, [r](double phi) { return apple_rho(r, phi); },
          [&](double phi, double rho) { return wt(phi) * rho * std::sin(phi) * arc_element(r, phi, rho); }, visit);
    case TransformKind::interior:
      return visit_region(
          alpha, beta, q, [](double) { return 0.0; }, [r](double phi) { return spindle_rho(r, phi); },
          [&](const Vec3& x, double w) { visit(x, w); });
    case TransformKind::apple_interior:
      return visit_region(
          alpha, beta, q, [](double) { return 1.0; }, [r](double phi) { return apple_rho(r, phi); },
          [&](const Vec3& x, double w) { visit(x, w); });
  }
  throw std::invalid_argument("unknown transform");
}

template <class RhoFn, class AreaFn>
double surface_integral(const Density& f, double alpha, double beta, const SurfaceQuadrature& q, RhoFn rho_of,
                        AreaFn area_of) {
  double total = 0.0;
  visit_surface(alpha, beta, q, rho_of, area_of, [&](const Vec3& x, double w) { total += w * f(x); });
  return total;
}

template <class LoFn, class HiFn>
double region_integral(const Density& f, double alpha, double beta, const SurfaceQuadrature& q, LoFn lo_of,
                       HiFn hi_of) {
  double total = 0.0;
  visit_region(alpha, beta, q, lo_of, hi_of, [&](const Vec3& x, double w) { total += w * f(x); });
  return total;
}

}  // namespace

double spindle_forward_quad(const Density& f, double r, double alpha, double beta, const SurfaceQuadrature& q) {
  return surface_integral(
      f, alpha, beta, q, [r](double phi) { return spindle_rho(r, phi); },
      [r](double phi, double rho) { return rho * std::sin(phi) * arc_element(r, phi, rho); });
}

double generalized_forward_quad(const Density& f, const SymmetricCurve& curve, const Weighting& weight, double r,
                                double alpha, double beta, const SurfaceQuadrature& q) {
  return surface_integral(
      f, alpha, beta, q,
      [&](double phi) {
        const double rho = curve.rho(r, phi);
        if (!(rho > 0.0)) throw std::domain_error("symmetric curve must stay positive");
        return rho;
      },
      [&](double phi, double rho) {
        const double d = curve.rho_prime(r, phi);
        return weight(r, phi) * rho * std::sin(phi) * std::sqrt(rho * rho + d * d);
      });
}

double weighted_spindle_forward_quad(const Density& f, const Weighting& weight, double r, double alpha, double beta,
                                     const SurfaceQuadrature& q) {
  return surface_integral(
      f, alpha, beta, q, [r](double phi) { return spindle_rho(r, phi); },
      [&](double phi, double rho) { return weight(r, phi) * rho * std::sin(phi) * arc_element(r, phi, rho); });
}

double interior_forward_quad(const Density& f, double r, double alpha, double beta, const SurfaceQuadrature& q) {
  return region_integral(
      f, alpha, beta, q, [](double) { return 0.0; }, [r](double phi) { return spindle_rho(r, phi); });
}

double apple_forward_quad(const Density& f, double r, double alpha, double beta, const SurfaceQuadrature& q) {
  return surface_integral(
      f, alpha, beta, q, [r](double phi) { return apple_rho(r, phi); },
      [r](double phi, double rho) { return rho * std::sin(phi) * arc_element(r, phi, rho); });
}

double apple_interior_forward_quad(const Density& f, double r, double alpha, double beta,
                                   const SurfaceQuadrature& q) {
  return region_integral(
      f, alpha, beta, q, [](double) { return 1.0; }, [r](double phi) { return apple_rho(r, phi); });
}

double forward_quad(TransformKind kind, const Density& f, double r, double alpha, double beta,
                    const SurfaceQuadrature& q) {
  switch (kind) {
    case TransformKind::spindle: return spindle_forward_quad(f, r, alpha, beta, q);
    case TransformKind::interior: return interior_forward_quad(f, r, alpha, beta, q);
    case TransformKind::apple: return apple_forward_quad(f, r, alpha, beta, q);
    case TransformKind::apple_interior: return apple_interior_forward_quad(f, r, alpha, beta, q);
  }
  throw std::invalid_argument("unknown transform");
}

void for_each_node(TransformKind kind, double r, double alpha, double beta, const SurfaceQuadrature& q,
                   const Weighting* weight, const std::function<void(const Vec3&, double)>& visit) {
  if (weight && (kind == TransformKind::interior || kind == TransformKind::apple_interior))
    throw std::invalid_argument("weighting applies to surface transforms only");
  visit_kind(kind, r, alpha, beta, q, weight, visit);
}

ScatterData forward_quad(TransformKind kind, const Density& f, const ScanGrid& grid, const SurfaceQuadrature& q) {
  grid.validate();
  ScatterData out(grid);
  for (std::size_t ir = 0; ir < grid.r_values.size(); ++ir)
    for (std::size_t ia = 0; ia < grid.alpha_values.size(); ++ia)
      for (std::size_t ib = 0; ib < grid.beta_values.size(); ++ib)
        out.at(ir, ia, ib) =
            forward_quad(kind, f, grid.r_values[ir], grid.alpha_values[ia], grid.beta_values[ib], q);
  return out;
}

}  // namespace spindle
