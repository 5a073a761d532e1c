#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "spindle/analytic.hpp"
#include "spindle/forward.hpp"

using namespace spindle;

namespace {

constexpr double pi = std::numbers::pi;

// Smooth radial bump on (a, b).
double radial_bump(double rho, double a, double b) {
  if (rho <= a || rho >= b) return 0.0;
  const double s = std::sin(pi * (rho - a) / (b - a));
  return s * s * s * s;
}

// f = psi(|x|) u3^4 on the upper half space; its even part psi u3^4 / 2 is band-limited.
Density upper_density(double a, double b) {
  return [a, b](const Vec3& x) {
    if (x[2] <= 0.0) return 0.0;
    const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double u3 = x[2] / rho;
    return radial_bump(rho, a, b) * u3 * u3 * u3 * u3;
  };
}

// F_l0 / psi for the even part: int (u3^4 / 2) Y_l^0 dOmega = pi int_{-1}^{1} t^4 P~_l(t) dt.
double angular_moment(int l) {
  return pi * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
                  [l](double t) { return std::pow(t, 4) * assoc_legendre_normalized(l, 0, t); }, -1.0, 1.0);
}

}  // namespace

TEST(Analytic, FiniteDifferenceWeightsExactOnCubics) {
  const std::vector<double> x{0.1, 0.17, 0.3, 0.34, 0.5};
  const auto w1 = finite_difference_weights(0.3, x, 1);
  const auto w2 = finite_difference_weights(0.3, x, 2);
  double d1 = 0.0, d2 = 0.0, s0 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = std::pow(x[k], 3) - 2.0 * x[k];
    d1 += w1[k] * f;
    d2 += w2[k] * f;
    s0 += w1[k];
  }
  EXPECT_NEAR(d1, 3.0 * 0.09 - 2.0, 1e-11);
  EXPECT_NEAR(d2, 6.0 * 0.3, 1e-9);
  EXPECT_NEAR(s0, 0.0, 1e-11);
  EXPECT_THROW(finite_difference_weights(0.0, std::vector<double>{0.0, 1.0}, 2), std::invalid_argument);
}

TEST(Analytic, PlanGeometry) {
  AnalyticPlan p;
  p.validate();
  EXPECT_NEAR(p.radius_at(1.0), p.eps1, 1e-13);
  EXPECT_NEAR(p.z_at_radius(p.radius_at(0.37)), 0.37, 1e-13);
  const auto g = p.radial_grid();
  EXPECT_EQ(g.size(), p.n_radial);
  // below the first node the surfaces stay outside eps2
  EXPECT_GT(p.radius_at(g[0]), p.eps2);
  const auto s = p.scan_grid();
  EXPECT_EQ(s.alpha_values.size(), 17u);
  EXPECT_EQ(s.beta_values.size(), 9u);
  EXPECT_NEAR(s.r_values.back(), p.delta() * g.nodes.back(), 1e-15);

  AnalyticPlan a;
  a.kind = TransformKind::apple;
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a.eps1 = 1.2;
  a.eps2 = 1.8;
  a.validate();
  EXPECT_NEAR(a.radius_at(1.0), a.eps2, 1e-13);
  EXPECT_LT(a.radius_at(a.radial_grid()[0]), a.eps1);

  AnalyticPlan bad;
  bad.eps1 = 0.95;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Analytic, RejectsForeignSphereGrid) {
  AnalyticPlan p;
  p.n_radial = 16;
  auto grid = p.scan_grid();
  grid.beta_values[0] += 1e-3;
  EXPECT_THROW(data_to_coefficients(ScatterData(grid), p.lmax), std::invalid_argument);
}

TEST(Analytic, ZeroDataGivesZeroVolume) {
  AnalyticPlan p;
  p.n_radial = 32;
  p.lmax = 4;
  const auto vol = invert_analytic(ScatterData(p.scan_grid()), p, VolumeShape{12, 1.0});
  for (double v : vol.values) EXPECT_EQ(v, 0.0);
}

TEST(Analytic, OddDataRejected) {
  AnalyticPlan p;
  p.n_radial = 16;
  p.lmax = 2;
  ScatterData d(p.scan_grid());
  // a pure l = 1 pattern in the axis direction
  for (std::size_t i = 0; i < d.grid.r_values.size(); ++i)
    for (std::size_t a = 0; a < d.grid.alpha_values.size(); ++a)
      for (std::size_t b = 0; b < d.grid.beta_values.size(); ++b) d.at(i, a, b) = std::cos(d.grid.beta_values[b]);
  EXPECT_THROW(invert_surface_data(d, p), std::invalid_argument);
}

TEST(Analytic, ManufacturedSpindleProfiles) {
  AnalyticPlan p;
  p.lmax = 4;
  p.n_radial = 64;
  p.refine = 8;
  const auto f = upper_density(0.55, 0.85);
  const auto data = forward_quad(TransformKind::spindle, f, p.scan_grid(), SurfaceQuadrature{96, 96, 0});
  const auto prof = invert_surface_data(data, p);
  double err = 0.0, scale = 0.0;
  for (int l = 0; l <= 4; l += 2) {
    const double c = angular_moment(l);
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
      const double ref = c * radial_bump(p.radius_at(prof.grid[i]), 0.55, 0.85);
      err = std::max(err, std::abs(prof.at(l, 0)[i].real() - ref));
      scale = std::max(scale, std::abs(ref));
      EXPECT_LT(std::abs(prof.at(l, 0)[i].imag()), 1e-10);
    }
    for (int m = 1; m <= l; ++m)
      for (const auto& v : prof.at(l, m)) EXPECT_LT(std::abs(v), 1e-3 * scale);
  }
  EXPECT_LT(err, 0.02 * scale);
  // odd channels stay empty
  for (const auto& v : prof.at(1, 0)) EXPECT_EQ(v, complex{});
}

TEST(Analytic, ManufacturedAppleProfiles) {
  AnalyticPlan p;
  p.kind = TransformKind::apple;
  p.eps1 = 1.2;
  p.eps2 = 1.8;
  p.lmax = 4;
  p.n_radial = 64;
  const auto f = upper_density(1.25, 1.75);
  const auto data = forward_quad(TransformKind::apple, f, p.scan_grid(), SurfaceQuadrature{96, 96, 0});
  const auto prof = invert_surface_data(data, p);
  double err = 0.0, scale = 0.0;
  for (int l = 0; l <= 4; l += 2) {
    const double c = angular_moment(l);
    for (std::size_t i = 0; i < prof.grid.size(); ++i) {
      const double ref = c * radial_bump(p.radius_at(prof.grid[i]), 1.25, 1.75);
      err = std::max(err, std::abs(prof.at(l, 0)[i].real() - ref));
      scale = std::max(scale, std::abs(ref));
    }
  }
  EXPECT_LT(err, 0.02 * scale);
}

TEST(Analytic, InteriorReductionMatchesSpindleData) {
  AnalyticPlan p;
  p.lmax = 2;
  p.n_radial = 48;
  auto grid = p.scan_grid();
  const auto f = upper_density(0.55, 0.85);
  const Density ft = [&](const Vec3& x) {
    return 0.5 * (1.0 - (x[0] * x[0] + x[1] * x[1] + x[2] * x[2])) * f(x);
  };
  const SurfaceQuadrature q{64, 96, 48};
  const auto interior = forward_quad(TransformKind::interior, f, grid, q);
  const auto spindle = forward_quad(TransformKind::spindle, ft, grid, q);
  const auto reduced = reduce_interior(interior);
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < reduced.values.size(); ++k) {
    err = std::max(err, std::abs(reduced.values[k] - spindle.values[k]));
    scale = std::max(scale, std::abs(spindle.values[k]));
  }
  EXPECT_GT(scale, 0.0);
  EXPECT_LT(err, 0.02 * scale);

  // unit weights reproduce the unweighted reduction
  const auto weighted = reduce_weighted_interior(interior, [](double, double) { return 1.0; });
  double werr = 0.0;
  for (std::size_t k = 0; k < reduced.values.size(); ++k)
    werr = std::max(werr, std::abs(weighted.values[k] - spindle.values[k]));
  EXPECT_LT(werr, 0.02 * scale);
}

TEST(Analytic, AppleInteriorReductionMatchesAppleData) {
  const auto f = upper_density(1.25, 1.75);
  const Density ft = [&](const Vec3& x) {
    return 0.5 * ((x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) - 1.0) * f(x);
  };
  ScanGrid grid;
  for (int i = 0; i < 48; ++i) grid.r_values.push_back(0.3 + 0.025 * i);
  grid.alpha_values = {0.0, 2.0};
  grid.beta_values = {0.4, 1.3};
  const SurfaceQuadrature q{64, 96, 48};
  const auto interior = forward_quad(TransformKind::apple_interior, f, grid, q);
  const auto apple = forward_quad(TransformKind::apple, ft, grid, q);
  const auto reduced = reduce_apple_interior(interior);
  double err = 0.0, scale = 0.0;
  for (std::size_t k = 0; k < reduced.values.size(); ++k) {
    err = std::max(err, std::abs(reduced.values[k] - apple.values[k]));
    scale = std::max(scale, std::abs(apple.values[k]));
  }
  EXPECT_GT(scale, 0.0);
  EXPECT_LT(err, 0.02 * scale);
}

TEST(Analytic, VolumeSynthesisOfRadialProfile) {
  AnalyticPlan p;
  p.lmax = 2;
  p.n_radial = 64;
  HarmonicProfileSet prof(2, p.radial_grid().nodes);
  for (std::size_t i = 0; i < prof.grid.size(); ++i)
    prof.at(0, 0)[i] = 0.5 * std::sqrt(4.0 * pi) * radial_bump(p.radius_at(prof.grid[i]), 0.55, 0.85);
  const VolumeShape shape{20, 1.0};
  const auto vol = profiles_to_volume(prof, p, shape);
  for (std::size_t v = 0; v < shape.voxels(); ++v) {
    const auto x = shape.center_of(v);
    const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    const double ref = x[2] > 0.0 && rho < p.eps2 ? radial_bump(rho, 0.55, 0.85) : 0.0;
    EXPECT_NEAR(vol.values[v], ref, 2e-3);
  }
}
