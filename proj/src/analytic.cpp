#include "spindle/analytic.hpp"

#include <algorithm>
#include <cmath>
// Boost 1.74 pchip calls isnan unqualified
using std::isnan;
#include <boost/math/interpolators/barycentric_rational.hpp>
#include <boost/math/interpolators/pchip.hpp>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spindle {

namespace {

bool is_exterior(TransformKind k) { return k == TransformKind::apple || k == TransformKind::apple_interior; }
bool is_solid(TransformKind k) { return k == TransformKind::interior || k == TransformKind::apple_interior; }

SphereGrid sphere_of(const ScanGrid& grid) {
  const auto sg = SphereGrid::make(grid.alpha_values.size(), grid.beta_values.size());
  for (std::size_t k = 0; k < sg.n_theta; ++k)
    if (std::abs(sg.theta[k] - grid.alpha_values[k]) > 1e-12)
      throw std::invalid_argument("data azimuths are not the uniform harmonic grid");
  for (std::size_t j = 0; j < sg.n_phi; ++j)
    if (std::abs(sg.phi[j] - grid.beta_values[j]) > 1e-12)
      throw std::invalid_argument("data colatitudes are not the Gauss-Legendre harmonic grid");
  return sg;
}

// Derivative along r of every (alpha, beta) column by 5-point stencils.
std::vector<double> derivative_in_r(const ScatterData& data, std::span<const double> r) {
  const std::size_t nr = r.size(), cols = data.values.size() / nr;
  if (nr < 5) throw std::invalid_argument("numerical differentiation needs at least 5 offsets");
  std::vector<double> out(data.values.size(), 0.0);
  for (std::size_t i = 0; i < nr; ++i) {
    const std::size_t lo = std::min(i < 2 ? 0 : i - 2, nr - 5);
    const auto w = finite_difference_weights(r[i], r.subspan(lo, 5), 1);
    for (std::size_t c = 0; c < cols; ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += w[k] * data.values[(lo + k) * cols + c];
      out[i * cols + c] = s;
    }
  }
  return out;
}

void require_ascending_offsets(const ScatterData& d) {
  d.grid.validate();
  if (d.values.size() != d.grid.size()) throw std::invalid_argument("data payload does not match its grid");
}

}  // namespace

std::vector<double> finite_difference_weights(double x0, std::span<const double> x, int order) {
  const int n = static_cast<int>(x.size()) - 1;
  if (order < 0 || order > n) throw std::invalid_argument("stencil too small for the derivative order");
  // c[j][k]: weight of point j for the k-th derivative
  std::vector<std::vector<double>> c(n + 1, std::vector<double>(order + 1, 0.0));
  double c1 = 1.0, c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (int i = 1; i <= n; ++i) {
    const int mn = std::min(i, order);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (int j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n + 1);
  for (int j = 0; j <= n; ++j) w[j] = c[j][order];
  return w;
}

void AnalyticPlan::validate() const {
  if (lmax < 0) throw std::invalid_argument("lmax must be >= 0");
  if (n_radial < 8) throw std::invalid_argument("analytic inversion needs at least 8 radial nodes");
  if (exterior()) {
    if (!(1.0 < eps1 && eps1 < eps2))
      throw std::invalid_argument("exterior support needs 1 < eps1 < eps2");
  } else if (!(0.0 < eps1 && eps1 < eps2 && eps2 < 1.0)) {
    throw std::invalid_argument("interior support needs 0 < eps1 < eps2 < 1");
  }
}

bool AnalyticPlan::exterior() const { return is_exterior(kind); }

double AnalyticPlan::delta() const { return exterior() ? delta_for_epsilon(eps2, false) : delta_for_epsilon(eps1, true); }

SymmetricCurve AnalyticPlan::curve() const {
  return exterior() ? SymmetricCurve::apple(delta()) : SymmetricCurve::spindle(delta());
}

double AnalyticPlan::radius_at(double z) const { return curve().g(z); }

double AnalyticPlan::z_at_radius(double rho) const { return std::abs(1.0 - rho * rho) / (2.0 * rho * delta()); }

RadialGrid AnalyticPlan::radial_grid() const {
  validate();
  const double z_lo = 0.5 * z_at_radius(exterior() ? eps1 : eps2);
  std::vector<double> z(n_radial);
  for (std::size_t i = 0; i < n_radial; ++i) z[i] = z_lo + (1.0 - z_lo) * static_cast<double>(i) / n_radial;
  return RadialGrid(std::move(z));
}

ScanGrid AnalyticPlan::scan_grid(std::size_t n_theta, std::size_t n_phi) const {
  const auto z = radial_grid();
  const auto sg = n_theta && n_phi ? SphereGrid::make(n_theta, n_phi) : SphereGrid::for_band_limit(lmax);
  if (!sg.resolves(lmax)) throw std::invalid_argument("sphere grid under-samples the band limit");
  ScanGrid g;
  for (double zi : z.nodes) g.r_values.push_back(delta() * zi);
  g.alpha_values = sg.theta;
  g.beta_values = sg.phi;
  return g;
}

HarmonicProfileSet data_to_coefficients(const ScatterData& data, int lmax) {
  require_ascending_offsets(data);
  const auto sg = sphere_of(data.grid);
  HarmonicProfileSet out(lmax, data.grid.r_values);
  const std::size_t per = sg.size();
  for (std::size_t i = 0; i < data.grid.r_values.size(); ++i) {
    const auto c = analyze(std::span(data.values).subspan(i * per, per), sg, lmax);
    for (std::size_t k = 0; k < c.values().size(); ++k) out.profiles[k][i] = c.values()[k];
  }
  return out;
}

HarmonicProfileSet invert_surface_data(const ScatterData& data, const AnalyticPlan& plan) {
  if (is_solid(plan.kind)) throw std::invalid_argument("reduce interior data before inverting");
  plan.validate();
  const auto coeffs = data_to_coefficients(data, plan.lmax);
  const double delta = plan.delta();
  std::vector<double> z;
  for (double r : data.grid.r_values) z.push_back(r / delta);
  const RadialGrid grid(z);

  double odd = 0.0, total = 0.0;
  for (int l = 0; l <= plan.lmax; ++l)
    for (int m = -l; m <= l; ++m)
      for (const auto& c : coeffs.at(l, m)) {
        total += std::norm(c);
        if (l % 2) odd += std::norm(c);
      }
  if (total > 0.0 && odd > plan.odd_tolerance * total)
    throw std::invalid_argument("odd-degree data energy " + std::to_string(odd / total) +
                                " exceeds tolerance; density not confined to x3 > 0");

  HarmonicProfileSet out(plan.lmax, z);
  if (total == 0.0) return out;
  // fine solve grid: every data interval split into `refine` pieces
  const std::size_t rf = std::max<std::size_t>(1, plan.refine);
  std::vector<double> zf;
  for (std::size_t i = 0; i + 1 < z.size(); ++i)
    for (std::size_t k = 0; k < rf; ++k) zf.push_back(z[i] + (z[i + 1] - z[i]) * static_cast<double>(k) / rf);
  zf.push_back(z.back());
  const RadialGrid fine(zf);
  auto to_fine = [&](std::vector<double> y) {
    if (rf == 1) return y;
    const boost::math::barycentric_rational<double> f(z.begin(), z.end(), y.begin(), 3);
    std::vector<double> out(zf.size());
    for (std::size_t k = 0; k < zf.size(); ++k) out[k] = k % rf == 0 ? y[k / rf] : f(zf[k]);
    return out;
  };
  const auto curve = plan.curve();
  const auto weight = plan.weight();
  const std::size_t n = grid.size();
  std::vector<double> re(n), im(n);
  for (int l = 0; l <= plan.lmax; l += 2) {
    const VolterraKernel kernel(l, curve, weight);
    const auto H = second_kind_kernel(kernel, fine);
    for (int m = 0; m <= l; ++m) {
      const auto& s = coeffs.at(l, m);
      for (std::size_t i = 0; i < n; ++i) {
        re[i] = s[i].real() / (4.0 * std::numbers::pi);
        im[i] = s[i].imag() / (4.0 * std::numbers::pi);
      }
      const auto ur = solve_second_kind(second_kind_rhs(kernel, to_fine(re), fine), H, fine);
      const auto ui = solve_second_kind(second_kind_rhs(kernel, to_fine(im), fine), H, fine);
      auto& p = out.at(l, m);
      for (std::size_t i = 0; i < n; ++i) p[i] = {ur[i * rf], ui[i * rf]};
      if (m > 0) {
        auto& q = out.at(l, -m);
        for (std::size_t i = 0; i < n; ++i) q[i] = (m % 2 ? -1.0 : 1.0) * std::conj(p[i]);
      }
    }
  }
  return out;
}

double tilde_multiplier(TransformKind kind, double radius) {
  switch (kind) {
    case TransformKind::interior: return 0.5 * (1.0 - radius * radius);
    case TransformKind::apple_interior: return 0.5 * (radius * radius - 1.0);
    default: return 1.0;
  }
}

VoxelVolume profiles_to_volume(const HarmonicProfileSet& profiles, const AnalyticPlan& plan, const VolumeShape& shape) {
  const int lmax = profiles.lmax;
  const std::size_t n = profiles.grid.size();
  if (n < 4) throw std::invalid_argument("profile resampling needs at least 4 radial samples");
  // radii g(z_i), ascending
  std::vector<std::size_t> order(n);
  std::vector<double> rad(n);
  for (std::size_t i = 0; i < n; ++i) rad[i] = plan.radius_at(profiles.grid[i]);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rad[a] < rad[b]; });
  std::vector<double> xs(n);
  for (std::size_t i = 0; i < n; ++i) xs[i] = rad[order[i]];
  for (std::size_t i = 1; i < n; ++i)
    if (!(xs[i] > xs[i - 1])) throw std::invalid_argument("radius map g is not strictly monotone on the grid");

  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  struct Channel {
    int l, m;
    Pchip re, im;
  };
  std::vector<Channel> channels;
  for (int l = 0; l <= lmax; l += 2)
    for (int m = 0; m <= l; ++m) {
      std::vector<double> yr(n), yi(n);
      const auto& p = profiles.at(l, m);
      for (std::size_t i = 0; i < n; ++i) {
        yr[i] = p[order[i]].real();
        yi[i] = p[order[i]].imag();
      }
      channels.push_back({l, m, Pchip(std::vector<double>(xs), std::move(yr)), Pchip(std::vector<double>(xs), std::move(yi))});
    }

  VoxelVolume vol(shape);
  for (std::size_t v = 0; v < shape.voxels(); ++v) {
    const Vec3 x = shape.center_of(v);
    if (!(x[2] > 0.0)) continue;
    const double rho = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    if (rho < xs.front() || rho > xs.back()) continue;
    const auto plm = assoc_legendre_table(lmax, x[2] / rho);
    const double theta = std::atan2(x[1], x[0]);
    double sum = 0.0;
    for (auto& c : channels) {
      const double p = plm[legendre_table_index(c.l, c.m)];
      if (c.m == 0) {
        sum += c.re(rho) * p;
      } else {
        sum += 2.0 * (complex(c.re(rho), c.im(rho)) * std::polar(1.0, c.m * theta)).real() * p;
      }
    }
    vol.values[v] = 2.0 * sum / tilde_multiplier(plan.kind, rho);
  }
  return vol;
}

ScatterData reduce_interior(const ScatterData& interior) {
  require_ascending_offsets(interior);
  const auto& r = interior.grid.r_values;
  auto d = derivative_in_r(interior, r);
  ScatterData out(interior.grid);
  const std::size_t cols = interior.values.size() / r.size();
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c)
      out.values[i * cols + c] = -r[i] * std::sqrt(1.0 + r[i] * r[i]) * d[i * cols + c];
  return out;
}

ScatterData reduce_apple_interior(const ScatterData& interior) {
  require_ascending_offsets(interior);
  const auto& r = interior.grid.r_values;
  auto d = derivative_in_r(interior, r);
  ScatterData out(interior.grid);
  const std::size_t cols = interior.values.size() / r.size();
  for (std::size_t i = 0; i < r.size(); ++i)
    for (std::size_t c = 0; c < cols; ++c)
      out.values[i * cols + c] = r[i] * std::sqrt(1.0 + r[i] * r[i]) * d[i * cols + c];
  return out;
}

ScatterData reduce_weighted_interior(const ScatterData& interior, const std::function<double(double, double)>& w1,
                                     const std::function<double(double, double)>& dw1) {
  require_ascending_offsets(interior);
  const auto& r = interior.grid.r_values;
  const std::size_t nr = r.size(), cols = interior.values.size() / nr;
  if (r.front() <= 0.0) throw std::invalid_argument("weighted interior data need offsets r > 0");
  // r' = 1 / r ascending, with the data reordered to match
  std::vector<double> rp(nr);
  ScatterData flipped = interior;
  for (std::size_t k = 0; k < nr; ++k) {
    rp[k] = 1.0 / r[nr - 1 - k];
    std::copy_n(interior.values.begin() + (nr - 1 - k) * cols, cols, flipped.values.begin() + k * cols);
  }
  const auto d = derivative_in_r(flipped, rp);
  auto dw = [&](double a, double t) {
    if (dw1) return dw1(a, t);
    const double h = 1e-6 * std::max(1.0, a);
    return (w1(a + h, t) - w1(a - h, t)) / (2.0 * h);
  };
  std::vector<double> diag(nr);
  for (std::size_t k = 0; k < nr; ++k) {
    diag[k] = w1(rp[k], rp[k]);
    if (diag[k] == 0.0 || !std::isfinite(diag[k]))
      throw std::domain_error("w1(r', r') vanishes at r' = " + std::to_string(rp[k]));
  }
  ScatterData out(interior.grid);
  std::vector<double> G(nr);
  for (std::size_t c = 0; c < cols; ++c) {
    // G_k (1 + w_kk L_kk) = v_k - sum_{j<k} w_j L_kj G_j, trapezoid on [r'_0, r'_k]
    for (std::size_t k = 0; k < nr; ++k) {
      double s = d[k * cols + c] / diag[k];
      double wk = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double h = rp[j + 1] - rp[j];
        const double wj = 0.5 * h + (j > 0 ? 0.5 * (rp[j] - rp[j - 1]) : 0.0);
        s -= wj * dw(rp[k], rp[j]) / diag[k] * G[j];
      }
      if (k > 0) wk = 0.5 * (rp[k] - rp[k - 1]);
      G[k] = s / (1.0 + wk * dw(rp[k], rp[k]) / diag[k]);
    }
    for (std::size_t k = 0; k < nr; ++k) {
      const double rr = 1.0 / rp[k];
      out.values[(nr - 1 - k) * cols + c] = std::sqrt(1.0 + rr * rr) / rr * G[k];
    }
  }
  return out;
}

VoxelVolume invert_analytic(const ScatterData& data, const AnalyticPlan& plan, const VolumeShape& shape) {
  AnalyticPlan surface = plan;
  HarmonicProfileSet profiles;
  switch (plan.kind) {
    case TransformKind::interior:
      surface.kind = TransformKind::spindle;
      profiles = invert_surface_data(reduce_interior(data), surface);
      break;
    case TransformKind::apple_interior:
      surface.kind = TransformKind::apple;
      profiles = invert_surface_data(reduce_apple_interior(data), surface);
      break;
    default:
      profiles = invert_surface_data(data, surface);
  }
  return profiles_to_volume(profiles, plan, shape);
}

}  // namespace spindle
