#include "spindle/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "spindle/geometry.hpp"
#include "spindle/harmonics.hpp"

namespace spindle {

Rotation Rotation::euler(double alpha, double beta) {
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  Rotation h;
  // U(alpha) * V(beta)
  h.m = {{{ca * cb, -sa, ca * sb}, {sa * cb, ca, sa * sb}, {-sb, 0.0, cb}}};
  return h;
}

Vec3 Rotation::operator()(const Vec3& v) const {
  return {m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2], m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
          m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2]};
}

TrilinearStencil trilinear_stencil(const VolumeShape& shape, const Vec3& p) {
  TrilinearStencil st;
  const double h = shape.spacing();
  const auto n = static_cast<long>(shape.n);
  std::array<long, 3> i0{};
  std::array<double, 3> t{};
  for (int a = 0; a < 3; ++a) {
    const double u = (p[a] + shape.extent) / h - 0.5;
    const double fl = std::floor(u);
    if (fl < -1.0 || fl > static_cast<double>(n - 1)) return st;
    i0[a] = static_cast<long>(fl);
    t[a] = u - fl;
  }
  for (int c = 0; c < 8; ++c) {
    const long ix = i0[0] + (c & 1), iy = i0[1] + ((c >> 1) & 1), iz = i0[2] + ((c >> 2) & 1);
    if (ix < 0 || iy < 0 || iz < 0 || ix >= n || iy >= n || iz >= n) continue;
    const double w = ((c & 1) ? t[0] : 1.0 - t[0]) * (((c >> 1) & 1) ? t[1] : 1.0 - t[1]) *
                     (((c >> 2) & 1) ? t[2] : 1.0 - t[2]);
    if (w == 0.0) continue;
    st.index[st.count] = shape.index(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy),
                                     static_cast<std::size_t>(iz));
    st.weight[st.count] = w;
    ++st.count;
  }
  return st;
}

double VoxelVolume::sample(const Vec3& p) const {
  const auto st = trilinear_stencil(shape, p);
  double v = 0.0;
  for (int k = 0; k < st.count; ++k) v += st.weight[k] * values[st.index[k]];
  return v;
}

void ScanGrid::validate() const {
  if (r_values.empty() || alpha_values.empty() || beta_values.empty()) throw std::invalid_argument("empty scan grid");
  for (std::size_t i = 0; i < r_values.size(); ++i) {
    if (!(r_values[i] >= 0.0)) throw std::invalid_argument("scan offsets must be >= 0");
    if (i > 0 && !(r_values[i] > r_values[i - 1])) throw std::invalid_argument("scan offsets must be ascending");
  }
  for (double a : alpha_values)
    if (!(a >= 0.0 && a < 2.0 * std::numbers::pi)) throw std::invalid_argument("alpha must lie in [0, 2 pi)");
  for (double b : beta_values)
    if (!(b > 0.0 && b < std::numbers::pi)) throw std::invalid_argument("beta must lie in (0, pi)");
}

ScanGrid ScanGrid::acquisition(std::size_t nr, std::size_t nalpha, std::size_t nbeta) {
  if (nr == 0 || nalpha == 0 || nbeta == 0) throw std::invalid_argument("empty scan grid");
  ScanGrid g;
  for (std::size_t i = 0; i < nr; ++i) {
    const double H = (2.0 * static_cast<double>(i) + 1.0) / (2.0 * static_cast<double>(nr));
    g.r_values.push_back(r_for_height(H));
  }
  std::sort(g.r_values.begin(), g.r_values.end());
  for (std::size_t i = 0; i < nalpha; ++i) g.alpha_values.push_back(2.0 * std::numbers::pi * i / nalpha);
  for (std::size_t i = 0; i < nbeta; ++i) g.beta_values.push_back(std::numbers::pi / (2.0 * nbeta) * (i + 1.0));
  return g;
}

ScanGrid ScanGrid::harmonic(double delta, std::size_t nr, double z_lo, double z_hi, std::size_t n_theta,
                            std::size_t n_phi) {
  if (nr < 2) throw std::invalid_argument("harmonic scan grid needs at least two offsets");
  if (!(delta > 0.0) || !(z_lo >= 0.0) || !(z_hi > z_lo)) throw std::invalid_argument("invalid harmonic scan range");
  ScanGrid g;
  for (std::size_t i = 0; i < nr; ++i)
    g.r_values.push_back(delta * (z_lo + (z_hi - z_lo) * static_cast<double>(i) / static_cast<double>(nr - 1)));
  const auto sphere = SphereGrid::make(n_theta, n_phi);
  g.alpha_values = sphere.theta;
  g.beta_values = sphere.phi;
  return g;
}

}  // namespace spindle
