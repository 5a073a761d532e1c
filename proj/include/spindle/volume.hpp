#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

namespace spindle {

using Vec3 = std::array<double, 3>;

/// Rotation h = U(alpha) V(beta), U about x3 and V about x2.
/// h maps the reference axis e3 to (sin b cos a, sin b sin a, cos b).
struct Rotation {
  std::array<std::array<double, 3>, 3> m{};

  static Rotation euler(double alpha, double beta);
  Vec3 operator()(const Vec3& v) const;
  Vec3 axis() const { return {m[0][2], m[1][2], m[2][2]}; }
};

/// Regular voxel grid of the cube [-extent, extent]^3. Voxel (ix, iy, iz)
/// is stored at ix + n * (iy + n * iz) (x fastest, then y, then z) and its
/// centre is at -extent + (i + 1/2) * 2 * extent / n on each axis.
struct VolumeShape {
  std::size_t n = 0;
  double extent = 1.0;

  std::size_t voxels() const { return n * n * n; }
  double spacing() const { return 2.0 * extent / static_cast<double>(n); }
  double center(std::size_t i) const { return -extent + (static_cast<double>(i) + 0.5) * spacing(); }
  Vec3 center(std::size_t ix, std::size_t iy, std::size_t iz) const { return {center(ix), center(iy), center(iz)}; }
  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const { return ix + n * (iy + n * iz); }
  Vec3 center_of(std::size_t flat) const { return center(flat % n, (flat / n) % n, flat / (n * n)); }
  bool operator==(const VolumeShape&) const = default;
};

/// Up to 8 voxel weights of trilinear interpolation between voxel centres.
/// Neighbours outside the grid are dropped (density is zero outside the cube).
struct TrilinearStencil {
  std::array<std::size_t, 8> index{};
  std::array<double, 8> weight{};
  int count = 0;
};
TrilinearStencil trilinear_stencil(const VolumeShape& shape, const Vec3& p);

struct VoxelVolume {
  VolumeShape shape;
  std::vector<double> values;
  /// label id -> name, present on material label volumes only
  std::map<int, std::string> labels;

  VoxelVolume() = default;
  explicit VoxelVolume(VolumeShape s, double fill = 0.0) : shape(s), values(s.voxels(), fill) {}

  std::size_t n() const { return shape.n; }
  double& at(std::size_t ix, std::size_t iy, std::size_t iz) { return values[shape.index(ix, iy, iz)]; }
  double at(std::size_t ix, std::size_t iy, std::size_t iz) const { return values[shape.index(ix, iy, iz)]; }
  /// Trilinear interpolation of the centre samples.
  double sample(const Vec3& p) const;
};

/// Scan parameters: tube offsets r, axis azimuths alpha and axis colatitudes beta.
struct ScanGrid {
  std::vector<double> r_values;
  std::vector<double> alpha_values;
  std::vector<double> beta_values;

  std::size_t size() const { return r_values.size() * alpha_values.size() * beta_values.size(); }
  /// Flat row index; beta varies fastest, then alpha, then r.
  std::size_t index(std::size_t ir, std::size_t ia, std::size_t ib) const {
    return (ir * alpha_values.size() + ia) * beta_values.size() + ib;
  }
  void validate() const;
  bool operator==(const ScanGrid&) const = default;

  /// Acquisition grid used for the discrete experiments: spindle heights
  /// H_i = (2i + 1) / (2 nr), alpha_i = 2 pi i / nalpha, beta_i = pi (i + 1) / (2 nbeta).
  /// r values are stored ascending.
  static ScanGrid acquisition(std::size_t nr, std::size_t nalpha, std::size_t nbeta);
  /// Grid for harmonic inversion: r_i = delta * z_i for z uniform on [z_lo, z_hi],
  /// axis directions on the Gauss-Legendre sphere grid (n_theta azimuths, n_phi colatitudes).
  static ScanGrid harmonic(double delta, std::size_t nr, double z_lo, double z_hi, std::size_t n_theta,
                           std::size_t n_phi);
};

struct ScatterData {
  ScanGrid grid;
  std::vector<double> values;

  ScatterData() = default;
  explicit ScatterData(ScanGrid g) : grid(std::move(g)), values(grid.size(), 0.0) {}
  double& at(std::size_t ir, std::size_t ia, std::size_t ib) { return values[grid.index(ir, ia, ib)]; }
  double at(std::size_t ir, std::size_t ia, std::size_t ib) const { return values[grid.index(ir, ia, ib)]; }
};

}  // namespace spindle
