#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spindle/sparse.hpp"
#include "spindle/volume.hpp"

namespace spindle {

/// Standard normal samples by the Box-Muller transform on std::mt19937_64,
/// using 53-bit uniforms so the stream is identical on every platform.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
  double next();

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// b + eps * G * |b| / sqrt(n) with G standard normal.
std::vector<double> add_noise(std::span<const double> b, double eps, std::uint64_t seed);

struct CglsConfig {
  double lambda = 0.0;  // minimizes |A x - b|^2 + lambda^2 |x|^2
  int max_iters = 2000;
  double rel_tol = 0.0;  // stop once |A^T r - lambda^2 x| <= rel_tol |A^T b|
};

struct CglsTraceRow {
  int iter;
  double residual;       // sqrt(|A x - b|^2 + lambda^2 |x|^2)
  double solution_norm;  // |x|
};

struct CglsResult {
  std::vector<double> x;
  std::vector<CglsTraceRow> trace;
  int iterations = 0;
};

/// Conjugate gradients on the normal equations of the Tikhonov system
/// [A; lambda I] x = [b; 0]. on_iterate, if given, sees every iterate.
/// Besides max_iters and rel_tol, iteration stops once the normal-equation
/// residual falls to 1e-12 of its start, past which steps only lose conjugacy.
CglsResult cgls_solve(const LinearOperator& A, std::span<const double> b, const CglsConfig& cfg,
                      const std::function<void(int, std::span<const double>)>& on_iterate = {});

void write_trace_csv(const std::string& path, const std::vector<CglsTraceRow>& trace);

struct PostprocessOptions {
  /// Add each lower-half voxel onto its antipode and zero it. The spindle
  /// surfaces are symmetric under x -> -x, so data only determine f(x) + f(-x).
  bool fold = false;
  bool clip_negative = false;
  bool zero_lower = false;
};

/// Applies fold, then clipping, then lower-half zeroing (voxel centres with x3 < 0).
VoxelVolume postprocess(std::span<const double> x, const VolumeShape& shape, const PostprocessOptions& opts);

/// |a - b| / |b|.
double relative_l2_error(std::span<const double> a, std::span<const double> b);

}  // namespace spindle
