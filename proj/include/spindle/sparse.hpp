#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spindle/forward.hpp"
#include "spindle/volume.hpp"

namespace spindle {

/// y = A x and x = A^T y for least-squares solvers.
class LinearOperator {
 public:
  virtual ~LinearOperator() = default;
  virtual std::size_t rows() const = 0;
  virtual std::size_t cols() const = 0;
  virtual void apply(std::span<const double> x, std::span<double> y) const = 0;
  virtual void apply_adjoint(std::span<const double> y, std::span<double> x) const = 0;

  std::vector<double> apply(std::span<const double> x) const;
  std::vector<double> apply_adjoint(std::span<const double> y) const;
};

struct Triplet {
  std::uint64_t row;
  std::uint64_t col;
  double value;
};

/// Compressed-row matrix with the scan grid and voxel grid it was built for.
/// apply is parallel over row blocks; apply_adjoint scatters rows in order, so
/// both are bit-reproducible regardless of the thread count.
class SparseOperator : public LinearOperator {
 public:
  SparseOperator() = default;
  /// Duplicate (row, col) entries are summed; entries are stored sorted by (row, col).
  static SparseOperator from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries);

  std::size_t rows() const override { return row_ptr_.empty() ? 0 : row_ptr_.size() - 1; }
  std::size_t cols() const override { return cols_; }
  std::size_t nnz() const { return values_.size(); }
  using LinearOperator::apply;
  using LinearOperator::apply_adjoint;
  void apply(std::span<const double> x, std::span<double> y) const override;
  void apply_adjoint(std::span<const double> y, std::span<double> x) const override;

  std::vector<Triplet> triplets() const;
  double row_sum(std::size_t row) const;
  /// Entries of one row as (col, value) spans.
  std::span<const std::uint32_t> row_cols(std::size_t row) const;
  std::span<const double> row_values(std::size_t row) const;

  TransformKind kind = TransformKind::spindle;
  ScanGrid grid;
  VolumeShape shape;

 private:
  friend class SparseBuilder;
  std::size_t cols_ = 0;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> col_;
  std::vector<double> values_;
};

struct MatrixOptions {
  /// Zero sizes select the automatic density: n_theta = max(64, 2 ceil(3.6 n)),
  /// n_phi = n_theta / 2, 64 radial nodes (360 x 180 per surface at n = 50).
  SurfaceQuadrature quad{0, 0, 0};
  /// Optional w(r, phi) multiplying the surface element (surface transforms only).
  const Weighting* weight = nullptr;
  /// Assemble only these rows; the others stay empty. Empty means all rows.
  std::vector<std::size_t> only_rows;
  unsigned threads = 0;  // 0: hardware concurrency
};

SurfaceQuadrature auto_quadrature(std::size_t n);

/// Discrete forward operator: each row deposits the surface (or solid) quadrature
/// nodes of one (r, alpha, beta) into the voxel grid with trilinear weights.
SparseOperator build_matrix(TransformKind kind, const ScanGrid& grid, const VolumeShape& shape,
                            const MatrixOptions& opts = {});

}  // namespace spindle
