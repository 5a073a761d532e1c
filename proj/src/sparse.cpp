#include "spindle/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>

namespace spindle {

namespace {

unsigned thread_count(unsigned requested, std::size_t work) {
  unsigned t = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(t, std::max<std::size_t>(1, work)));
}

void check_size(std::size_t got, std::size_t want, const char* what) {
  if (got != want)
    throw std::invalid_argument(std::string(what) + " has length " + std::to_string(got) + ", expected " +
                                std::to_string(want));
}

}  // namespace

std::vector<double> LinearOperator::apply(std::span<const double> x) const {
  std::vector<double> y(rows());
  apply(x, y);
  return y;
}

std::vector<double> LinearOperator::apply_adjoint(std::span<const double> y) const {
  std::vector<double> x(cols());
  apply_adjoint(y, x);
  return x;
}

class SparseBuilder {
 public:
  static SparseOperator make(std::size_t rows, std::size_t cols) {
    if (cols > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("too many columns");
    SparseOperator op;
    op.cols_ = cols;
    op.row_ptr_.assign(rows + 1, 0);
    return op;
  }
  static auto& row_ptr(SparseOperator& op) { return op.row_ptr_; }
  static auto& cols(SparseOperator& op) { return op.col_; }
  static auto& values(SparseOperator& op) { return op.values_; }
};

SparseOperator SparseOperator::from_triplets(std::size_t rows, std::size_t cols, std::vector<Triplet> entries) {
  auto op = SparseBuilder::make(rows, cols);
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    if (e.row >= rows || e.col >= cols) throw std::invalid_argument("triplet index out of range");
    if (i > 0 && entries[i - 1].row == e.row && entries[i - 1].col == e.col) {
      op.values_.back() += e.value;
      continue;
    }
    op.col_.push_back(static_cast<std::uint32_t>(e.col));
    op.values_.push_back(e.value);
    ++op.row_ptr_[e.row + 1];
  }
  for (std::size_t r = 0; r < rows; ++r) op.row_ptr_[r + 1] += op.row_ptr_[r];
  return op;
}

void SparseOperator::apply(std::span<const double> x, std::span<double> y) const {
  check_size(x.size(), cols(), "input");
  check_size(y.size(), rows(), "output");
  const std::size_t n = rows();
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      double s = 0.0;
      for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) s += values_[k] * x[col_[k]];
      y[r] = s;
    }
  };
  const unsigned t = nnz() > 100000 ? thread_count(0, n) : 1;
  if (t == 1) return work(0, n);
  std::vector<std::thread> pool;
  for (unsigned i = 0; i < t; ++i) pool.emplace_back(work, n * i / t, n * (i + 1) / t);
  for (auto& th : pool) th.join();
}

void SparseOperator::apply_adjoint(std::span<const double> y, std::span<double> x) const {
  check_size(y.size(), rows(), "input");
  check_size(x.size(), cols(), "output");
  std::fill(x.begin(), x.end(), 0.0);
  for (std::size_t r = 0; r < rows(); ++r) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) x[col_[k]] += values_[k] * yr;
  }
}

std::vector<Triplet> SparseOperator::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t r = 0; r < rows(); ++r)
    for (std::uint64_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out.push_back({r, col_[k], values_[k]});
  return out;
}

double SparseOperator::row_sum(std::size_t row) const {
  double s = 0.0;
  for (double v : row_values(row)) s += v;
  return s;
}

std::span<const std::uint32_t> SparseOperator::row_cols(std::size_t row) const {
  return {col_.data() + row_ptr_.at(row), static_cast<std::size_t>(row_ptr_.at(row + 1) - row_ptr_[row])};
}

std::span<const double> SparseOperator::row_values(std::size_t row) const {
  return {values_.data() + row_ptr_.at(row), static_cast<std::size_t>(row_ptr_.at(row + 1) - row_ptr_[row])};
}

SurfaceQuadrature auto_quadrature(std::size_t n) {
  const std::size_t nt = std::max<std::size_t>(64, 2 * static_cast<std::size_t>(std::ceil(3.6 * n)));
  return {nt, nt / 2, 64};
}

SparseOperator build_matrix(TransformKind kind, const ScanGrid& grid, const VolumeShape& shape,
                            const MatrixOptions& opts) {
  grid.validate();
  if (shape.n == 0 || !(shape.extent > 0.0)) throw std::invalid_argument("empty volume shape");
  auto q = auto_quadrature(shape.n);
  if (opts.quad.n_theta) q.n_theta = opts.quad.n_theta;
  if (opts.quad.n_phi) q.n_phi = opts.quad.n_phi;
  if (opts.quad.n_radial) q.n_radial = opts.quad.n_radial;

  std::vector<std::size_t> rows = opts.only_rows;
  if (rows.empty()) {
    rows.resize(grid.size());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  if (rows.back() >= grid.size()) throw std::invalid_argument("row index outside the scan grid");

  const std::size_t nb = grid.beta_values.size(), na = grid.alpha_values.size();
  struct Chunk {
    std::vector<std::uint64_t> counts;
    std::vector<std::uint32_t> cols;
    std::vector<double> values;
  };
  const unsigned t = thread_count(opts.threads, rows.size());
  std::vector<Chunk> chunks(t);
  auto work = [&](unsigned c) {
    const std::size_t lo = rows.size() * c / t, hi = rows.size() * (c + 1) / t;
    std::vector<double> acc(shape.voxels(), 0.0);
    std::vector<char> seen(shape.voxels(), 0);
    std::vector<std::uint32_t> touched;
    auto& out = chunks[c];
    for (std::size_t i = lo; i < hi; ++i) {
      const std::size_t row = rows[i];
      const std::size_t ib = row % nb, ia = (row / nb) % na, ir = row / (nb * na);
      for_each_node(kind, grid.r_values[ir], grid.alpha_values[ia], grid.beta_values[ib], q, opts.weight,
                    [&](const Vec3& x, double w) {
                      const auto st = trilinear_stencil(shape, x);
                      for (int k = 0; k < st.count; ++k) {
                        const auto v = static_cast<std::uint32_t>(st.index[k]);
                        if (!seen[v]) {
                          seen[v] = 1;
                          touched.push_back(v);
                        }
                        acc[v] += w * st.weight[k];
                      }
                    });
      std::sort(touched.begin(), touched.end());
      for (auto v : touched) {
        out.cols.push_back(v);
        out.values.push_back(acc[v]);
        acc[v] = 0.0;
        seen[v] = 0;
      }
      out.counts.push_back(touched.size());
      touched.clear();
    }
  };
  if (t == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned c = 0; c < t; ++c) pool.emplace_back(work, c);
    for (auto& th : pool) th.join();
  }

  auto op = SparseBuilder::make(grid.size(), shape.voxels());
  op.kind = kind;
  op.grid = grid;
  op.shape = shape;
  auto& ptr = SparseBuilder::row_ptr(op);
  std::size_t total = 0;
  for (const auto& c : chunks) total += c.values.size();
  SparseBuilder::cols(op).reserve(total);
  SparseBuilder::values(op).reserve(total);
  std::size_t i = 0;
  for (auto& c : chunks) {
    for (auto cnt : c.counts) ptr[rows[i++] + 1] = cnt;
    SparseBuilder::cols(op).insert(SparseBuilder::cols(op).end(), c.cols.begin(), c.cols.end());
    SparseBuilder::values(op).insert(SparseBuilder::values(op).end(), c.values.begin(), c.values.end());
    c = Chunk{};
  }
  for (std::size_t r = 0; r < grid.size(); ++r) ptr[r + 1] += ptr[r];
  return op;
}

}  // namespace spindle
