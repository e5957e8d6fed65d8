#pragma once

#include <span>
#include <vector>

#include "sgf/dense.hpp"

namespace sgf {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix with sorted column indices per row.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  /// Duplicates are summed.
  static SparseMatrix from_triplets(Index rows, Index cols, std::vector<Triplet> triplets);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index nnz() const noexcept { return static_cast<Index>(values_.size()); }
  const std::vector<Index>& row_ptr() const noexcept { return row_ptr_; }
  const std::vector<Index>& col_idx() const noexcept { return col_idx_; }
  const std::vector<double>& values() const noexcept { return values_; }

  /// Entry (i, j), zero if not stored.
  double at(Index i, Index j) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  /// A * X for a dense block of columns.
  DenseMatrix multiply(const DenseMatrix& x) const;

  DenseMatrix to_dense() const;
  SparseMatrix transposed() const;

  bool pattern_symmetric() const;
  /// max |A_ij - A_ji| <= rel_tol * max |A|
  bool symmetric(double rel_tol) const;
  double max_abs() const noexcept;
  /// Maximum absolute column sum.
  double norm1() const;

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace sgf
