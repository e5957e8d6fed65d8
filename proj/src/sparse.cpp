#include "sgf/sparse.hpp"

#include <algorithm>
#include <cmath>

#include "sgf/error.hpp"

namespace sgf {

SparseMatrix::SparseMatrix(Index rows, Index cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
                           std::vector<double> values)
    : rows_(rows), cols_(cols), row_ptr_(std::move(row_ptr)), col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (static_cast<Index>(row_ptr_.size()) != rows_ + 1 || col_idx_.size() != values_.size() ||
      row_ptr_.back() != static_cast<Index>(values_.size())) {
    throw Error(ErrorCode::ShapeMismatch, "inconsistent CSR arrays");
  }
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      if (col_idx_[p] < 0 || col_idx_[p] >= cols_) throw Error(ErrorCode::ShapeMismatch, "column out of range");
      if (p > row_ptr_[r] && col_idx_[p] <= col_idx_[p - 1]) {
        throw Error(ErrorCode::ShapeMismatch, "CSR columns must be strictly increasing");
      }
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index rows, Index cols, std::vector<Triplet> triplets) {
  for (const auto& t : triplets) {
    if (t.row < 0 || t.row >= rows || t.col < 0 || t.col >= cols) {
      throw Error(ErrorCode::ShapeMismatch, "triplet index out of range");
    }
  }
  std::sort(triplets.begin(), triplets.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(static_cast<std::size_t>(rows + 1), 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const Index r = triplets[k].row;
    const Index c = triplets[k].col;
    double v = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) v += triplets[k++].value;
    m.col_idx_.push_back(c);
    m.values_.push_back(v);
    ++m.row_ptr_[static_cast<std::size_t>(r + 1)];
  }
  for (Index r = 0; r < rows; ++r) m.row_ptr_[r + 1] += m.row_ptr_[r];
  return m;
}

double SparseMatrix::at(Index i, Index j) const {
  auto b = col_idx_.begin() + row_ptr_[i];
  auto e = col_idx_.begin() + row_ptr_[i + 1];
  auto it = std::lower_bound(b, e, j);
  if (it == e || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<Index>(x.size()) != cols_ || static_cast<Index>(y.size()) != rows_) {
    throw Error(ErrorCode::ShapeMismatch, "sparse matvec length");
  }
  for (Index r = 0; r < rows_; ++r) {
    double s = 0.0;
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) s += values_[p] * x[col_idx_[p]];
    y[r] = s;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(static_cast<std::size_t>(rows_));
  multiply(x, y);
  return y;
}

DenseMatrix SparseMatrix::multiply(const DenseMatrix& x) const {
  if (x.rows() != cols_) throw Error(ErrorCode::ShapeMismatch, "sparse matmul rows");
  DenseMatrix y(rows_, x.cols());
  for (Index r = 0; r < rows_; ++r) {
    double* yr = y.data() + r * x.cols();
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const double v = values_[p];
      const double* xr = x.data() + col_idx_[p] * x.cols();
      for (Index c = 0; c < x.cols(); ++c) yr[c] += v * xr[c];
    }
  }
  return y;
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix d(rows_, cols_);
  for (Index r = 0; r < rows_; ++r)
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) d(r, col_idx_[p]) = values_[p];
  return d;
}

SparseMatrix SparseMatrix::transposed() const {
  std::vector<Triplet> t;
  t.reserve(values_.size());
  for (Index r = 0; r < rows_; ++r)
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) t.push_back({col_idx_[p], r, values_[p]});
  return from_triplets(cols_, rows_, std::move(t));
}

bool SparseMatrix::pattern_symmetric() const {
  if (rows_ != cols_) return false;
  for (Index r = 0; r < rows_; ++r) {
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) {
      const Index c = col_idx_[p];
      auto b = col_idx_.begin() + row_ptr_[c];
      auto e = col_idx_.begin() + row_ptr_[c + 1];
      if (!std::binary_search(b, e, r)) return false;
    }
  }
  return true;
}

bool SparseMatrix::symmetric(double rel_tol) const {
  if (!pattern_symmetric()) return false;
  const double bound = rel_tol * max_abs();
  for (Index r = 0; r < rows_; ++r)
    for (Index p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
      if (std::abs(values_[p] - at(col_idx_[p], r)) > bound) return false;
  return true;
}

double SparseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double SparseMatrix::norm1() const {
  std::vector<double> colsum(static_cast<std::size_t>(cols_), 0.0);
  for (Index p = 0; p < nnz(); ++p) colsum[col_idx_[p]] += std::abs(values_[p]);
  return colsum.empty() ? 0.0 : *std::max_element(colsum.begin(), colsum.end());
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

}  // namespace sgf
