#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace sgf {

using Index = std::ptrdiff_t;

/// Row-major dense matrix of doubles. Used for every per-node block.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  /// Zero-filled rows x cols matrix.
  DenseMatrix(Index rows, Index cols);
  /// Takes ownership of row-major entries; throws if the length is wrong or
  /// any entry is not finite.
  DenseMatrix(Index rows, Index cols, std::vector<double> entries);

  static DenseMatrix identity(Index n);

  Index rows() const noexcept { return rows_; }
  Index cols() const noexcept { return cols_; }
  Index size() const noexcept { return rows_ * cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }

  double& operator()(Index i, Index j) { return data_[static_cast<std::size_t>(i * cols_ + j)]; }
  double operator()(Index i, Index j) const { return data_[static_cast<std::size_t>(i * cols_ + j)]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> row(Index i) { return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)}; }
  std::span<const double> row(Index i) const {
    return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)};
  }
  std::span<const double> entries() const noexcept { return data_; }

  DenseMatrix transposed() const;
  DenseMatrix block(Index r0, Index c0, Index nr, Index nc) const;
  void set_block(Index r0, Index c0, const DenseMatrix& b);
  void add_block(Index r0, Index c0, const DenseMatrix& b);
  /// Selects rows by index, in the order given.
  DenseMatrix select_rows(std::span<const Index> rows) const;

  double max_abs() const noexcept;
  double frobenius() const noexcept;
  std::size_t bytes() const noexcept { return data_.size() * sizeof(double); }

  DenseMatrix& operator+=(const DenseMatrix& o);
  DenseMatrix& operator-=(const DenseMatrix& o);
  DenseMatrix& operator*=(double s);

 private:
  Index rows_ = 0;
  Index cols_ = 0;
  std::vector<double> data_;
};

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b);
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b);

/// A * B, A^T * B and A * B^T.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
/// c += alpha * a * b^T  (the Schur-complement update shape).
void gemm_nt_update(DenseMatrix& c, const DenseMatrix& a, const DenseMatrix& b, double alpha);

DenseMatrix hstack(std::span<const DenseMatrix> parts);
DenseMatrix vstack(std::span<const DenseMatrix> parts);

/// y = A x
std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x);

// Flop tally for dense kernels; thread-local so concurrent factorizations
// keep independent counts.
std::uint64_t flop_count() noexcept;
void reset_flop_count() noexcept;
void add_flops(std::uint64_t n) noexcept;

struct CholeskyFactor {
  DenseMatrix L;
  Index size() const noexcept { return L.rows(); }
};

/// Lower Cholesky factor of a symmetric positive definite matrix. Throws
/// NotSPD when a pivot falls below 1e-14 * max diagonal.
CholeskyFactor cholesky(const DenseMatrix& a);

enum class TriSolveMode {
  LeftL,    ///< L^{-1} B
  LeftLt,   ///< L^{-T} B
  RightLt,  ///< B L^{-T}
};

DenseMatrix tri_solve(const CholeskyFactor& f, const DenseMatrix& b, TriSolveMode mode);

/// In-place single-vector versions used when applying factors.
void lower_solve_inplace(const DenseMatrix& l, std::span<double> x);
void lower_transpose_solve_inplace(const DenseMatrix& l, std::span<double> x);
void lower_multiply_inplace(const DenseMatrix& l, std::span<double> x);
void lower_transpose_multiply_inplace(const DenseMatrix& l, std::span<double> x);

struct PivotedQR {
  DenseMatrix Q;  ///< m x k, k = min(m, n)
  DenseMatrix R;  ///< k x n, upper trapezoidal, columns permuted
  std::vector<Index> perm;  ///< A(:, perm[j]) is the j-th column of A P
  Index rank = 0;
};

inline constexpr double kDefaultRankTol = 1e-10;

/// Householder QR with column-norm pivoting. The numerical rank counts
/// |R_ii| > rank_tol * |R_00|.
PivotedQR pivoted_qr(const DenseMatrix& a, double rank_tol = kDefaultRankTol);

/// Orthogonal basis for the column space of A completed to a full m x m
/// orthogonal matrix. The first `rank` columns span range(A) to rank_tol.
/// With forced_rank the factorization stops after that many pivots and the
/// rank is reported as forced_rank (clipped to m).
struct RangeBasis {
  DenseMatrix Q;
  Index rank = 0;
};

RangeBasis range_basis(const DenseMatrix& a, double rank_tol,
                       std::optional<Index> forced_rank = std::nullopt);

}  // namespace sgf
