#include "sgf/dense.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "sgf/error.hpp"

namespace sgf {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;

ConstMap view(const DenseMatrix& a) { return ConstMap(a.data(), a.rows(), a.cols()); }
MutMap view(DenseMatrix& a) { return MutMap(a.data(), a.rows(), a.cols()); }

thread_local std::uint64_t g_flops = 0;

constexpr Index kBlock = 64;

std::uint64_t u64(Index v) { return static_cast<std::uint64_t>(std::max<Index>(v, 0)); }

void require_shape(bool ok, const char* what) {
  if (!ok) throw Error(ErrorCode::ShapeMismatch, what);
}

}  // namespace

std::uint64_t flop_count() noexcept { return g_flops; }
void reset_flop_count() noexcept { g_flops = 0; }
void add_flops(std::uint64_t n) noexcept { g_flops += n; }

DenseMatrix::DenseMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), 0.0) {
  if (rows < 0 || cols < 0) throw Error(ErrorCode::InvalidArgument, "negative matrix dimension");
}

DenseMatrix::DenseMatrix(Index rows, Index cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (rows < 0 || cols < 0 || static_cast<Index>(data_.size()) != rows * cols) {
    throw Error(ErrorCode::ShapeMismatch, "entry count does not match rows*cols");
  }
  for (double v : data_) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "non-finite matrix entry");
  }
}

DenseMatrix DenseMatrix::identity(Index n) {
  DenseMatrix m(n, n);
  for (Index i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (Index i = 0; i < rows_; ++i)
    for (Index j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::block(Index r0, Index c0, Index nr, Index nc) const {
  require_shape(r0 >= 0 && c0 >= 0 && r0 + nr <= rows_ && c0 + nc <= cols_, "block out of range");
  DenseMatrix b(nr, nc);
  for (Index i = 0; i < nr; ++i)
    std::copy_n(data_.data() + (r0 + i) * cols_ + c0, nc, b.data() + i * nc);
  return b;
}

void DenseMatrix::set_block(Index r0, Index c0, const DenseMatrix& b) {
  require_shape(r0 >= 0 && c0 >= 0 && r0 + b.rows() <= rows_ && c0 + b.cols() <= cols_,
                "set_block out of range");
  for (Index i = 0; i < b.rows(); ++i)
    std::copy_n(b.data() + i * b.cols(), b.cols(), data_.data() + (r0 + i) * cols_ + c0);
}

void DenseMatrix::add_block(Index r0, Index c0, const DenseMatrix& b) {
  require_shape(r0 >= 0 && c0 >= 0 && r0 + b.rows() <= rows_ && c0 + b.cols() <= cols_,
                "add_block out of range");
  for (Index i = 0; i < b.rows(); ++i) {
    double* dst = data_.data() + (r0 + i) * cols_ + c0;
    const double* src = b.data() + i * b.cols();
    for (Index j = 0; j < b.cols(); ++j) dst[j] += src[j];
  }
}

DenseMatrix DenseMatrix::select_rows(std::span<const Index> rows) const {
  DenseMatrix out(static_cast<Index>(rows.size()), cols_);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_shape(rows[i] >= 0 && rows[i] < rows_, "row index out of range");
    std::copy_n(data_.data() + rows[i] * cols_, cols_, out.data() + static_cast<Index>(i) * cols_);
  }
  return out;
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double DenseMatrix::frobenius() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& o) {
  require_shape(rows_ == o.rows_ && cols_ == o.cols_, "operator+= shape");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& o) {
  require_shape(rows_ == o.rows_ && cols_ == o.cols_, "operator-= shape");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(const DenseMatrix& a, const DenseMatrix& b) { return matmul(a, b); }

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.rows(), "matmul inner dimension");
  DenseMatrix c(a.rows(), b.cols());
  if (c.empty() || a.cols() == 0) return c;
  view(c).noalias() = view(a) * view(b);
  add_flops(2 * u64(a.rows()) * u64(a.cols()) * u64(b.cols()));
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.rows() == b.rows(), "matmul_tn inner dimension");
  DenseMatrix c(a.cols(), b.cols());
  if (c.empty() || a.rows() == 0) return c;
  view(c).noalias() = view(a).transpose() * view(b);
  add_flops(2 * u64(a.rows()) * u64(a.cols()) * u64(b.cols()));
  return c;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require_shape(a.cols() == b.cols(), "matmul_nt inner dimension");
  DenseMatrix c(a.rows(), b.rows());
  if (c.empty() || a.cols() == 0) return c;
  view(c).noalias() = view(a) * view(b).transpose();
  add_flops(2 * u64(a.rows()) * u64(a.cols()) * u64(b.rows()));
  return c;
}

void gemm_nt_update(DenseMatrix& c, const DenseMatrix& a, const DenseMatrix& b, double alpha) {
  require_shape(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows(),
                "gemm_nt_update shape");
  if (c.empty() || a.cols() == 0) return;
  view(c).noalias() += alpha * (view(a) * view(b).transpose());
  add_flops(2 * u64(a.rows()) * u64(a.cols()) * u64(b.rows()));
}

DenseMatrix hstack(std::span<const DenseMatrix> parts) {
  Index rows = parts.empty() ? 0 : parts.front().rows();
  Index cols = 0;
  for (const auto& p : parts) {
    require_shape(p.rows() == rows, "hstack row mismatch");
    cols += p.cols();
  }
  DenseMatrix out(rows, cols);
  Index c0 = 0;
  for (const auto& p : parts) {
    out.set_block(0, c0, p);
    c0 += p.cols();
  }
  return out;
}

DenseMatrix vstack(std::span<const DenseMatrix> parts) {
  Index cols = parts.empty() ? 0 : parts.front().cols();
  Index rows = 0;
  for (const auto& p : parts) {
    require_shape(p.cols() == cols || p.rows() == 0, "vstack column mismatch");
    rows += p.rows();
  }
  DenseMatrix out(rows, cols);
  Index r0 = 0;
  for (const auto& p : parts) {
    if (p.rows() == 0) continue;
    out.set_block(r0, 0, p);
    r0 += p.rows();
  }
  return out;
}

std::vector<double> matvec(const DenseMatrix& a, std::span<const double> x) {
  require_shape(static_cast<Index>(x.size()) == a.cols(), "matvec length");
  std::vector<double> y(static_cast<std::size_t>(a.rows()), 0.0);
  for (Index i = 0; i < a.rows(); ++i) {
    const double* r = a.data() + i * a.cols();
    double s = 0.0;
    for (Index j = 0; j < a.cols(); ++j) s += r[j] * x[static_cast<std::size_t>(j)];
    y[static_cast<std::size_t>(i)] = s;
  }
  add_flops(2 * u64(a.rows()) * u64(a.cols()));
  return y;
}

// ---------------------------------------------------------------------------
// Cholesky

CholeskyFactor cholesky(const DenseMatrix& a) {
  require_shape(a.rows() == a.cols(), "cholesky needs a square matrix");
  const Index m = a.rows();
  DenseMatrix w = a;
  double max_diag = 0.0;
  for (Index i = 0; i < m; ++i) max_diag = std::max(max_diag, std::abs(a(i, i)));
  const double threshold = 1e-14 * max_diag;

  MutMap wm = view(w);
  for (Index k0 = 0; k0 < m; k0 += kBlock) {
    const Index kb = std::min(kBlock, m - k0);
    // diagonal block, unblocked left-looking within the panel
    for (Index j = k0; j < k0 + kb; ++j) {
      double* rj = w.data() + j * m;
      double d = rj[j];
      for (Index p = k0; p < j; ++p) d -= rj[p] * rj[p];
      if (!(d > threshold)) {
        throw Error(ErrorCode::NotSPD, "pivot " + std::to_string(j) + " of " + std::to_string(m) +
                                           " is " + std::to_string(d));
      }
      const double ljj = std::sqrt(d);
      rj[j] = ljj;
      for (Index i = j + 1; i < k0 + kb; ++i) {
        double* ri = w.data() + i * m;
        double s = ri[j];
        for (Index p = k0; p < j; ++p) s -= ri[p] * rj[p];
        ri[j] = s / ljj;
      }
    }
    const Index rest = m - k0 - kb;
    if (rest == 0) continue;
    // panel below: W21 <- W21 L11^{-T}
    for (Index i = k0 + kb; i < m; ++i) {
      double* ri = w.data() + i * m;
      for (Index j = k0; j < k0 + kb; ++j) {
        const double* rj = w.data() + j * m;
        double s = ri[j];
        for (Index p = k0; p < j; ++p) s -= ri[p] * rj[p];
        ri[j] = s / rj[j];
      }
    }
    // trailing update: W22 -= W21 W21^T (lower triangle only)
    auto panel = wm.block(k0 + kb, k0, rest, kb);
    wm.block(k0 + kb, k0 + kb, rest, rest).selfadjointView<Eigen::Lower>().rankUpdate(panel, -1.0);
  }
  for (Index i = 0; i < m; ++i)
    for (Index j = i + 1; j < m; ++j) w(i, j) = 0.0;
  add_flops(u64(m) * u64(m) * u64(m) / 3);
  return CholeskyFactor{std::move(w)};
}

// ---------------------------------------------------------------------------
// Triangular solves

namespace {

// X <- L^{-1} X, X row-major m x k.
void solve_lower_left(const DenseMatrix& l, DenseMatrix& x) {
  const Index m = l.rows();
  const Index k = x.cols();
  ConstMap lm = view(l);
  MutMap xm = view(x);
  for (Index k0 = 0; k0 < m; k0 += kBlock) {
    const Index kb = std::min(kBlock, m - k0);
    if (k0 > 0) xm.middleRows(k0, kb).noalias() -= lm.block(k0, 0, kb, k0) * xm.topRows(k0);
    for (Index i = k0; i < k0 + kb; ++i) {
      double* xi = x.data() + i * k;
      for (Index p = k0; p < i; ++p) {
        const double lip = l(i, p);
        if (lip == 0.0) continue;
        const double* xp = x.data() + p * k;
        for (Index c = 0; c < k; ++c) xi[c] -= lip * xp[c];
      }
      const double inv = 1.0 / l(i, i);
      for (Index c = 0; c < k; ++c) xi[c] *= inv;
    }
  }
}

// X <- L^{-T} X
void solve_lower_transpose_left(const DenseMatrix& l, DenseMatrix& x) {
  const Index m = l.rows();
  const Index k = x.cols();
  ConstMap lm = view(l);
  MutMap xm = view(x);
  Index end = m;
  while (end > 0) {
    const Index kb = std::min(kBlock, end);
    const Index k0 = end - kb;
    const Index below = m - end;
    if (below > 0) {
      xm.middleRows(k0, kb).noalias() -= lm.block(end, k0, below, kb).transpose() * xm.bottomRows(below);
    }
    for (Index i = end - 1; i >= k0; --i) {
      double* xi = x.data() + i * k;
      for (Index p = i + 1; p < end; ++p) {
        const double lpi = l(p, i);
        if (lpi == 0.0) continue;
        const double* xp = x.data() + p * k;
        for (Index c = 0; c < k; ++c) xi[c] -= lpi * xp[c];
      }
      const double inv = 1.0 / l(i, i);
      for (Index c = 0; c < k; ++c) xi[c] *= inv;
    }
    end = k0;
  }
}

// X <- X L^{-T}, X row-major r x m.
void solve_lower_transpose_right(const DenseMatrix& l, DenseMatrix& x) {
  const Index m = l.rows();
  const Index r = x.rows();
  ConstMap lm = view(l);
  MutMap xm = view(x);
  for (Index k0 = 0; k0 < m; k0 += kBlock) {
    const Index kb = std::min(kBlock, m - k0);
    if (k0 > 0) xm.middleCols(k0, kb).noalias() -= xm.leftCols(k0) * lm.block(k0, 0, kb, k0).transpose();
    for (Index row = 0; row < r; ++row) {
      double* xr = x.data() + row * m;
      for (Index j = k0; j < k0 + kb; ++j) {
        const double* lj = l.data() + j * m;
        double s = xr[j];
        for (Index p = k0; p < j; ++p) s -= xr[p] * lj[p];
        xr[j] = s / lj[j];
      }
    }
  }
}

}  // namespace

DenseMatrix tri_solve(const CholeskyFactor& f, const DenseMatrix& b, TriSolveMode mode) {
  const Index m = f.L.rows();
  DenseMatrix x = b;
  switch (mode) {
    case TriSolveMode::LeftL:
      require_shape(b.rows() == m, "tri_solve(LeftL) rows");
      solve_lower_left(f.L, x);
      add_flops(u64(m) * u64(m) * u64(b.cols()));
      break;
    case TriSolveMode::LeftLt:
      require_shape(b.rows() == m, "tri_solve(LeftLt) rows");
      solve_lower_transpose_left(f.L, x);
      add_flops(u64(m) * u64(m) * u64(b.cols()));
      break;
    case TriSolveMode::RightLt:
      require_shape(b.cols() == m, "tri_solve(RightLt) cols");
      solve_lower_transpose_right(f.L, x);
      add_flops(u64(m) * u64(m) * u64(b.rows()));
      break;
  }
  return x;
}

void lower_solve_inplace(const DenseMatrix& l, std::span<double> x) {
  const Index m = l.rows();
  for (Index i = 0; i < m; ++i) {
    const double* li = l.data() + i * m;
    double s = x[static_cast<std::size_t>(i)];
    for (Index p = 0; p < i; ++p) s -= li[p] * x[static_cast<std::size_t>(p)];
    x[static_cast<std::size_t>(i)] = s / li[i];
  }
}

void lower_transpose_solve_inplace(const DenseMatrix& l, std::span<double> x) {
  const Index m = l.rows();
  for (Index i = m - 1; i >= 0; --i) {
    const double xi = x[static_cast<std::size_t>(i)] / l(i, i);
    x[static_cast<std::size_t>(i)] = xi;
    const double* li = l.data() + i * m;
    for (Index p = 0; p < i; ++p) x[static_cast<std::size_t>(p)] -= li[p] * xi;
  }
}

void lower_multiply_inplace(const DenseMatrix& l, std::span<double> x) {
  const Index m = l.rows();
  for (Index i = m - 1; i >= 0; --i) {
    const double* li = l.data() + i * m;
    double s = 0.0;
    for (Index p = 0; p <= i; ++p) s += li[p] * x[static_cast<std::size_t>(p)];
    x[static_cast<std::size_t>(i)] = s;
  }
}

void lower_transpose_multiply_inplace(const DenseMatrix& l, std::span<double> x) {
  const Index m = l.rows();
  for (Index i = 0; i < m; ++i) {
    const double* li = l.data() + i * m;
    const double xi = x[static_cast<std::size_t>(i)];
    x[static_cast<std::size_t>(i)] = 0.0;
    for (Index p = 0; p <= i; ++p) x[static_cast<std::size_t>(p)] += li[p] * xi;
  }
}

// ---------------------------------------------------------------------------
// Householder QR with column pivoting

namespace {

struct HouseholderQr {
  Index m = 0;
  Index n = 0;
  std::vector<double> w;  // column-major m x n, reflectors below the diagonal
  std::vector<double> tau;
  std::vector<Index> perm;
  Index steps = 0;

  double* col(Index j) { return w.data() + j * m; }
  const double* col(Index j) const { return w.data() + j * m; }
};

double norm2(const double* v, Index len) {
  double scale = 0.0;
  double ssq = 1.0;
  for (Index i = 0; i < len; ++i) {
    if (v[i] != 0.0) {
      const double a = std::abs(v[i]);
      if (scale < a) {
        ssq = 1.0 + ssq * (scale / a) * (scale / a);
        scale = a;
      } else {
        ssq += (a / scale) * (a / scale);
      }
    }
  }
  return scale * std::sqrt(ssq);
}

// Runs up to max_steps pivoted Householder steps. With early_stop the loop
// ends as soon as the largest remaining column norm is <= rank_tol * |R_00|.
HouseholderQr householder_pivoted(const DenseMatrix& a, Index max_steps, bool early_stop,
                                  double rank_tol) {
  HouseholderQr qr;
  qr.m = a.rows();
  qr.n = a.cols();
  const Index m = qr.m;
  const Index n = qr.n;
  qr.w.assign(static_cast<std::size_t>(m * n), 0.0);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) qr.w[static_cast<std::size_t>(j * m + i)] = a(i, j);
  qr.perm.resize(static_cast<std::size_t>(n));
  std::iota(qr.perm.begin(), qr.perm.end(), Index{0});

  std::vector<double> vn1(static_cast<std::size_t>(n)), vn2(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) vn1[j] = vn2[j] = norm2(qr.col(j), m);

  const double tol3z = std::sqrt(std::numeric_limits<double>::epsilon());
  const Index kmax = std::min({m, n, max_steps});
  double r00 = 0.0;
  std::uint64_t flops = 0;
  Index k = 0;
  for (; k < kmax; ++k) {
    Index p = k;
    for (Index j = k + 1; j < n; ++j)
      if (vn1[j] > vn1[p]) p = j;
    if (p != k) {
      std::swap_ranges(qr.col(k), qr.col(k) + m, qr.col(p));
      std::swap(qr.perm[k], qr.perm[p]);
      std::swap(vn1[k], vn1[p]);
      std::swap(vn2[k], vn2[p]);
    }
    double* v = qr.col(k);
    const double x0 = v[k];
    const double xnorm = norm2(v + k + 1, m - k - 1);
    const double alpha = std::hypot(x0, xnorm);
    if (early_stop && (alpha == 0.0 || (k > 0 && alpha <= rank_tol * r00))) break;

    double tau = 0.0;
    if (xnorm != 0.0) {
      const double beta = -std::copysign(alpha, x0);
      tau = (beta - x0) / beta;
      const double scale = 1.0 / (x0 - beta);
      for (Index i = k + 1; i < m; ++i) v[i] *= scale;
      v[k] = beta;
    }
    if (k == 0) r00 = std::abs(v[0]);
    qr.tau.push_back(tau);

    if (tau != 0.0) {
      for (Index j = k + 1; j < n; ++j) {
        double* c = qr.col(j);
        double s = c[k];
        for (Index i = k + 1; i < m; ++i) s += v[i] * c[i];
        s *= tau;
        c[k] -= s;
        for (Index i = k + 1; i < m; ++i) c[i] -= s * v[i];
      }
      flops += 4 * u64(m - k) * u64(n - k - 1);
    }
    for (Index j = k + 1; j < n; ++j) {
      if (vn1[j] == 0.0) continue;
      const double ratio = std::abs(qr.col(j)[k]) / vn1[j];
      double temp = std::max(0.0, 1.0 - ratio * ratio);
      const double temp2 = temp * (vn1[j] / vn2[j]) * (vn1[j] / vn2[j]);
      if (temp2 <= tol3z) {
        vn1[j] = norm2(qr.col(j) + k + 1, m - k - 1);
        vn2[j] = vn1[j];
      } else {
        vn1[j] *= std::sqrt(temp);
      }
    }
  }
  qr.steps = k;
  add_flops(flops);
  return qr;
}

// First qcols columns of H_0 H_1 ... H_{steps-1}, returned row-major.
DenseMatrix form_q(const HouseholderQr& qr, Index qcols) {
  const Index m = qr.m;
  std::vector<double> q(static_cast<std::size_t>(m * qcols), 0.0);  // column-major
  for (Index j = 0; j < std::min(m, qcols); ++j) q[static_cast<std::size_t>(j * m + j)] = 1.0;
  std::uint64_t flops = 0;
  for (Index k = qr.steps - 1; k >= 0; --k) {
    const double tau = qr.tau[static_cast<std::size_t>(k)];
    if (tau == 0.0) continue;
    const double* v = qr.col(k);
    for (Index j = k; j < qcols; ++j) {
      double* c = q.data() + j * m;
      double s = c[k];
      for (Index i = k + 1; i < m; ++i) s += v[i] * c[i];
      s *= tau;
      c[k] -= s;
      for (Index i = k + 1; i < m; ++i) c[i] -= s * v[i];
    }
    flops += 4 * u64(m - k) * u64(qcols - k);
  }
  add_flops(flops);
  DenseMatrix out(m, qcols);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < qcols; ++j) out(i, j) = q[static_cast<std::size_t>(j * m + i)];
  return out;
}

}  // namespace

PivotedQR pivoted_qr(const DenseMatrix& a, double rank_tol) {
  if (!(rank_tol > 0.0 && rank_tol < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rank_tol must lie in (0, 1)");
  }
  const Index m = a.rows();
  const Index n = a.cols();
  const Index k = std::min(m, n);
  HouseholderQr qr = householder_pivoted(a, k, false, rank_tol);

  PivotedQR out;
  out.perm = qr.perm;
  out.Q = form_q(qr, k);
  out.R = DenseMatrix(k, n);
  for (Index i = 0; i < k; ++i)
    for (Index j = i; j < n; ++j) out.R(i, j) = qr.col(j)[i];
  const double r00 = k > 0 ? std::abs(out.R(0, 0)) : 0.0;
  out.rank = 0;
  if (r00 > 0.0) {
    for (Index i = 0; i < k; ++i)
      if (std::abs(out.R(i, i)) > rank_tol * r00) ++out.rank;
  }
  return out;
}

RangeBasis range_basis(const DenseMatrix& a, double rank_tol, std::optional<Index> forced_rank) {
  const Index m = a.rows();
  RangeBasis out;
  if (forced_rank) {
    const Index r = std::clamp<Index>(*forced_rank, 0, m);
    HouseholderQr qr = householder_pivoted(a, r, false, rank_tol);
    out.Q = form_q(qr, m);
    out.rank = r;
  } else {
    HouseholderQr qr = householder_pivoted(a, std::min(m, a.cols()), true, rank_tol);
    out.Q = form_q(qr, m);
    out.rank = qr.steps;
  }
  return out;
}

}  // namespace sgf
