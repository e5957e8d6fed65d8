#include <doctest.h>

#include "oracle.hpp"
#include "sgf/dense.hpp"
#include "sgf/error.hpp"

using namespace sgf;
using oracle::from_eigen;
using oracle::to_eigen;

TEST_CASE("cholesky of identity and scalar") {
  CHECK(to_eigen(cholesky(DenseMatrix::identity(3)).L).isApprox(Eigen::MatrixXd::Identity(3, 3)));
  DenseMatrix four(1, 1, {4.0});
  CHECK(cholesky(four).L(0, 0) == doctest::Approx(2.0));
}

TEST_CASE("cholesky reconstructs and matches Eigen LLT across block boundaries") {
  for (Index n : {5, 63, 64, 65, 150}) {
    const Eigen::MatrixXd a = n == 5 ? Eigen::MatrixXd(oracle::random_matrix(5, 5, 3) *
                                                           oracle::random_matrix(5, 5, 3).transpose() +
                                                       5.0 * Eigen::MatrixXd::Identity(5, 5))
                                     : oracle::random_spd(n, static_cast<unsigned>(n));
    const Eigen::MatrixXd l = to_eigen(cholesky(from_eigen(a)).L);
    CHECK(oracle::rel_error(l * l.transpose(), a) <= 1e-13);
    CHECK(l.isApprox(Eigen::MatrixXd(a.llt().matrixL()), 1e-10));
    CHECK(l.triangularView<Eigen::StrictlyUpper>().toDenseMatrix().norm() == 0.0);
  }
}

TEST_CASE("cholesky rejects indefinite input") {
  DenseMatrix a(2, 2, {1.0, 2.0, 2.0, 1.0});
  try {
    (void)cholesky(a);
    FAIL("expected NotSPD");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSPD);
  }
}

TEST_CASE("cholesky counts m^3/3 flops") {
  reset_flop_count();
  (void)cholesky(from_eigen(oracle::random_spd(30, 1)));
  CHECK(flop_count() == 30u * 30u * 30u / 3u);
}

TEST_CASE("tri_solve trivial cases") {
  const CholeskyFactor id = cholesky(DenseMatrix::identity(3));
  const DenseMatrix b = from_eigen(oracle::random_matrix(3, 2, 5));
  CHECK(to_eigen(tri_solve(id, b, TriSolveMode::LeftL)).isApprox(to_eigen(b)));
  const CholeskyFactor two = cholesky(DenseMatrix(1, 1, {4.0}));
  CHECK(tri_solve(two, DenseMatrix(1, 1, {6.0}), TriSolveMode::LeftL)(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("tri_solve modes multiply back") {
  for (Index n : {7, 100}) {
    const CholeskyFactor f = cholesky(from_eigen(oracle::random_spd(n, 11)));
    const Eigen::MatrixXd l = to_eigen(f.L);
    const Eigen::MatrixXd b = oracle::random_matrix(n, 9, 12);
    const Eigen::MatrixXd c = oracle::random_matrix(9, n, 13);
    CHECK(oracle::rel_error(l * to_eigen(tri_solve(f, from_eigen(b), TriSolveMode::LeftL)), b) <= 1e-12);
    CHECK(oracle::rel_error(l.transpose() * to_eigen(tri_solve(f, from_eigen(b), TriSolveMode::LeftLt)), b) <= 1e-12);
    CHECK(oracle::rel_error(to_eigen(tri_solve(f, from_eigen(c), TriSolveMode::RightLt)) * l.transpose(), c) <= 1e-12);
  }
}

TEST_CASE("single-vector triangular kernels agree with dense products") {
  const DenseMatrix lm = cholesky(from_eigen(oracle::random_spd(12, 21))).L;
  const Eigen::MatrixXd l = to_eigen(lm);
  const std::vector<double> x = oracle::random_vector(12, 22);
  const Eigen::VectorXd xe = to_eigen(x);
  auto run = [&](auto fn) {
    std::vector<double> y = x;
    fn(lm, std::span<double>(y));
    return to_eigen(y);
  };
  CHECK(run(lower_multiply_inplace).isApprox(l * xe, 1e-12));
  CHECK(run(lower_transpose_multiply_inplace).isApprox(l.transpose() * xe, 1e-12));
  CHECK((l * run(lower_solve_inplace)).isApprox(xe, 1e-12));
  CHECK((l.transpose() * run(lower_transpose_solve_inplace)).isApprox(xe, 1e-12));
}

TEST_CASE("matrix products match Eigen") {
  const Eigen::MatrixXd a = oracle::random_matrix(13, 7, 1), b = oracle::random_matrix(7, 9, 2);
  const Eigen::MatrixXd c = oracle::random_matrix(13, 9, 3), d = oracle::random_matrix(11, 7, 4);
  CHECK(to_eigen(matmul(from_eigen(a), from_eigen(b))).isApprox(a * b, 1e-13));
  CHECK(to_eigen(matmul_tn(from_eigen(a), from_eigen(c))).isApprox(a.transpose() * c, 1e-13));
  CHECK(to_eigen(matmul_nt(from_eigen(a), from_eigen(d))).isApprox(a * d.transpose(), 1e-13));
  DenseMatrix acc = from_eigen(oracle::random_matrix(13, 11, 5));
  const Eigen::MatrixXd expect = to_eigen(acc) - 0.5 * a * d.transpose();
  gemm_nt_update(acc, from_eigen(a), from_eigen(d), -0.5);
  CHECK(to_eigen(acc).isApprox(expect, 1e-13));
  const std::vector<double> x = oracle::random_vector(7, 6);
  CHECK(to_eigen(matvec(from_eigen(a), x)).isApprox(a * to_eigen(x), 1e-13));
}

TEST_CASE("stacking and blocks") {
  const DenseMatrix a = from_eigen(oracle::random_matrix(3, 2, 1));
  const DenseMatrix b = from_eigen(oracle::random_matrix(3, 4, 2));
  const DenseMatrix parts[] = {a, b};
  const DenseMatrix h = hstack(parts);
  CHECK(h.cols() == 6);
  CHECK(h.block(0, 2, 3, 4).entries().size() == 12);
  CHECK(to_eigen(h.block(0, 2, 3, 4)).isApprox(to_eigen(b)));
  const DenseMatrix t[] = {a.transposed(), b.transposed()};
  CHECK(to_eigen(vstack(t)).isApprox(to_eigen(h).transpose()));
  CHECK_THROWS_AS(DenseMatrix(2, 2, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("pivoted QR rank and residuals") {
  CHECK(pivoted_qr(DenseMatrix::identity(3), 1e-12).rank == 3);
  CHECK(pivoted_qr(DenseMatrix(2, 2, {1.0, 2.0, 2.0, 4.0}), 1e-12).rank == 1);

  const Eigen::MatrixXd a = oracle::random_matrix(8, 3, 9);
  const PivotedQR qr = pivoted_qr(from_eigen(a), 1e-12);
  const Eigen::MatrixXd q = to_eigen(qr.Q), r = to_eigen(qr.R);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(3, 3)).norm() <= 1e-12);
  Eigen::MatrixXd ap(8, 3);
  for (Index j = 0; j < 3; ++j) ap.col(j) = a.col(qr.perm[static_cast<std::size_t>(j)]);
  CHECK((ap - q * r).norm() <= 1e-12 * a.norm());
  for (Index i = 1; i < 3; ++i) CHECK(std::abs(r(i, i)) <= std::abs(r(i - 1, i - 1)) + 1e-14);
}

TEST_CASE("range basis spans the column space and completes to an orthogonal matrix") {
  // 10 x 6 matrix of rank 4.
  const Eigen::MatrixXd a = oracle::random_matrix(10, 4, 1) * oracle::random_matrix(4, 6, 2);
  const RangeBasis rb = range_basis(from_eigen(a), kDefaultRankTol);
  CHECK(rb.rank == 4);
  const Eigen::MatrixXd q = to_eigen(rb.Q);
  CHECK(q.rows() == 10);
  CHECK(q.cols() == 10);
  CHECK((q.transpose() * q - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-12);
  const Eigen::MatrixXd q1 = q.leftCols(4);
  CHECK((a - q1 * (q1.transpose() * a)).norm() <= 1e-12 * a.norm());

  const RangeBasis forced = range_basis(from_eigen(a), kDefaultRankTol, 2);
  CHECK(forced.rank == 2);
  const Eigen::MatrixXd qf = to_eigen(forced.Q);
  CHECK((qf.transpose() * qf - Eigen::MatrixXd::Identity(10, 10)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(range_basis(from_eigen(a), kDefaultRankTol, 40).rank == 10);
}
