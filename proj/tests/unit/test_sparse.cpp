#include <doctest.h>

#include "oracle.hpp"
#include "sgf/sparse.hpp"

using namespace sgf;

namespace {

SparseMatrix small() {
  return SparseMatrix::from_triplets(3, 3, {{0, 0, 2.0}, {0, 2, -1.0}, {2, 0, -1.0}, {1, 1, 3.0}, {2, 2, 4.0},
                                            {2, 2, 1.0}});
}

}  // namespace

TEST_CASE("triplets are summed and stored row-sorted") {
  const SparseMatrix a = small();
  CHECK(a.nnz() == 5);
  CHECK(a.at(2, 2) == 5.0);
  CHECK(a.at(1, 0) == 0.0);
  CHECK(a.row_ptr() == std::vector<Index>{0, 2, 3, 5});
  CHECK(a.col_idx() == std::vector<Index>{0, 2, 1, 0, 2});
}

TEST_CASE("multiply agrees with dense products") {
  const Eigen::MatrixXd dense = oracle::random_matrix(20, 20, 3).unaryExpr([](double v) {
    return std::abs(v) > 1.0 ? v : 0.0;
  });
  std::vector<Triplet> t;
  for (Index i = 0; i < 20; ++i)
    for (Index j = 0; j < 20; ++j)
      if (dense(i, j) != 0.0) t.push_back({i, j, dense(i, j)});
  const SparseMatrix a = SparseMatrix::from_triplets(20, 20, t);
  CHECK(oracle::to_eigen(a).isApprox(dense));
  const auto x = oracle::random_vector(20, 4);
  CHECK(oracle::to_eigen(a.multiply(x)).isApprox(dense * oracle::to_eigen(x), 1e-14));
  const Eigen::MatrixXd xs = oracle::random_matrix(20, 3, 5);
  CHECK(oracle::to_eigen(a.multiply(oracle::from_eigen(xs))).isApprox(dense * xs, 1e-14));
  CHECK(oracle::to_eigen(a.transposed()).isApprox(dense.transpose()));
  CHECK(a.norm1() == doctest::Approx(dense.cwiseAbs().colwise().sum().maxCoeff()));
  CHECK(a.max_abs() == doctest::Approx(dense.cwiseAbs().maxCoeff()));
}

TEST_CASE("symmetry checks") {
  const SparseMatrix a = small();
  CHECK(a.pattern_symmetric());
  CHECK(a.symmetric(1e-14));
  const SparseMatrix b = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}});
  CHECK(!b.pattern_symmetric());
  const SparseMatrix c = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.1}, {1, 1, 1.0}});
  CHECK(c.pattern_symmetric());
  CHECK(!c.symmetric(1e-3));
}

TEST_CASE("vector helpers") {
  const std::vector<double> a{3.0, 4.0}, b{1.0, 2.0};
  CHECK(dot(a, b) == 11.0);
  CHECK(norm2(a) == 5.0);
}
