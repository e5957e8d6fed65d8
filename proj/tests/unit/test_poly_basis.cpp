#include <doctest.h>

#include "oracle.hpp"
#include "sgf/poly_basis.hpp"

using namespace sgf;

TEST_CASE("monomial counts") {
  CHECK(monomial_count(0) == 1);
  CHECK(monomial_count(1) == 4);
  CHECK(monomial_count(2) == 10);
}

TEST_CASE("degree 0 scalar basis is a column of ones") {
  const std::vector<Point3> coords{{0.3, 0.1, 2.0}, {5.0, -1.0, 0.0}, {1.0, 1.0, 1.0}};
  const PolyBasis b = build_polynomial_basis(coords, 0, 1);
  REQUIRE(b.pi_cols == 1);
  for (Index i = 0; i < 3; ++i) CHECK(b.Pi(i, 0) == 1.0);
}

TEST_CASE("degree 1 evaluates monomials") {
  const std::vector<Point3> coords{{0, 0, 0}, {1, 0, 0}};
  const PolyBasis b = build_polynomial_basis(coords, 1, 1);
  REQUIRE(b.Pi.cols() == 4);
  CHECK(oracle::to_eigen(b.Pi).isApprox((Eigen::MatrixXd(2, 4) << 1, 0, 0, 0, 1, 1, 0, 0).finished()));
}

TEST_CASE("degree 2 column order and max-norm scaling") {
  const std::vector<Point3> coords{{1, 2, 3}, {2, 1, 1}};
  const PolyBasis b = build_polynomial_basis(coords, 2, 1);
  REQUIRE(b.pi_cols == 10);
  auto raw = [](const Point3& p) {
    const double x = p[0], y = p[1], z = p[2];
    return std::array<double, 10>{1, x, y, z, x * x, y * y, z * z, x * y, y * z, z * x};
  };
  for (Index j = 0; j < 10; ++j) {
    const double a = raw(coords[0])[static_cast<std::size_t>(j)], c = raw(coords[1])[static_cast<std::size_t>(j)];
    const double m = std::max(std::abs(a), std::abs(c));
    CHECK(b.Pi(0, j) == doctest::Approx(a / m));
    CHECK(b.Pi(1, j) == doctest::Approx(c / m));
  }
}

TEST_CASE("vector basis is block diagonal over components") {
  const std::vector<Point3> coords{{0, 0, 0}, {1, 2, 0}, {0, 1, 1}};
  const PolyBasis s = build_polynomial_basis(coords, 1, 1);
  const PolyBasis v = build_polynomial_basis(coords, 1, 3);
  REQUIRE(v.Pi.rows() == 9);
  REQUIRE(v.pi_cols == 12);
  const Eigen::MatrixXd pv = oracle::to_eigen(v.Pi), ps = oracle::to_eigen(s.Pi);
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) {
      const Eigen::MatrixXd blk = pv.block(3 * c, 4 * d, 3, 4);
      if (c == d) CHECK(blk.isApprox(ps));
      else CHECK(blk.norm() == 0.0);
    }
}
