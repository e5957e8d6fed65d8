#pragma once

#include <span>

#include "sgf/dense.hpp"
#include "sgf/problems.hpp"

namespace sgf {

struct PolyBasis {
  DenseMatrix Pi;  ///< n x pi_cols
  int degree = 0;
  Index pi_cols = 0;
};

/// Number of scalar monomials of total degree <= degree in 3D (1, 4, 10).
Index monomial_count(int degree);

/// Monomials 1, x, y, z, x^2, y^2, z^2, xy, yz, zx (truncated to `degree`)
/// evaluated at every vertex. With several components the scalar block is
/// repeated block-diagonally over the component-major unknown ordering. Each
/// column is scaled to unit max-norm.
PolyBasis build_polynomial_basis(std::span<const Point3> coords, int degree, Index components);

}  // namespace sgf
