#include "sgf/poly_basis.hpp"

#include <algorithm>
#include <cmath>

#include "sgf/error.hpp"

namespace sgf {

Index monomial_count(int degree) {
  switch (degree) {
    case 0: return 1;
    case 1: return 4;
    case 2: return 10;
    default: throw Error(ErrorCode::InvalidArgument, "polynomial degree must be 0, 1 or 2");
  }
}

PolyBasis build_polynomial_basis(std::span<const Point3> coords, int degree, Index components) {
  const Index p = monomial_count(degree);
  if (components < 1) throw Error(ErrorCode::InvalidArgument, "components must be >= 1");
  const Index nv = static_cast<Index>(coords.size());
  PolyBasis basis;
  basis.degree = degree;
  basis.pi_cols = p * components;
  basis.Pi = DenseMatrix(nv * components, basis.pi_cols);

  std::vector<double> mono(static_cast<std::size_t>(p));
  for (Index v = 0; v < nv; ++v) {
    const double x = coords[v][0], y = coords[v][1], z = coords[v][2];
    mono[0] = 1.0;
    if (degree >= 1) {
      mono[1] = x;
      mono[2] = y;
      mono[3] = z;
    }
    if (degree >= 2) {
      mono[4] = x * x;
      mono[5] = y * y;
      mono[6] = z * z;
      mono[7] = x * y;
      mono[8] = y * z;
      mono[9] = z * x;
    }
    for (Index c = 0; c < components; ++c)
      for (Index j = 0; j < p; ++j) basis.Pi(c * nv + v, c * p + j) = mono[j];
  }
  for (Index j = 0; j < basis.pi_cols; ++j) {
    double m = 0.0;
    for (Index i = 0; i < basis.Pi.rows(); ++i) m = std::max(m, std::abs(basis.Pi(i, j)));
    if (m == 0.0) continue;
    for (Index i = 0; i < basis.Pi.rows(); ++i) basis.Pi(i, j) /= m;
  }
  return basis;
}

}  // namespace sgf
