#pragma once

#include <Eigen/Dense>
#include <random>
#include <vector>

#include "sgf/dense.hpp"
#include "sgf/sparse.hpp"

namespace oracle {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline Eigen::MatrixXd to_eigen(const sgf::DenseMatrix& m) {
  return Eigen::Map<const RowMat>(m.data(), m.rows(), m.cols());
}

inline Eigen::MatrixXd to_eigen(const sgf::SparseMatrix& a) { return to_eigen(a.to_dense()); }

inline sgf::DenseMatrix from_eigen(const Eigen::MatrixXd& m) {
  sgf::DenseMatrix out(m.rows(), m.cols());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out(i, j) = m(i, j);
  return out;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline Eigen::MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index j = 0; j < c; ++j) m(i, j) = nd(rng);
  return m;
}

/// G G^T + shift I
inline Eigen::MatrixXd random_spd(Eigen::Index n, unsigned seed, double shift = 1.0) {
  const Eigen::MatrixXd g = random_matrix(n, n, seed);
  return g * g.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
}

inline std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  return v;
}

inline double rel_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& ref) {
  return (a - ref).norm() / ref.norm();
}

}  // namespace oracle
