#include <doctest.h>

#include "oracle.hpp"
#include "sgf/block_matrix.hpp"
#include "sgf/error.hpp"
#include "sgf/partition.hpp"
#include "sgf/problems.hpp"

using namespace sgf;

TEST_CASE("single node holds the whole matrix") {
  const ProblemInstance p = poisson7(3, 3, 2);
  std::vector<Index> all(static_cast<std::size_t>(p.size()));
  for (Index i = 0; i < p.size(); ++i) all[static_cast<std::size_t>(i)] = i;
  const std::vector<std::vector<Index>> nodes{all};
  const BlockMatrix m = assemble_block_matrix(p.matrix, nodes);
  CHECK(oracle::to_eigen(m.diag(0)).isApprox(oracle::to_eigen(p.matrix)));
}

TEST_CASE("diagonal matrix gives diagonal blocks only") {
  std::vector<Triplet> t;
  for (Index i = 0; i < 6; ++i) t.push_back({i, i, 1.0 + static_cast<double>(i)});
  const SparseMatrix a = SparseMatrix::from_triplets(6, 6, t);
  const std::vector<std::vector<Index>> nodes{{0, 3}, {1, 4, 5}, {2}};
  const BlockMatrix m = assemble_block_matrix(a, nodes);
  for (NodeId i = 0; i < 3; ++i) {
    CHECK(m.neighbors(i).empty());
    const Eigen::MatrixXd d = oracle::to_eigen(m.diag(i));
    CHECK(d.isApprox(Eigen::MatrixXd(d.diagonal().asDiagonal())));
  }
  CHECK(m.diag(0)(1, 1) == 4.0);
}

TEST_CASE("nested level-1 partition scatters back to the original matrix") {
  const ProblemInstance p = poisson7(9, 9, 9);
  const PartitionHierarchy h = build_nested_hierarchy(p.grid, 3);
  std::vector<std::vector<Index>> nodes;
  std::vector<Index> order;
  for (const Cell& c : h.levels[0].cells) {
    nodes.push_back(expand_to_unknowns(c, p.grid));
    order.insert(order.end(), nodes.back().begin(), nodes.back().end());
  }
  const BlockMatrix m = assemble_block_matrix(p.matrix, nodes);
  const Eigen::MatrixXd dense = oracle::to_eigen(m.to_dense());
  const Eigen::MatrixXd a = oracle::to_eigen(p.matrix);
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = 0; j < order.size(); ++j)
      REQUIRE(dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == a(order[i], order[j]));
  for (NodeId i = 0; i < m.node_count(); ++i)
    for (NodeId j : m.neighbors(i)) CHECK(m.neighbors(j).count(i) == 1);
}

TEST_CASE("non-symmetric pattern is rejected") {
  const SparseMatrix a = SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}});
  const std::vector<std::vector<Index>> nodes{{0}, {1}};
  try {
    (void)assemble_block_matrix(a, nodes);
    FAIL("expected NonSymmetricPattern");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonSymmetricPattern);
  }
}

TEST_CASE("block updates, transposed access and byte tracking") {
  auto counter = std::make_shared<ByteCounter>();
  BlockMatrix m({2, 3}, counter);
  m.set_diag(0, DenseMatrix::identity(2));
  m.set_diag(1, DenseMatrix::identity(3));
  const std::size_t base = counter->live;
  CHECK(base == (4 + 9) * sizeof(double));
  CHECK(!m.has_block(0, 1));
  CHECK(m.block(1, 0).rows() == 3);
  CHECK(oracle::to_eigen(m.block(1, 0)).norm() == 0.0);

  const Eigen::MatrixXd x = oracle::random_matrix(3, 4, 1), y = oracle::random_matrix(2, 4, 2);
  m.gemm_update(1, 0, oracle::from_eigen(x), oracle::from_eigen(y), -1.0);
  CHECK(m.has_block(0, 1));
  CHECK(oracle::to_eigen(m.block(1, 0)).isApprox(-x * y.transpose()));
  CHECK(oracle::to_eigen(m.block(0, 1)).isApprox(-(x * y.transpose()).transpose()));
  CHECK(counter->live == base + 6 * sizeof(double));

  m.gemm_update(1, 1, oracle::from_eigen(x), oracle::from_eigen(x), 1.0);
  CHECK(oracle::to_eigen(m.diag(1)).isApprox(Eigen::MatrixXd::Identity(3, 3) + x * x.transpose()));

  m.add_to_block(0, 1, oracle::from_eigen(Eigen::MatrixXd::Ones(2, 3)));
  CHECK(oracle::to_eigen(m.block(0, 1)).isApprox(Eigen::MatrixXd::Ones(2, 3) - y * x.transpose()));

  const std::size_t peak = counter->peak;
  m.remove_node(1);
  CHECK(m.removed(1));
  CHECK(m.neighbors(0).empty());
  CHECK(counter->live == 4 * sizeof(double));
  CHECK(counter->peak == peak);
  CHECK(m.live_bytes() == counter->live);
}
