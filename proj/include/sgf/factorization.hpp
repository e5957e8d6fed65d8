#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sgf/block_matrix.hpp"
#include "sgf/partition.hpp"
#include "sgf/poly_basis.hpp"
#include "sgf/preconditioner.hpp"
#include "sgf/problems.hpp"

namespace sgf {

enum class Scheme { NestAllAll, Nest2All, Nest22, GenAllAll };
enum class CompressionMode { Off, Polynomial, LowRankEquivalent };

const char* to_string(Scheme s);
const char* to_string(CompressionMode m);
Scheme parse_scheme(const std::string& s);
CompressionMode parse_mode(const std::string& s);

/// Retained rank of every compression of a polynomial run, replayed by the
/// low-rank-equivalent run.
struct RankEntry {
  Index level = 0;
  NodeId node = 0;
  Index size = 0;
  Index rank = 0;
  bool operator==(const RankEntry&) const = default;
};

struct RankTrace {
  std::vector<RankEntry> entries;

  std::string to_json() const;
  static RankTrace from_json(const std::string& text);
  void save(const std::string& path) const;
  static RankTrace load(const std::string& path);
};

struct FactorizeOptions {
  Scheme scheme = Scheme::Nest22;
  int degree = 1;
  Index b = 0;  ///< 0 picks the default for the scheme and degree
  Index skip_first_levels = 2;
  CompressionMode mode = CompressionMode::Polynomial;
  double rank_tol = kDefaultRankTol;
  /// Switch to a dense factorization once the active unknowns drop below the
  /// largest node seen so far.
  bool early_final = true;
  const RankTrace* replay = nullptr;  ///< required for LowRankEquivalent
  RankTrace* record = nullptr;        ///< filled in Polynomial mode when set
};

/// b = 3 for nested schemes; 3, 4, 5 for the general scheme at degree 0, 1, 2.
Index default_b(Scheme scheme, int degree);
PartitionHierarchy build_hierarchy(const CartesianGrid& grid, Scheme scheme, Index b);

struct NodeState {
  NodeId id = 0;
  std::vector<Index> unknowns;  ///< B, every unknown of the cell
  std::vector<Index> active;    ///< slots of the working vector still in the trailing matrix
  DenseMatrix phi;              ///< |active| x pi
  Role role = Role::Separator;
  CellKind kind = CellKind::General;
};

/// Trailing matrix plus per-node bookkeeping for one level.
struct TrailingSystem {
  Index level = 0;
  BlockMatrix matrix;
  std::vector<NodeState> nodes;

  Index active_unknowns() const;
};

/// Level-0 nodes from the partition, blocks assembled from the matrix.
TrailingSystem make_initial_system(const ProblemInstance& problem, const Level& level0, const PolyBasis& basis,
                                   std::shared_ptr<ByteCounter> counter = nullptr);

/// Exact block elimination of a node; couplings between its neighbors receive
/// the Schur-complement update and the node leaves the trailing matrix.
EliminationFactor eliminate_node(TrailingSystem& sys, NodeId node);

struct CompressionSpec {
  CompressionMode mode = CompressionMode::Polynomial;
  double rank_tol = kDefaultRankTol;
  std::optional<Index> forced_rank;  ///< used in LowRankEquivalent mode
  /// Neighbors whose full scaled coupling block enters the filtered
  /// interaction matrix instead of its product with their basis.
  std::function<bool(NodeId)> full_coupling;
};

CompressionFactor compress_node(TrailingSystem& sys, NodeId node, const CompressionSpec& spec);

/// Children concatenated into their fathers in ascending cell id.
TrailingSystem merge_level(TrailingSystem&& sys, const Level& fine, const Level& coarse);

/// Dense Cholesky of everything still active, in node order.
FinalDenseFactor final_dense(TrailingSystem& sys);

Preconditioner factorize(const ProblemInstance& problem, const FactorizeOptions& options);

}  // namespace sgf
