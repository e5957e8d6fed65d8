#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sgf/block_matrix.hpp"
#include "sgf/dense.hpp"

namespace sgf {

/// Block Cholesky step G = [[L, 0], [E, I]] on (node slots, neighbor slots).
struct EliminationFactor {
  NodeId node = 0;
  Index level = 0;
  std::vector<Index> slots;
  CholeskyFactor L;
  std::vector<Index> neighbor_slots;  ///< concatenated neighbor slots, ascending neighbor id
  DenseMatrix E;  ///< neighbor_slots.size() x slots.size(), A_NB L^{-T}
};

/// Compression step diag(L Q, I) on the node slots. After the step the node
/// keeps the first `retained` slots.
struct CompressionFactor {
  NodeId node = 0;
  Index level = 0;
  std::vector<Index> slots;
  CholeskyFactor L;
  DenseMatrix Q;  ///< square orthogonal
  Index retained = 0;
};

/// Exact Cholesky of everything still active, on slots `perm`.
struct FinalDenseFactor {
  Index level = 0;
  std::vector<Index> perm;
  CholeskyFactor L;
};

using ElementaryFactor = std::variant<EliminationFactor, CompressionFactor, FinalDenseFactor>;

struct LevelStats {
  Index level = 0;
  Index nodes = 0;
  Index active_unknowns = 0;  ///< at the start of the level
  Index max_node_size = 0;    ///< largest active node at the start of the level
  Index eliminated = 0;
  Index compressed = 0;
  Index max_after_compression = 0;
  std::vector<Index> ranks;  ///< retained rank of each compression, in order
};

struct FactorStats {
  std::uint64_t flops_factorize = 0;
  std::size_t peak_block_bytes = 0;
  Index max_node_size = 0;        ///< largest node encountered before the final dense stage
  Index max_compressed_size = 0;  ///< largest active node after any compression step
  Index levels = 0;               ///< hierarchy levels visited
  Index final_dense_size = 0;
  std::vector<LevelStats> per_level;
};

/// Ordered product of elementary factors F_1 ... F_K with
/// A_l = F_1 ... F_K F_K^T ... F_1^T.
class Preconditioner {
 public:
  Preconditioner() = default;
  Preconditioner(Index n, std::vector<ElementaryFactor> factors, FactorStats stats);

  Index size() const noexcept { return n_; }
  const std::vector<ElementaryFactor>& factors() const noexcept { return factors_; }
  const FactorStats& stats() const noexcept { return stats_; }

  /// A_l^{-1} x
  std::vector<double> apply_inverse(std::span<const double> x) const;
  /// A_l x
  std::vector<double> apply_operator(std::span<const double> x) const;
  /// H x with H = F_K^{-1} ... F_1^{-1}, so that A_l^{-1} = H^T H.
  std::vector<double> apply_half_inverse(std::span<const double> x) const;
  /// H^T x
  std::vector<double> apply_half_inverse_transpose(std::span<const double> x) const;

  /// Flops of one apply_inverse call.
  std::uint64_t flops_apply() const noexcept { return flops_apply_; }
  std::size_t factor_bytes() const noexcept;

  /// Levels, per-level counts, ranks and counters.
  std::string metadata_json() const;

 private:
  void check_length(std::size_t len) const;
  void forward_inverse(std::vector<double>& w) const;
  void backward_inverse_transpose(std::vector<double>& w) const;

  Index n_ = 0;
  std::vector<ElementaryFactor> factors_;
  FactorStats stats_;
  std::uint64_t flops_apply_ = 0;
};

}  // namespace sgf
