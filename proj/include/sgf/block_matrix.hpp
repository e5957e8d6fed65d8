#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <span>
#include <vector>

#include "sgf/dense.hpp"

namespace sgf {

class SparseMatrix;

using NodeId = Index;

/// Live and peak bytes held by block storage. Shared between the block
/// matrices of consecutive levels so the peak covers the merge step.
struct ByteCounter {
  std::size_t live = 0;
  std::size_t peak = 0;
  void add(std::size_t n) {
    live += n;
    peak = std::max(peak, live);
  }
  void sub(std::size_t n) { live -= n; }
};

/// Symmetric block-sparse matrix. Diagonal blocks are stored in full; for
/// i < j only block (i, j) is stored and (j, i) is its transpose.
class BlockMatrix {
 public:
  BlockMatrix() = default;
  BlockMatrix(std::vector<Index> sizes, std::shared_ptr<ByteCounter> counter = nullptr);
  BlockMatrix(const BlockMatrix&) = delete;
  BlockMatrix& operator=(const BlockMatrix&) = delete;
  BlockMatrix(BlockMatrix&&) = default;
  BlockMatrix& operator=(BlockMatrix&&);
  ~BlockMatrix();

  Index node_count() const noexcept { return static_cast<Index>(sizes_.size()); }
  Index size(NodeId i) const { return sizes_[static_cast<std::size_t>(i)]; }
  bool removed(NodeId i) const { return removed_[static_cast<std::size_t>(i)]; }

  const DenseMatrix& diag(NodeId i) const { return diag_[static_cast<std::size_t>(i)]; }
  void set_diag(NodeId i, DenseMatrix d);

  bool has_block(NodeId i, NodeId j) const;
  /// Block (i, j) with shape size(i) x size(j); zero if absent.
  DenseMatrix block(NodeId i, NodeId j) const;
  /// Stored block for i < j, or nullptr.
  const DenseMatrix* upper(NodeId i, NodeId j) const;
  DenseMatrix* upper_mut(NodeId i, NodeId j);
  /// Replaces block (i, j), i != j. Stores the transpose when i > j.
  void set_block(NodeId i, NodeId j, DenseMatrix b);
  /// Block (i, j) += b, creating it when absent.
  void add_to_block(NodeId i, NodeId j, const DenseMatrix& b);
  /// Block (i, j) += alpha * x * y^T, creating it when absent. For i == j the
  /// diagonal block is updated.
  void gemm_update(NodeId i, NodeId j, const DenseMatrix& x, const DenseMatrix& y, double alpha);

  const std::set<NodeId>& neighbors(NodeId i) const { return neighbors_[static_cast<std::size_t>(i)]; }

  /// Drops the node's diagonal and all its couplings.
  void remove_node(NodeId i);
  /// Changes the node size; the caller must reset its diagonal and couplings.
  void resize_node(NodeId i, Index new_size);

  std::size_t live_bytes() const;
  std::shared_ptr<ByteCounter> counter() const { return counter_; }

  /// Dense matrix of the given nodes in the given order.
  DenseMatrix to_dense(std::span<const NodeId> order) const;
  DenseMatrix to_dense() const;

 private:
  void track_add(const DenseMatrix& m) { counter_->add(m.bytes()); }
  void track_sub(const DenseMatrix& m) { counter_->sub(m.bytes()); }
  void release_all();

  std::vector<Index> sizes_;
  std::vector<bool> removed_;
  std::vector<DenseMatrix> diag_;
  std::vector<std::map<NodeId, DenseMatrix>> upper_;
  std::vector<std::set<NodeId>> neighbors_;
  std::shared_ptr<ByteCounter> counter_;
};

/// Block matrix of `a` for the given node index sets, which must partition
/// the unknowns. Throws NonSymmetricPattern when the sparsity of `a` is not
/// structurally symmetric.
BlockMatrix assemble_block_matrix(const SparseMatrix& a, std::span<const std::vector<Index>> node_unknowns,
                                  std::shared_ptr<ByteCounter> counter = nullptr);

}  // namespace sgf
