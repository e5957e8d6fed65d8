#include "sgf/block_matrix.hpp"

#include <numeric>

#include "sgf/error.hpp"
#include "sgf/sparse.hpp"

namespace sgf {

BlockMatrix::BlockMatrix(std::vector<Index> sizes, std::shared_ptr<ByteCounter> counter)
    : sizes_(std::move(sizes)),
      removed_(sizes_.size(), false),
      diag_(sizes_.size()),
      upper_(sizes_.size()),
      neighbors_(sizes_.size()),
      counter_(counter ? std::move(counter) : std::make_shared<ByteCounter>()) {
  for (std::size_t i = 0; i < sizes_.size(); ++i) {
    diag_[i] = DenseMatrix(sizes_[i], sizes_[i]);
    track_add(diag_[i]);
  }
}

BlockMatrix& BlockMatrix::operator=(BlockMatrix&& o) {
  if (this != &o) {
    release_all();
    sizes_ = std::move(o.sizes_);
    removed_ = std::move(o.removed_);
    diag_ = std::move(o.diag_);
    upper_ = std::move(o.upper_);
    neighbors_ = std::move(o.neighbors_);
    counter_ = std::move(o.counter_);
  }
  return *this;
}

BlockMatrix::~BlockMatrix() { release_all(); }

void BlockMatrix::release_all() {
  if (!counter_) return;
  counter_->sub(live_bytes());
  diag_.clear();
  upper_.clear();
}

std::size_t BlockMatrix::live_bytes() const {
  std::size_t total = 0;
  for (const auto& d : diag_) total += d.bytes();
  for (const auto& row : upper_)
    for (const auto& [j, b] : row) total += b.bytes();
  return total;
}

void BlockMatrix::set_diag(NodeId i, DenseMatrix d) {
  auto& slot = diag_[static_cast<std::size_t>(i)];
  if (d.rows() != size(i) || d.cols() != size(i)) throw Error(ErrorCode::ShapeMismatch, "diagonal block shape");
  track_sub(slot);
  slot = std::move(d);
  track_add(slot);
}

bool BlockMatrix::has_block(NodeId i, NodeId j) const {
  if (i == j) return !removed(i);
  return upper(std::min(i, j), std::max(i, j)) != nullptr;
}

const DenseMatrix* BlockMatrix::upper(NodeId i, NodeId j) const {
  const auto& row = upper_[static_cast<std::size_t>(i)];
  auto it = row.find(j);
  return it == row.end() ? nullptr : &it->second;
}

DenseMatrix* BlockMatrix::upper_mut(NodeId i, NodeId j) {
  auto& row = upper_[static_cast<std::size_t>(i)];
  auto it = row.find(j);
  return it == row.end() ? nullptr : &it->second;
}

DenseMatrix BlockMatrix::block(NodeId i, NodeId j) const {
  if (i == j) return diag(i);
  if (i < j) {
    const DenseMatrix* b = upper(i, j);
    return b ? *b : DenseMatrix(size(i), size(j));
  }
  const DenseMatrix* b = upper(j, i);
  return b ? b->transposed() : DenseMatrix(size(i), size(j));
}

void BlockMatrix::set_block(NodeId i, NodeId j, DenseMatrix b) {
  if (i == j) throw Error(ErrorCode::InvalidArgument, "set_block on the diagonal; use set_diag");
  if (b.rows() != size(i) || b.cols() != size(j)) throw Error(ErrorCode::ShapeMismatch, "coupling block shape");
  if (i > j) {
    std::swap(i, j);
    b = b.transposed();
  }
  auto& row = upper_[static_cast<std::size_t>(i)];
  auto it = row.find(j);
  if (it != row.end()) {
    track_sub(it->second);
    it->second = std::move(b);
    track_add(it->second);
  } else {
    track_add(b);
    row.emplace(j, std::move(b));
    neighbors_[static_cast<std::size_t>(i)].insert(j);
    neighbors_[static_cast<std::size_t>(j)].insert(i);
  }
}

void BlockMatrix::add_to_block(NodeId i, NodeId j, const DenseMatrix& b) {
  if (i == j) {
    diag_[static_cast<std::size_t>(i)] += b;
    return;
  }
  if (i > j) {
    add_to_block(j, i, b.transposed());
    return;
  }
  DenseMatrix* dst = upper_mut(i, j);
  if (dst) {
    *dst += b;
  } else {
    set_block(i, j, b);
  }
}

void BlockMatrix::gemm_update(NodeId i, NodeId j, const DenseMatrix& x, const DenseMatrix& y, double alpha) {
  if (i == j) {
    gemm_nt_update(diag_[static_cast<std::size_t>(i)], x, y, alpha);
    return;
  }
  if (i > j) {
    gemm_update(j, i, y, x, alpha);
    return;
  }
  DenseMatrix* dst = upper_mut(i, j);
  if (!dst) {
    set_block(i, j, DenseMatrix(size(i), size(j)));
    dst = upper_mut(i, j);
  }
  gemm_nt_update(*dst, x, y, alpha);
}

void BlockMatrix::remove_node(NodeId i) {
  const auto ui = static_cast<std::size_t>(i);
  for (NodeId j : neighbors_[ui]) {
    const NodeId lo = std::min(i, j), hi = std::max(i, j);
    auto& row = upper_[static_cast<std::size_t>(lo)];
    auto it = row.find(hi);
    track_sub(it->second);
    row.erase(it);
    neighbors_[static_cast<std::size_t>(j)].erase(i);
  }
  neighbors_[ui].clear();
  track_sub(diag_[ui]);
  diag_[ui] = DenseMatrix();
  removed_[ui] = true;
}

void BlockMatrix::resize_node(NodeId i, Index new_size) {
  const auto ui = static_cast<std::size_t>(i);
  sizes_[ui] = new_size;
  track_sub(diag_[ui]);
  diag_[ui] = DenseMatrix(new_size, new_size);
  track_add(diag_[ui]);
}

DenseMatrix BlockMatrix::to_dense(std::span<const NodeId> order) const {
  std::vector<Index> offset(order.size() + 1, 0);
  for (std::size_t k = 0; k < order.size(); ++k) offset[k + 1] = offset[k] + size(order[k]);
  DenseMatrix out(offset.back(), offset.back());
  for (std::size_t a = 0; a < order.size(); ++a) {
    if (removed(order[a])) continue;
    out.set_block(offset[a], offset[a], diag(order[a]));
    for (std::size_t b = a + 1; b < order.size(); ++b) {
      const NodeId i = order[a], j = order[b];
      if (!has_block(i, j)) continue;
      DenseMatrix blk = block(i, j);
      out.set_block(offset[a], offset[b], blk);
      out.set_block(offset[b], offset[a], blk.transposed());
    }
  }
  return out;
}

DenseMatrix BlockMatrix::to_dense() const {
  std::vector<NodeId> order(static_cast<std::size_t>(node_count()));
  std::iota(order.begin(), order.end(), NodeId{0});
  return to_dense(order);
}

BlockMatrix assemble_block_matrix(const SparseMatrix& a, std::span<const std::vector<Index>> node_unknowns,
                                  std::shared_ptr<ByteCounter> counter) {
  if (a.rows() != a.cols()) throw Error(ErrorCode::ShapeMismatch, "matrix must be square");
  if (!a.pattern_symmetric()) throw Error(ErrorCode::NonSymmetricPattern, "matrix sparsity is not symmetric");
  const Index n = a.rows();
  std::vector<NodeId> owner(static_cast<std::size_t>(n), -1);
  std::vector<Index> local(static_cast<std::size_t>(n), -1);
  std::vector<Index> sizes;
  for (std::size_t k = 0; k < node_unknowns.size(); ++k) {
    const auto& u = node_unknowns[k];
    for (std::size_t p = 0; p < u.size(); ++p) {
      if (u[p] < 0 || u[p] >= n || owner[u[p]] >= 0) {
        throw Error(ErrorCode::InvalidArgument, "node index sets must partition the unknowns");
      }
      owner[u[p]] = static_cast<NodeId>(k);
      local[u[p]] = static_cast<Index>(p);
    }
    sizes.push_back(static_cast<Index>(u.size()));
  }
  for (Index u = 0; u < n; ++u) {
    if (owner[u] < 0) throw Error(ErrorCode::InvalidArgument, "node index sets must cover every unknown");
  }
  BlockMatrix m(std::move(sizes), std::move(counter));
  std::vector<DenseMatrix> diag;
  diag.reserve(node_unknowns.size());
  for (std::size_t k = 0; k < node_unknowns.size(); ++k) diag.push_back(m.diag(static_cast<NodeId>(k)));
  for (Index r = 0; r < n; ++r) {
    const NodeId i = owner[r];
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const Index c = a.col_idx()[p];
      const NodeId j = owner[c];
      const double v = a.values()[p];
      if (i == j) {
        diag[static_cast<std::size_t>(i)](local[r], local[c]) = v;
      } else if (i < j) {
        DenseMatrix* b = m.upper_mut(i, j);
        if (!b) {
          m.set_block(i, j, DenseMatrix(m.size(i), m.size(j)));
          b = m.upper_mut(i, j);
        }
        (*b)(local[r], local[c]) = v;
      }
    }
  }
  for (std::size_t k = 0; k < diag.size(); ++k) m.set_diag(static_cast<NodeId>(k), std::move(diag[k]));
  return m;
}

}  // namespace sgf
