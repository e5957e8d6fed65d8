#pragma once

#include <array>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sgf/dense.hpp"

namespace sgf {

class SparseMatrix;

/// Vertex lattice. Vertex ids are x-fastest: v = i + nx*(j + ny*k).
struct CartesianGrid {
  std::array<Index, 3> dims{1, 1, 1};
  std::array<double, 3> spacing{1.0, 1.0, 1.0};
  Index components = 1;

  Index vertex_count() const noexcept { return dims[0] * dims[1] * dims[2]; }
  Index unknown_count() const noexcept { return vertex_count() * components; }
  Index vertex_id(Index i, Index j, Index k) const noexcept { return i + dims[0] * (j + dims[1] * k); }
  std::array<Index, 3> vertex_position(Index v) const noexcept {
    return {v % dims[0], (v / dims[0]) % dims[1], v / (dims[0] * dims[1])};
  }
  /// Throws InvalidArgument when a dimension, spacing or component count is invalid.
  void validate() const;
};

enum class CellKind { Cell0, Cell1, Cell2, Cell3, General };
enum class Role { Interior, Separator };

const char* to_string(CellKind kind);
const char* to_string(Role role);

using CellId = Index;

struct Cell {
  CellId id = 0;
  std::vector<Index> vertex_ids;  ///< ascending
  CellKind kind = CellKind::General;
  Role role = Role::Separator;
  std::array<Index, 3> lo{};  ///< inclusive box extents in vertex coordinates
  std::array<Index, 3> hi{};
};

/// Closed interval of vertex coordinates along one axis.
struct AxisInterval {
  Index lo = 0;
  Index hi = 0;
  bool separator = false;
};

struct Level {
  Index period = 0;  ///< d = 2^(t-1) b
  std::vector<Cell> cells;  ///< cells[i].id == i
  std::vector<CellId> father;  ///< empty on the top level
  std::set<std::pair<CellId, CellId>> adjacency;  ///< pairs (i, j) with i < j
  std::array<std::vector<AxisInterval>, 3> axes;

  /// Owning cell of every vertex.
  std::vector<CellId> vertex_owner(Index vertex_count) const;
  bool adjacent(CellId a, CellId b) const;
};

struct PartitionHierarchy {
  bool nested = true;
  Index b = 0;
  std::vector<Level> levels;  ///< levels[0] is the finest; the last has one cell
};

/// Nested-dissection hierarchy. At level t with d = 2^(t-1) b, the vertex
/// coordinate j along an axis is a separator plane when (j+1) % d == 0, so
/// interior blocks hold d-1 vertices per axis. A cell is a k-cell where k is
/// 3 minus the number of axes along which it sits in a separator plane.
PartitionHierarchy build_nested_hierarchy(const CartesianGrid& grid, Index b);

/// Buffer-free hierarchy of axis-aligned boxes with side d = 2^(t-1) b.
PartitionHierarchy build_general_hierarchy(const CartesianGrid& grid, Index b);

/// Pairs of distinct cells coupled by an off-diagonal entry of `a`.
/// owner[u] is the cell holding unknown u, or -1 for inactive unknowns.
std::set<std::pair<CellId, CellId>> compute_adjacency(std::span<const CellId> owner,
                                                      const SparseMatrix& a);
/// Same, with ownership derived from the level's cells.
std::set<std::pair<CellId, CellId>> compute_adjacency(const Level& level, const CartesianGrid& grid,
                                                      const SparseMatrix& a);

/// Unknown indices of a cell, component-major: all component-0 entries, then
/// component 1, and so on (u = c*V + v).
std::vector<Index> expand_to_unknowns(const Cell& cell, const CartesianGrid& grid);

/// Diagnostic dump: per level, cell id, extents, kind, role, size, father.
std::string to_debug_json(const PartitionHierarchy& h);

}  // namespace sgf
