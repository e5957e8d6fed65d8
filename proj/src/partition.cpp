#include "sgf/partition.hpp"

#include <algorithm>
#include <json.hpp>

#include "sgf/error.hpp"
#include "sgf/sparse.hpp"

namespace sgf {

void CartesianGrid::validate() const {
  for (int a = 0; a < 3; ++a) {
    if (dims[a] < 1) throw Error(ErrorCode::InvalidArgument, "grid dimension must be >= 1");
    if (!(spacing[a] > 0.0)) throw Error(ErrorCode::InvalidArgument, "grid spacing must be > 0");
  }
  if (components < 1) throw Error(ErrorCode::InvalidArgument, "components must be >= 1");
}

const char* to_string(CellKind kind) {
  switch (kind) {
    case CellKind::Cell0: return "cell0";
    case CellKind::Cell1: return "cell1";
    case CellKind::Cell2: return "cell2";
    case CellKind::Cell3: return "cell3";
    case CellKind::General: return "general";
  }
  return "?";
}

const char* to_string(Role role) { return role == Role::Interior ? "interior" : "separator"; }

std::vector<CellId> Level::vertex_owner(Index vertex_count) const {
  std::vector<CellId> owner(static_cast<std::size_t>(vertex_count), -1);
  for (const auto& c : cells)
    for (Index v : c.vertex_ids) owner[static_cast<std::size_t>(v)] = c.id;
  return owner;
}

bool Level::adjacent(CellId a, CellId b) const {
  return adjacency.count({std::min(a, b), std::max(a, b)}) > 0;
}

namespace {

std::vector<AxisInterval> nested_axis(Index n, Index d) {
  std::vector<AxisInterval> out;
  Index start = 0;
  for (Index s = d - 1; s < n; s += d) {
    if (s > start) out.push_back({start, s - 1, false});
    out.push_back({s, s, true});
    start = s + 1;
  }
  if (start < n) out.push_back({start, n - 1, false});
  return out;
}

std::vector<AxisInterval> general_axis(Index n, Index d) {
  std::vector<AxisInterval> out;
  for (Index s = 0; s < n; s += d) out.push_back({s, std::min(n, s + d) - 1, false});
  return out;
}

Index containing_interval(const std::vector<AxisInterval>& axis, Index x) {
  auto it = std::upper_bound(axis.begin(), axis.end(), x,
                             [](Index v, const AxisInterval& iv) { return v < iv.lo; });
  return static_cast<Index>(it - axis.begin()) - 1;
}

Level make_level(const CartesianGrid& grid, Index d, bool nested) {
  Level level;
  level.period = d;
  for (int a = 0; a < 3; ++a)
    level.axes[a] = nested ? nested_axis(grid.dims[a], d) : general_axis(grid.dims[a], d);
  const auto& ax = level.axes[0];
  const auto& ay = level.axes[1];
  const auto& az = level.axes[2];
  const Index nix = static_cast<Index>(ax.size());
  const Index niy = static_cast<Index>(ay.size());
  const Index niz = static_cast<Index>(az.size());
  level.cells.reserve(static_cast<std::size_t>(nix * niy * niz));
  for (Index iz = 0; iz < niz; ++iz) {
    for (Index iy = 0; iy < niy; ++iy) {
      for (Index ix = 0; ix < nix; ++ix) {
        Cell c;
        c.id = static_cast<CellId>(level.cells.size());
        const std::array<const AxisInterval*, 3> iv{&ax[ix], &ay[iy], &az[iz]};
        int seps = 0;
        for (int a = 0; a < 3; ++a) {
          c.lo[a] = iv[a]->lo;
          c.hi[a] = iv[a]->hi;
          seps += iv[a]->separator ? 1 : 0;
        }
        if (nested) {
          c.kind = static_cast<CellKind>(3 - seps);
          c.role = seps == 0 ? Role::Interior : Role::Separator;
        } else {
          c.kind = CellKind::General;
          c.role = Role::Separator;
        }
        for (Index k = c.lo[2]; k <= c.hi[2]; ++k)
          for (Index j = c.lo[1]; j <= c.hi[1]; ++j)
            for (Index i = c.lo[0]; i <= c.hi[0]; ++i) c.vertex_ids.push_back(grid.vertex_id(i, j, k));
        level.cells.push_back(std::move(c));
      }
    }
  }
  for (Index iz = 0; iz < niz; ++iz)
    for (Index iy = 0; iy < niy; ++iy)
      for (Index ix = 0; ix < nix; ++ix) {
        const CellId self = ix + nix * (iy + niy * iz);
        for (Index dz = -1; dz <= 1; ++dz)
          for (Index dy = -1; dy <= 1; ++dy)
            for (Index dx = -1; dx <= 1; ++dx) {
              const Index jx = ix + dx, jy = iy + dy, jz = iz + dz;
              if (jx < 0 || jy < 0 || jz < 0 || jx >= nix || jy >= niy || jz >= niz) continue;
              const CellId other = jx + nix * (jy + niy * jz);
              if (other > self) level.adjacency.insert({self, other});
            }
      }
  return level;
}

void link_fathers(Level& fine, const Level& coarse) {
  fine.father.resize(fine.cells.size());
  const Index ncx = static_cast<Index>(coarse.axes[0].size());
  const Index ncy = static_cast<Index>(coarse.axes[1].size());
  for (const auto& c : fine.cells) {
    std::array<Index, 3> idx{};
    for (int a = 0; a < 3; ++a) idx[a] = containing_interval(coarse.axes[a], c.lo[a]);
    fine.father[static_cast<std::size_t>(c.id)] = idx[0] + ncx * (idx[1] + ncy * idx[2]);
  }
}

PartitionHierarchy build(const CartesianGrid& grid, Index b, bool nested) {
  grid.validate();
  PartitionHierarchy h;
  h.nested = nested;
  h.b = b;
  for (Index d = b;; d *= 2) {
    Level level = make_level(grid, d, nested);
    if (h.levels.empty() && level.cells.size() == 1) {
      throw Error(ErrorCode::GridTooSmall, "no cutting plane fits at level 1 with b = " + std::to_string(b));
    }
    if (!h.levels.empty()) link_fathers(h.levels.back(), level);
    const bool top = level.cells.size() == 1;
    h.levels.push_back(std::move(level));
    if (top) break;
  }
  return h;
}

}  // namespace

PartitionHierarchy build_nested_hierarchy(const CartesianGrid& grid, Index b) {
  if (b <= 1) throw Error(ErrorCode::InvalidArgument, "nested partition needs b > 1");
  return build(grid, b, true);
}

PartitionHierarchy build_general_hierarchy(const CartesianGrid& grid, Index b) {
  if (b < 2) throw Error(ErrorCode::InvalidArgument, "general partition needs b >= 2");
  return build(grid, b, false);
}

std::set<std::pair<CellId, CellId>> compute_adjacency(std::span<const CellId> owner,
                                                      const SparseMatrix& a) {
  if (static_cast<Index>(owner.size()) != a.rows()) {
    throw Error(ErrorCode::ShapeMismatch, "owner map length differs from matrix size");
  }
  std::set<std::pair<CellId, CellId>> adj;
  for (Index r = 0; r < a.rows(); ++r) {
    const CellId cr = owner[static_cast<std::size_t>(r)];
    if (cr < 0) continue;
    for (Index p = a.row_ptr()[r]; p < a.row_ptr()[r + 1]; ++p) {
      const CellId cc = owner[static_cast<std::size_t>(a.col_idx()[p])];
      if (cc < 0 || cc == cr || a.values()[p] == 0.0) continue;
      adj.insert({std::min(cr, cc), std::max(cr, cc)});
    }
  }
  return adj;
}

std::set<std::pair<CellId, CellId>> compute_adjacency(const Level& level, const CartesianGrid& grid,
                                                      const SparseMatrix& a) {
  std::vector<CellId> owner(static_cast<std::size_t>(grid.unknown_count()), -1);
  for (const auto& c : level.cells)
    for (Index u : expand_to_unknowns(c, grid)) owner[static_cast<std::size_t>(u)] = c.id;
  return compute_adjacency(owner, a);
}

std::vector<Index> expand_to_unknowns(const Cell& cell, const CartesianGrid& grid) {
  const Index nv = grid.vertex_count();
  std::vector<Index> out;
  out.reserve(cell.vertex_ids.size() * static_cast<std::size_t>(grid.components));
  for (Index c = 0; c < grid.components; ++c)
    for (Index v : cell.vertex_ids) out.push_back(c * nv + v);
  return out;
}

std::string to_debug_json(const PartitionHierarchy& h) {
  nlohmann::json j;
  j["nested"] = h.nested;
  j["b"] = h.b;
  j["levels"] = nlohmann::json::array();
  for (const auto& level : h.levels) {
    nlohmann::json lj;
    lj["period"] = level.period;
    lj["cells"] = nlohmann::json::array();
    for (const auto& c : level.cells) {
      nlohmann::json cj;
      cj["id"] = c.id;
      cj["lo"] = c.lo;
      cj["hi"] = c.hi;
      cj["kind"] = to_string(c.kind);
      cj["role"] = to_string(c.role);
      cj["size"] = c.vertex_ids.size();
      if (!level.father.empty()) cj["father"] = level.father[static_cast<std::size_t>(c.id)];
      lj["cells"].push_back(std::move(cj));
    }
    j["levels"].push_back(std::move(lj));
  }
  return j.dump(1);
}

}  // namespace sgf
