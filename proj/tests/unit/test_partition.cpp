#include <doctest.h>

#include <algorithm>
#include <map>

#include "sgf/error.hpp"
#include "sgf/partition.hpp"
#include "sgf/problems.hpp"
#include "sgf/sparse.hpp"

using namespace sgf;

namespace {

CartesianGrid cube(Index n, Index components = 1) {
  CartesianGrid g;
  g.dims = {n, n, n};
  g.components = components;
  return g;
}

// Every vertex in exactly one cell, at every level.
void check_partition(const PartitionHierarchy& h, const CartesianGrid& g) {
  for (const Level& level : h.levels) {
    std::vector<int> hits(static_cast<std::size_t>(g.vertex_count()), 0);
    for (const Cell& c : level.cells) {
      REQUIRE(!c.vertex_ids.empty());
      for (Index v : c.vertex_ids) ++hits[static_cast<std::size_t>(v)];
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int k) { return k == 1; }));
  }
}

// Each coarse cell is exactly the union of its children.
void check_coarsening(const PartitionHierarchy& h) {
  for (std::size_t t = 0; t + 1 < h.levels.size(); ++t) {
    const Level& fine = h.levels[t];
    const Level& coarse = h.levels[t + 1];
    std::vector<std::vector<Index>> unions(coarse.cells.size());
    for (const Cell& c : fine.cells) {
      auto& u = unions[static_cast<std::size_t>(fine.father[static_cast<std::size_t>(c.id)])];
      u.insert(u.end(), c.vertex_ids.begin(), c.vertex_ids.end());
    }
    for (const Cell& d : coarse.cells) {
      auto u = unions[static_cast<std::size_t>(d.id)];
      std::sort(u.begin(), u.end());
      CHECK(u == d.vertex_ids);
    }
  }
}

}  // namespace

TEST_CASE("nested hierarchy on 17^3 is a partition and a coarsening") {
  const CartesianGrid g = cube(17);
  const PartitionHierarchy h = build_nested_hierarchy(g, 3);
  check_partition(h, g);
  check_coarsening(h);
  CHECK(h.levels.back().cells.size() == 1);
  CHECK(h.levels.back().father.empty());
}

TEST_CASE("nested cell kinds and typical sizes") {
  const CartesianGrid g = cube(17);
  const PartitionHierarchy h = build_nested_hierarchy(g, 3);
  const Level& l1 = h.levels[0];
  bool saw3 = false, saw2 = false, saw1 = false, saw0 = false;
  for (const Cell& c : l1.cells) {
    CHECK((c.kind == CellKind::Cell3) == (c.role == Role::Interior));
    const bool away = c.lo[0] > 0 && c.lo[1] > 0 && c.lo[2] > 0 && c.hi[0] < 15 && c.hi[1] < 15 && c.hi[2] < 15;
    if (!away) continue;
    const auto n = c.vertex_ids.size();
    switch (c.kind) {
      case CellKind::Cell3: CHECK(n == 8); saw3 = true; break;
      case CellKind::Cell2: CHECK(n == 4); saw2 = true; break;
      case CellKind::Cell1: CHECK(n == 2); saw1 = true; break;
      case CellKind::Cell0: CHECK(n == 1); saw0 = true; break;
      default: FAIL("general cell in nested hierarchy");
    }
  }
  CHECK((saw3 && saw2 && saw1 && saw0));
  // Second level: interior cubes of 5^3 vertices.
  const Level& l2 = h.levels[1];
  CHECK(l2.period == 6);
  const auto it = std::find_if(l2.cells.begin(), l2.cells.end(), [](const Cell& c) {
    return c.kind == CellKind::Cell3 && c.lo[0] == 6 && c.lo[1] == 6 && c.lo[2] == 6;
  });
  REQUIRE(it != l2.cells.end());
  CHECK(it->vertex_ids.size() == 125);
}

TEST_CASE("boundary-clipped cells keep their kind") {
  const CartesianGrid g = cube(10);
  const PartitionHierarchy h = build_nested_hierarchy(g, 3);
  // Along each axis: [0,1] [2] [3,4] [5] [6,7] [8] [9]; the last interval is
  // a one-vertex interior block and still counts as interior.
  const Level& l1 = h.levels[0];
  const Cell& corner = l1.cells.back();
  CHECK(corner.vertex_ids.size() == 1);
  CHECK(corner.kind == CellKind::Cell3);
}

TEST_CASE("nested hierarchy rejects grids without a level-1 cut") {
  CHECK_THROWS_AS(build_nested_hierarchy(cube(2), 3), Error);
  try {
    (void)build_nested_hierarchy(cube(2), 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooSmall);
  }
  CHECK_THROWS_AS(build_nested_hierarchy(cube(8), 1), Error);
}

TEST_CASE("level count grows by one per doubling") {
  const auto levels = [](Index n) { return build_nested_hierarchy(cube(n), 3).levels.size(); };
  const auto l16 = levels(16), l32 = levels(32), l64 = levels(64);
  CHECK(l32 == l16 + 1);
  CHECK(l64 == l32 + 1);
}

TEST_CASE("general hierarchy box sizes") {
  {
    const CartesianGrid g = cube(8);
    const PartitionHierarchy h = build_general_hierarchy(g, 4);
    REQUIRE(h.levels[0].cells.size() == 8);
    for (const Cell& c : h.levels[0].cells) {
      CHECK(c.vertex_ids.size() == 64);
      CHECK(c.kind == CellKind::General);
      CHECK(c.role == Role::Separator);
    }
    check_partition(h, g);
    check_coarsening(h);
  }
  {
    const CartesianGrid g = cube(9);
    const PartitionHierarchy h = build_general_hierarchy(g, 4);
    check_partition(h, g);
    check_coarsening(h);
    for (const Cell& c : h.levels[0].cells) {
      for (int a = 0; a < 3; ++a) {
        const Index w = c.hi[a] - c.lo[a] + 1;
        CHECK((w == 4 || w == 1));
      }
    }
  }
  {
    const CartesianGrid g = cube(24);
    const PartitionHierarchy h = build_general_hierarchy(g, 3);
    const auto it = std::find_if(h.levels[1].cells.begin(), h.levels[1].cells.end(),
                                 [](const Cell& c) { return c.lo[0] == 6 && c.lo[1] == 6 && c.lo[2] == 6; });
    REQUIRE(it != h.levels[1].cells.end());
    CHECK(it->vertex_ids.size() == 216);
  }
}

TEST_CASE("adjacency from matrix sparsity") {
  const ProblemInstance p = poisson7(9, 9, 9);
  const PartitionHierarchy h = build_nested_hierarchy(p.grid, 3);
  const Level& l1 = h.levels[0];

  // Diagonal matrix: no couplings.
  std::vector<Triplet> diag;
  for (Index i = 0; i < p.size(); ++i) diag.push_back({i, i, 1.0});
  CHECK(compute_adjacency(l1, p.grid, SparseMatrix::from_triplets(p.size(), p.size(), diag)).empty());

  const auto adj = compute_adjacency(l1, p.grid, p.matrix);
  // Brute-force oracle over all stored entries.
  const auto owner = l1.vertex_owner(p.grid.vertex_count());
  std::set<std::pair<CellId, CellId>> expect;
  for (Index i = 0; i < p.size(); ++i)
    for (Index k = p.matrix.row_ptr()[static_cast<std::size_t>(i)]; k < p.matrix.row_ptr()[static_cast<std::size_t>(i) + 1]; ++k) {
      const CellId a = owner[static_cast<std::size_t>(i)];
      const CellId b = owner[static_cast<std::size_t>(p.matrix.col_idx()[static_cast<std::size_t>(k)])];
      if (a != b) expect.insert({std::min(a, b), std::max(a, b)});
    }
  CHECK(adj == expect);
  for (const auto& [a, b] : adj) {
    CHECK(a < b);
    // Interior cells touch separators only.
    CHECK(!(l1.cells[static_cast<std::size_t>(a)].role == Role::Interior &&
            l1.cells[static_cast<std::size_t>(b)].role == Role::Interior));
    // Stencil couplings are a subset of the geometric neighbourhood.
    CHECK(l1.adjacent(a, b));
  }
}

TEST_CASE("expand_to_unknowns is component-major") {
  CartesianGrid g = cube(4, 3);
  Cell c;
  c.vertex_ids = {5, 9};
  const Index v = g.vertex_count();
  CHECK(expand_to_unknowns(c, g) == std::vector<Index>{5, 9, v + 5, v + 9, 2 * v + 5, 2 * v + 9});
  g.components = 1;
  CHECK(expand_to_unknowns(c, g) == std::vector<Index>{5, 9});

  const ProblemInstance beam = elasticity_hex_beam(1);
  const PartitionHierarchy h = build_nested_hierarchy(beam.grid, 3);
  for (const Cell& cell : h.levels[0].cells)
    CHECK(expand_to_unknowns(cell, beam.grid).size() == 3 * cell.vertex_ids.size());
}

TEST_CASE("debug dump lists every level") {
  const PartitionHierarchy h = build_nested_hierarchy(cube(7), 3);
  const std::string s = to_debug_json(h);
  CHECK(s.find("\"period\"") != std::string::npos);
  CHECK(s.find("interior") != std::string::npos);
}
