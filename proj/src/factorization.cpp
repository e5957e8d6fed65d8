#include "sgf/factorization.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "sgf/error.hpp"

namespace sgf {

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::NestAllAll: return "nest-all-all";
    case Scheme::Nest2All: return "nest-2-all";
    case Scheme::Nest22: return "nest-2-2";
    case Scheme::GenAllAll: return "gen-all-all";
  }
  return "?";
}

const char* to_string(CompressionMode m) {
  switch (m) {
    case CompressionMode::Off: return "exact";
    case CompressionMode::Polynomial: return "polynomial";
    case CompressionMode::LowRankEquivalent: return "lowrank-equiv";
  }
  return "?";
}

namespace {

std::string normalize(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '-' || c == '_') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

}  // namespace

Scheme parse_scheme(const std::string& s) {
  const std::string n = normalize(s);
  if (n == "nestallall") return Scheme::NestAllAll;
  if (n == "nest2all") return Scheme::Nest2All;
  if (n == "nest22") return Scheme::Nest22;
  if (n == "genallall") return Scheme::GenAllAll;
  throw Error(ErrorCode::ConfigError, "unknown scheme '" + s + "'");
}

CompressionMode parse_mode(const std::string& s) {
  const std::string n = normalize(s);
  if (n == "polynomial" || n == "poly") return CompressionMode::Polynomial;
  if (n == "lowrankequiv" || n == "lowrank") return CompressionMode::LowRankEquivalent;
  if (n == "exact" || n == "off") return CompressionMode::Off;
  throw Error(ErrorCode::ConfigError, "unknown mode '" + s + "'");
}

// ---------------------------------------------------------------------------
// RankTrace

std::string RankTrace::to_json() const {
  nlohmann::json j;
  j["entries"] = nlohmann::json::array();
  for (const auto& e : entries) j["entries"].push_back({e.level, e.node, e.size, e.rank});
  return j.dump();
}

RankTrace RankTrace::from_json(const std::string& text) {
  RankTrace t;
  try {
    const auto j = nlohmann::json::parse(text);
    for (const auto& e : j.at("entries")) {
      t.entries.push_back({e.at(0).get<Index>(), e.at(1).get<NodeId>(), e.at(2).get<Index>(), e.at(3).get<Index>()});
    }
  } catch (const nlohmann::json::exception& ex) {
    throw Error(ErrorCode::ParseError, std::string("rank trace: ") + ex.what());
  }
  return t;
}

void RankTrace::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << to_json() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

RankTrace RankTrace::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

// ---------------------------------------------------------------------------

Index default_b(Scheme scheme, int degree) {
  if (scheme != Scheme::GenAllAll) return 3;
  return degree <= 0 ? 3 : (degree == 1 ? 4 : 5);
}

PartitionHierarchy build_hierarchy(const CartesianGrid& grid, Scheme scheme, Index b) {
  return scheme == Scheme::GenAllAll ? build_general_hierarchy(grid, b) : build_nested_hierarchy(grid, b);
}

Index TrailingSystem::active_unknowns() const {
  Index total = 0;
  for (const auto& n : nodes) total += static_cast<Index>(n.active.size());
  return total;
}

TrailingSystem make_initial_system(const ProblemInstance& problem, const Level& level0, const PolyBasis& basis,
                                   std::shared_ptr<ByteCounter> counter) {
  if (problem.grid.unknown_count() != problem.matrix.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "grid has " + std::to_string(problem.grid.unknown_count()) +
                                                  " unknowns but the matrix has " +
                                                  std::to_string(problem.matrix.rows()) + " rows");
  }
  if (basis.Pi.rows() != problem.matrix.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "polynomial basis rows differ from the matrix size");
  }
  TrailingSystem sys;
  sys.level = 0;
  std::vector<std::vector<Index>> sets;
  sets.reserve(level0.cells.size());
  for (const auto& cell : level0.cells) {
    NodeState node;
    node.id = cell.id;
    node.unknowns = expand_to_unknowns(cell, problem.grid);
    node.active = node.unknowns;
    node.phi = basis.Pi.select_rows(node.active);
    node.role = cell.role;
    node.kind = cell.kind;
    sets.push_back(node.unknowns);
    sys.nodes.push_back(std::move(node));
  }
  sys.matrix = assemble_block_matrix(problem.matrix, sets, std::move(counter));
  return sys;
}

EliminationFactor eliminate_node(TrailingSystem& sys, NodeId p) {
  auto& m = sys.matrix;
  auto& node = sys.nodes[static_cast<std::size_t>(p)];
  EliminationFactor f;
  f.node = p;
  f.level = sys.level;
  f.slots = node.active;
  f.L = cholesky(m.diag(p));

  const std::vector<NodeId> nbrs(m.neighbors(p).begin(), m.neighbors(p).end());
  std::vector<DenseMatrix> e;
  e.reserve(nbrs.size());
  for (NodeId q : nbrs) e.push_back(tri_solve(f.L, m.block(q, p), TriSolveMode::RightLt));
  for (std::size_t a = 0; a < nbrs.size(); ++a)
    for (std::size_t b = a; b < nbrs.size(); ++b) m.gemm_update(nbrs[a], nbrs[b], e[a], e[b], -1.0);

  for (NodeId q : nbrs) {
    const auto& s = sys.nodes[static_cast<std::size_t>(q)].active;
    f.neighbor_slots.insert(f.neighbor_slots.end(), s.begin(), s.end());
  }
  f.E = vstack(e);
  if (f.E.cols() != static_cast<Index>(f.slots.size())) f.E = DenseMatrix(0, static_cast<Index>(f.slots.size()));

  m.remove_node(p);
  node.active.clear();
  node.phi = DenseMatrix(0, node.phi.cols());
  return f;
}

CompressionFactor compress_node(TrailingSystem& sys, NodeId p, const CompressionSpec& spec) {
  auto& m = sys.matrix;
  auto& node = sys.nodes[static_cast<std::size_t>(p)];
  const Index size = m.size(p);
  CompressionFactor f;
  f.node = p;
  f.level = sys.level;
  f.slots = node.active;
  f.L = cholesky(m.diag(p));

  const std::vector<NodeId> nbrs(m.neighbors(p).begin(), m.neighbors(p).end());
  std::vector<DenseMatrix> scaled;
  scaled.reserve(nbrs.size());
  for (NodeId q : nbrs) scaled.push_back(tri_solve(f.L, m.block(p, q), TriSolveMode::LeftL));
  DenseMatrix lt_phi = matmul_tn(f.L.L, node.phi);

  RangeBasis rb;
  if (spec.mode == CompressionMode::LowRankEquivalent) {
    Index forced = spec.forced_rank.value_or(size);
    if (forced > size) {
      std::cerr << "warning: forced rank " << forced << " exceeds node size " << size << " (level " << sys.level
                << ", node " << p << "); clipping\n";
      forced = size;
    }
    DenseMatrix row = scaled.empty() ? DenseMatrix(size, 0) : hstack(scaled);
    rb = range_basis(row, spec.rank_tol, forced);
  } else {
    std::vector<DenseMatrix> parts;
    parts.reserve(nbrs.size() + 1);
    parts.push_back(lt_phi);
    for (std::size_t k = 0; k < nbrs.size(); ++k) {
      if (spec.full_coupling && spec.full_coupling(nbrs[k])) {
        parts.push_back(scaled[k]);
      } else {
        parts.push_back(matmul(scaled[k], sys.nodes[static_cast<std::size_t>(nbrs[k])].phi));
      }
    }
    rb = range_basis(hstack(parts), spec.rank_tol);
  }
  const Index r = rb.rank;
  f.retained = r;
  const DenseMatrix q1 = rb.Q.block(0, 0, size, r);
  f.Q = std::move(rb.Q);

  node.phi = matmul_tn(q1, lt_phi);
  node.active.resize(static_cast<std::size_t>(r));
  if (r == 0) {
    m.remove_node(p);
    return f;
  }
  std::vector<DenseMatrix> couplings;
  couplings.reserve(nbrs.size());
  for (const auto& s : scaled) couplings.push_back(matmul_tn(q1, s));
  m.resize_node(p, r);
  m.set_diag(p, DenseMatrix::identity(r));
  for (std::size_t k = 0; k < nbrs.size(); ++k) m.set_block(p, nbrs[k], std::move(couplings[k]));
  return f;
}

TrailingSystem merge_level(TrailingSystem&& sys, const Level& fine, const Level& coarse) {
  const std::size_t nf = coarse.cells.size();
  if (fine.father.size() != sys.nodes.size()) {
    throw Error(ErrorCode::ShapeMismatch, "father map does not match the node count");
  }
  std::vector<std::vector<NodeId>> children(nf);
  for (std::size_t i = 0; i < sys.nodes.size(); ++i) children[static_cast<std::size_t>(fine.father[i])].push_back(static_cast<NodeId>(i));

  TrailingSystem out;
  out.level = sys.level + 1;
  std::vector<Index> offset(sys.nodes.size(), 0);
  std::vector<Index> sizes(nf, 0);
  out.nodes.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    NodeState& father = out.nodes[f];
    father.id = static_cast<NodeId>(f);
    father.role = coarse.cells[f].role;
    father.kind = coarse.cells[f].kind;
    std::vector<DenseMatrix> phis;
    for (NodeId c : children[f]) {
      NodeState& child = sys.nodes[static_cast<std::size_t>(c)];
      offset[static_cast<std::size_t>(c)] = sizes[f];
      sizes[f] += static_cast<Index>(child.active.size());
      father.unknowns.insert(father.unknowns.end(), child.unknowns.begin(), child.unknowns.end());
      father.active.insert(father.active.end(), child.active.begin(), child.active.end());
      phis.push_back(std::move(child.phi));
    }
    father.phi = vstack(phis);
  }

  out.matrix = BlockMatrix(sizes, sys.matrix.counter());
  std::vector<DenseMatrix> diag(nf);
  for (std::size_t f = 0; f < nf; ++f) diag[f] = DenseMatrix(sizes[f], sizes[f]);
  const BlockMatrix& old = sys.matrix;
  for (NodeId i = 0; i < old.node_count(); ++i) {
    if (old.removed(i) || old.size(i) == 0) continue;
    const auto fi = static_cast<std::size_t>(fine.father[static_cast<std::size_t>(i)]);
    const Index oi = offset[static_cast<std::size_t>(i)];
    diag[fi].set_block(oi, oi, old.diag(i));
    for (NodeId j : old.neighbors(i)) {
      if (j < i) continue;
      const DenseMatrix& blk = *old.upper(i, j);
      const auto fj = static_cast<std::size_t>(fine.father[static_cast<std::size_t>(j)]);
      const Index oj = offset[static_cast<std::size_t>(j)];
      if (fi == fj) {
        diag[fi].set_block(oi, oj, blk);
        diag[fi].set_block(oj, oi, blk.transposed());
        continue;
      }
      const NodeId lo = static_cast<NodeId>(std::min(fi, fj));
      const NodeId hi = static_cast<NodeId>(std::max(fi, fj));
      DenseMatrix* dst = out.matrix.upper_mut(lo, hi);
      if (!dst) {
        out.matrix.set_block(lo, hi, DenseMatrix(sizes[static_cast<std::size_t>(lo)], sizes[static_cast<std::size_t>(hi)]));
        dst = out.matrix.upper_mut(lo, hi);
      }
      if (fi < fj) {
        dst->set_block(oi, oj, blk);
      } else {
        dst->set_block(oj, oi, blk.transposed());
      }
    }
  }
  for (std::size_t f = 0; f < nf; ++f) out.matrix.set_diag(static_cast<NodeId>(f), std::move(diag[f]));
  sys.matrix = BlockMatrix();
  return out;
}

FinalDenseFactor final_dense(TrailingSystem& sys) {
  FinalDenseFactor f;
  f.level = sys.level;
  std::vector<NodeId> order;
  for (const auto& n : sys.nodes) {
    if (n.active.empty() || sys.matrix.removed(n.id)) continue;
    order.push_back(n.id);
    f.perm.insert(f.perm.end(), n.active.begin(), n.active.end());
  }
  f.L = cholesky(sys.matrix.to_dense(order));
  for (NodeId id : order) {
    sys.matrix.remove_node(id);
    sys.nodes[static_cast<std::size_t>(id)].active.clear();
  }
  return f;
}

namespace {

bool selected_for_compression(Scheme scheme, CellKind kind) {
  switch (scheme) {
    case Scheme::NestAllAll: return kind == CellKind::Cell1 || kind == CellKind::Cell2;
    case Scheme::Nest2All:
    case Scheme::Nest22: return kind == CellKind::Cell2;
    case Scheme::GenAllAll: return true;
  }
  return false;
}

Index max_active(const TrailingSystem& sys) {
  Index m = 0;
  for (const auto& n : sys.nodes) m = std::max(m, static_cast<Index>(n.active.size()));
  return m;
}

std::string describe(const RankEntry& e) {
  return "(level " + std::to_string(e.level) + ", node " + std::to_string(e.node) + ", size " +
         std::to_string(e.size) + ")";
}

}  // namespace

Preconditioner factorize(const ProblemInstance& problem, const FactorizeOptions& options) {
  if (options.degree < 0 || options.degree > 2) throw Error(ErrorCode::InvalidArgument, "degree must be 0, 1 or 2");
  if (options.mode == CompressionMode::LowRankEquivalent && !options.replay) {
    throw Error(ErrorCode::ConfigError, "low-rank-equivalent mode needs a rank trace to replay");
  }
  if (!(options.rank_tol > 0.0 && options.rank_tol < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "rank_tol must lie in (0, 1)");
  }
  const Index b = options.b > 0 ? options.b : default_b(options.scheme, options.degree);
  const PartitionHierarchy h = build_hierarchy(problem.grid, options.scheme, b);
  const PolyBasis basis = build_polynomial_basis(problem.coords, options.degree, problem.components());
  const bool nested = options.scheme != Scheme::GenAllAll;

  const std::uint64_t flops0 = flop_count();
  auto counter = std::make_shared<ByteCounter>();
  TrailingSystem sys = make_initial_system(problem, h.levels[0], basis, counter);
  std::vector<ElementaryFactor> factors;
  FactorStats stats;
  std::size_t cursor = 0;
  if (options.record) options.record->entries.clear();

  for (Index t = 0;; ++t) {
    const Level& level = h.levels[static_cast<std::size_t>(t)];
    LevelStats ls;
    ls.level = t;
    ls.nodes = static_cast<Index>(sys.nodes.size());
    ls.active_unknowns = sys.active_unknowns();
    ls.max_node_size = max_active(sys);
    const bool top = level.cells.size() == 1;
    const bool shrink_done = options.early_final && t > 0 && ls.active_unknowns < stats.max_node_size;
    if (top || shrink_done) {
      FinalDenseFactor f = final_dense(sys);
      stats.final_dense_size = static_cast<Index>(f.perm.size());
      factors.emplace_back(std::move(f));
      stats.per_level.push_back(ls);
      stats.levels = t + 1;
      break;
    }
    stats.max_node_size = std::max(stats.max_node_size, ls.max_node_size);

    if (nested) {
      for (auto& node : sys.nodes) {
        if (node.role != Role::Interior || node.active.empty()) continue;
        factors.emplace_back(eliminate_node(sys, node.id));
        ++ls.eliminated;
      }
    }

    const bool compress_here =
        options.mode != CompressionMode::Off && (!nested || t >= options.skip_first_levels);
    if (compress_here) {
      for (auto& node : sys.nodes) {
        if (!selected_for_compression(options.scheme, node.kind) || node.active.empty()) continue;
        const NodeId p = node.id;
        const Index size = static_cast<Index>(node.active.size());
        CompressionSpec spec;
        spec.mode = options.mode;
        spec.rank_tol = options.rank_tol;
        if (options.scheme == Scheme::Nest22) {
          spec.full_coupling = [&sys, &level, p](NodeId q) {
            const CellKind k = sys.nodes[static_cast<std::size_t>(q)].kind;
            return (k == CellKind::Cell0 || k == CellKind::Cell1) && level.adjacent(p, q);
          };
        }
        if (options.mode == CompressionMode::LowRankEquivalent) {
          const RankEntry want{t, p, size, 0};
          if (cursor >= options.replay->entries.size()) {
            throw Error(ErrorCode::TraceMismatch, "rank trace exhausted at " + describe(want));
          }
          const RankEntry& got = options.replay->entries[cursor++];
          if (got.level != t || got.node != p || got.size != size) {
            throw Error(ErrorCode::TraceMismatch, "expected " + describe(want) + " but the trace holds " +
                                                      describe(got) + " at entry " + std::to_string(cursor - 1));
          }
          spec.forced_rank = got.rank;
        }
        CompressionFactor f = compress_node(sys, p, spec);
        ls.ranks.push_back(f.retained);
        if (options.record && options.mode == CompressionMode::Polynomial) {
          options.record->entries.push_back({t, p, size, f.retained});
        }
        factors.emplace_back(std::move(f));
        ++ls.compressed;
      }
      ls.max_after_compression = max_active(sys);
      stats.max_compressed_size = std::max(stats.max_compressed_size, ls.max_after_compression);
    } else {
      ls.max_after_compression = max_active(sys);
    }
    stats.per_level.push_back(ls);
    sys = merge_level(std::move(sys), level, h.levels[static_cast<std::size_t>(t + 1)]);
  }
  if (options.mode == CompressionMode::LowRankEquivalent && cursor != options.replay->entries.size()) {
    throw Error(ErrorCode::TraceMismatch, "rank trace has " + std::to_string(options.replay->entries.size()) +
                                              " entries but only " + std::to_string(cursor) + " were replayed");
  }
  stats.flops_factorize = flop_count() - flops0;
  stats.peak_block_bytes = counter->peak;
  return Preconditioner(problem.matrix.rows(), std::move(factors), std::move(stats));
}

}  // namespace sgf
