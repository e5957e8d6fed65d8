#include "sgf/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "sgf/error.hpp"

namespace sgf {

// ---------------------------------------------------------------------------
// Poisson

ProblemInstance poisson7(Index nx, Index ny, Index nz, Point3 spacing) {
  const std::array<Index, 3> n{nx, ny, nz};
  Point3 h{};
  for (int a = 0; a < 3; ++a) {
    if (n[a] < 1) throw Error(ErrorCode::InvalidArgument, "poisson7 dimensions must be >= 1");
    h[a] = spacing[a] > 0.0 ? spacing[a] : 1.0 / static_cast<double>(n[a] + 1);
  }
  ProblemInstance p;
  p.grid.dims = n;
  p.grid.spacing = h;
  p.grid.components = 1;
  p.label = "poisson7 " + std::to_string(nx) + "x" + std::to_string(ny) + "x" + std::to_string(nz);
  const Index nv = p.grid.vertex_count();
  const Point3 w{1.0 / (h[0] * h[0]), 1.0 / (h[1] * h[1]), 1.0 / (h[2] * h[2])};
  const double diag = 2.0 * (w[0] + w[1] + w[2]);

  std::vector<Index> row_ptr{0};
  std::vector<Index> cols;
  std::vector<double> vals;
  cols.reserve(static_cast<std::size_t>(7 * nv));
  vals.reserve(static_cast<std::size_t>(7 * nv));
  p.coords.reserve(static_cast<std::size_t>(nv));
  for (Index k = 0; k < nz; ++k)
    for (Index j = 0; j < ny; ++j)
      for (Index i = 0; i < nx; ++i) {
        const Index v = p.grid.vertex_id(i, j, k);
        auto push = [&](Index c, double val) {
          cols.push_back(c);
          vals.push_back(val);
        };
        if (k > 0) push(v - nx * ny, -w[2]);
        if (j > 0) push(v - nx, -w[1]);
        if (i > 0) push(v - 1, -w[0]);
        push(v, diag);
        if (i + 1 < nx) push(v + 1, -w[0]);
        if (j + 1 < ny) push(v + nx, -w[1]);
        if (k + 1 < nz) push(v + nx * ny, -w[2]);
        row_ptr.push_back(static_cast<Index>(cols.size()));
        p.coords.push_back({static_cast<double>(i + 1) * h[0], static_cast<double>(j + 1) * h[1],
                            static_cast<double>(k + 1) * h[2]});
      }
  p.matrix = SparseMatrix(nv, nv, std::move(row_ptr), std::move(cols), std::move(vals));
  p.rhs.assign(static_cast<std::size_t>(nv), 1.0);
  return p;
}

double poisson7_eigenvalue(const ProblemInstance& p, Index kx, Index ky, Index kz) {
  const std::array<Index, 3> k{kx, ky, kz};
  double lam = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double theta = std::numbers::pi * static_cast<double>(k[a]) / static_cast<double>(p.grid.dims[a] + 1);
    lam += (2.0 - 2.0 * std::cos(theta)) / (p.grid.spacing[a] * p.grid.spacing[a]);
  }
  return lam;
}

std::vector<double> poisson7_eigenvector(const ProblemInstance& p, Index kx, Index ky, Index kz) {
  const auto& d = p.grid.dims;
  std::array<std::vector<double>, 3> s;
  const std::array<Index, 3> k{kx, ky, kz};
  for (int a = 0; a < 3; ++a) {
    s[a].resize(static_cast<std::size_t>(d[a]));
    for (Index i = 0; i < d[a]; ++i) {
      s[a][i] = std::sin(std::numbers::pi * static_cast<double>(k[a] * (i + 1)) / static_cast<double>(d[a] + 1));
    }
  }
  std::vector<double> v(static_cast<std::size_t>(p.grid.vertex_count()));
  for (Index kk = 0; kk < d[2]; ++kk)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i) v[p.grid.vertex_id(i, j, kk)] = s[0][i] * s[1][j] * s[2][kk];
  const double nrm = norm2(v);
  for (double& x : v) x /= nrm;
  return v;
}

// ---------------------------------------------------------------------------
// Darcy

ProblemInstance darcy_tpfa(const ScalarField& field, Point3 spacing, Face dirichlet_face) {
  const auto& d = field.dims;
  if (d[0] < 1 || d[1] < 1 || d[2] < 1 || static_cast<Index>(field.values.size()) != field.count()) {
    throw Error(ErrorCode::InvalidArgument, "field dimensions do not match its values");
  }
  for (double v : field.values) {
    if (!(v > 0.0) || !std::isfinite(v)) throw Error(ErrorCode::NonPositiveField, "mobility must be positive");
  }
  for (double h : spacing) {
    if (!(h > 0.0)) throw Error(ErrorCode::InvalidArgument, "spacing must be positive");
  }
  ProblemInstance p;
  p.grid.dims = d;
  p.grid.spacing = spacing;
  p.grid.components = 1;
  p.label = "darcy " + std::to_string(d[0]) + "x" + std::to_string(d[1]) + "x" + std::to_string(d[2]);
  const Index n = p.grid.vertex_count();
  const Point3 area{spacing[1] * spacing[2], spacing[0] * spacing[2], spacing[0] * spacing[1]};

  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(7 * n));
  std::vector<double> diag(static_cast<std::size_t>(n), 0.0);
  p.rhs.assign(static_cast<std::size_t>(n), 0.0);
  for (Index k = 0; k < d[2]; ++k)
    for (Index j = 0; j < d[1]; ++j)
      for (Index i = 0; i < d[0]; ++i) {
        const Index v = p.grid.vertex_id(i, j, k);
        const double lv = field(i, j, k);
        const std::array<Index, 3> pos{i, j, k};
        for (int a = 0; a < 3; ++a) {
          if (pos[a] + 1 >= d[a]) continue;
          std::array<Index, 3> q = pos;
          ++q[a];
          const Index u = p.grid.vertex_id(q[0], q[1], q[2]);
          const double lu = field(q[0], q[1], q[2]);
          const double trans = 2.0 * lv * lu / (lv + lu) * area[a] / spacing[a];
          t.push_back({v, u, -trans});
          t.push_back({u, v, -trans});
          diag[v] += trans;
          diag[u] += trans;
        }
        p.coords.push_back({(static_cast<double>(i) + 0.5) * spacing[0], (static_cast<double>(j) + 0.5) * spacing[1],
                            (static_cast<double>(k) + 0.5) * spacing[2]});
      }

  const int axis = static_cast<int>(dirichlet_face) / 2;
  const bool at_min = static_cast<int>(dirichlet_face) % 2 == 0;
  const Index fixed = at_min ? 0 : d[axis] - 1;
  const Index inflow = at_min ? d[axis] - 1 : 0;
  constexpr double kBoundaryPressure = 1.0;
  constexpr double kInflowRate = 1.0;
  for (Index v = 0; v < n; ++v) {
    const auto pos = p.grid.vertex_position(v);
    if (pos[axis] == fixed) {
      const double trans = 2.0 * field.values[v] * area[axis] / spacing[axis];
      diag[v] += trans;
      p.rhs[v] += trans * kBoundaryPressure;
    }
    if (pos[axis] == inflow) p.rhs[v] += kInflowRate * area[axis];
  }
  for (Index v = 0; v < n; ++v) t.push_back({v, v, diag[v]});
  p.matrix = SparseMatrix::from_triplets(n, n, std::move(t));
  return p;
}

// ---------------------------------------------------------------------------
// Fields

ScalarField read_perm_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  ScalarField f;
  if (!(in >> f.dims[0] >> f.dims[1] >> f.dims[2])) {
    throw Error(ErrorCode::ParseError, path + ": missing 'cx cy cz' header");
  }
  for (Index a : f.dims) {
    if (a < 1) throw Error(ErrorCode::ParseError, path + ": dimensions must be >= 1");
  }
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorCode::ParseError, path + ": bad value '" + tok + "'");
    f.values.push_back(v);
  }
  if (static_cast<Index>(f.values.size()) != f.count()) {
    throw Error(ErrorCode::CountMismatch, path + ": expected " + std::to_string(f.count()) + " values, found " +
                                              std::to_string(f.values.size()));
  }
  return f;
}

void write_perm_field(const std::string& path, const ScalarField& field) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << field.dims[0] << ' ' << field.dims[1] << ' ' << field.dims[2] << '\n';
  out << std::setprecision(17);
  for (std::size_t i = 0; i < field.values.size(); ++i) {
    out << field.values[i] << ((i + 1) % 8 == 0 ? '\n' : ' ');
  }
  out << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

ScalarField synth_perm_field(std::array<Index, 3> dims, Index layers, double contrast, std::uint64_t seed) {
  for (Index a : dims) {
    if (a < 1) throw Error(ErrorCode::InvalidArgument, "field dimensions must be >= 1");
  }
  if (!(contrast >= 1.0)) throw Error(ErrorCode::InvalidArgument, "contrast must be >= 1");
  layers = std::clamp<Index>(layers, 1, dims[2]);
  ScalarField f;
  f.dims = dims;
  f.values.assign(static_cast<std::size_t>(f.count()), 1.0);
  if (contrast == 1.0) return f;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<int> freq(1, 3);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);

  std::vector<double> logv(f.values.size(), 0.0);
  for (Index layer = 0; layer < layers; ++layer) {
    const Index z0 = layer * dims[2] / layers;
    const Index z1 = (layer + 1) * dims[2] / layers;
    const bool smooth = layer % 2 == 0;
    struct Wave {
      double amp, fx, fy, fz, phi;
    };
    std::vector<Wave> waves;
    if (smooth) {
      for (int m = 0; m < 4; ++m) {
        waves.push_back({normal(rng), static_cast<double>(freq(rng)), static_cast<double>(freq(rng)),
                         static_cast<double>(freq(rng)), phase(rng)});
      }
    }
    for (Index k = z0; k < z1; ++k)
      for (Index j = 0; j < dims[1]; ++j)
        for (Index i = 0; i < dims[0]; ++i) {
          const std::size_t idx = static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k));
          if (smooth) {
            double s = 0.0;
            for (const auto& w : waves) {
              s += w.amp * std::sin(2.0 * std::numbers::pi *
                                        (w.fx * static_cast<double>(i) / static_cast<double>(dims[0]) +
                                         w.fy * static_cast<double>(j) / static_cast<double>(dims[1]) +
                                         w.fz * static_cast<double>(k) / static_cast<double>(dims[2])) +
                                    w.phi);
            }
            logv[idx] = s;
          } else {
            logv[idx] = normal(rng);
          }
        }
  }
  const auto [mn, mx] = std::minmax_element(logv.begin(), logv.end());
  const double lo = *mn;
  const double span = *mx - *mn;
  const double target = std::log(contrast);
  for (std::size_t i = 0; i < logv.size(); ++i) {
    f.values[i] = span > 0.0 ? std::exp((logv[i] - lo) / span * target) : 1.0;
  }
  return f;
}

ScalarField tile_field(const ScalarField& field, std::array<Index, 3> reps) {
  for (Index r : reps) {
    if (r < 1) throw Error(ErrorCode::InvalidArgument, "tile repetitions must be >= 1");
  }
  ScalarField out;
  for (int a = 0; a < 3; ++a) out.dims[a] = field.dims[a] * reps[a];
  out.values.resize(static_cast<std::size_t>(out.count()));
  for (Index k = 0; k < out.dims[2]; ++k)
    for (Index j = 0; j < out.dims[1]; ++j)
      for (Index i = 0; i < out.dims[0]; ++i) {
        out.values[static_cast<std::size_t>(i + out.dims[0] * (j + out.dims[1] * k))] =
            field(i % field.dims[0], j % field.dims[1], k % field.dims[2]);
      }
  return out;
}

// ---------------------------------------------------------------------------
// Elasticity

std::array<Point3, 8> hex_element_vertices(double h) {
  std::array<Point3, 8> v{};
  for (int a = 0; a < 8; ++a) {
    v[a] = {(a & 1) ? h : 0.0, (a & 2) ? h : 0.0, (a & 4) ? h : 0.0};
  }
  return v;
}

DenseMatrix hex_element_stiffness(double h, Lame lame) {
  DenseMatrix k(24, 24);
  const double g = 1.0 / std::sqrt(3.0);
  const double detj = h * h * h / 8.0;
  for (int gp = 0; gp < 8; ++gp) {
    const double xi = (gp & 1) ? g : -g;
    const double eta = (gp & 2) ? g : -g;
    const double zeta = (gp & 4) ? g : -g;
    // physical gradients of the shape functions
    std::array<Point3, 8> grad{};
    for (int a = 0; a < 8; ++a) {
      const double sa = (a & 1) ? 1.0 : -1.0;
      const double ta = (a & 2) ? 1.0 : -1.0;
      const double ua = (a & 4) ? 1.0 : -1.0;
      const double s = 2.0 / h / 8.0;
      grad[a] = {s * sa * (1.0 + eta * ta) * (1.0 + zeta * ua), s * ta * (1.0 + xi * sa) * (1.0 + zeta * ua),
                 s * ua * (1.0 + xi * sa) * (1.0 + eta * ta)};
    }
    // strain-displacement rows: xx, yy, zz, xy, yz, zx (engineering shear)
    DenseMatrix bm(6, 24);
    for (int a = 0; a < 8; ++a) {
      const auto& d = grad[a];
      bm(0, 0 * 8 + a) = d[0];
      bm(1, 1 * 8 + a) = d[1];
      bm(2, 2 * 8 + a) = d[2];
      bm(3, 0 * 8 + a) = d[1];
      bm(3, 1 * 8 + a) = d[0];
      bm(4, 1 * 8 + a) = d[2];
      bm(4, 2 * 8 + a) = d[1];
      bm(5, 2 * 8 + a) = d[0];
      bm(5, 0 * 8 + a) = d[2];
    }
    DenseMatrix dmat(6, 6);
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) dmat(r, c) = lame.lambda;
      dmat(r, r) += 2.0 * lame.mu;
      dmat(r + 3, r + 3) = lame.mu;
    }
    DenseMatrix db = matmul(dmat, bm);
    DenseMatrix contrib = matmul_tn(bm, db);
    contrib *= detj;
    k += contrib;
  }
  // exact symmetry for the assembled matrix
  for (Index i = 0; i < 24; ++i)
    for (Index j = i + 1; j < 24; ++j) {
      const double s = 0.5 * (k(i, j) + k(j, i));
      k(i, j) = s;
      k(j, i) = s;
    }
  return k;
}

DenseMatrix rigid_body_modes(std::span<const Point3> coords, Point3 center) {
  const Index nv = static_cast<Index>(coords.size());
  DenseMatrix r(3 * nv, 6);
  for (Index v = 0; v < nv; ++v) {
    const double x = coords[v][0] - center[0];
    const double y = coords[v][1] - center[1];
    const double z = coords[v][2] - center[2];
    for (Index c = 0; c < 3; ++c) r(c * nv + v, c) = 1.0;
    // rotation about x: (0, -z, y)
    r(1 * nv + v, 3) = -z;
    r(2 * nv + v, 3) = y;
    // about y: (z, 0, -x)
    r(0 * nv + v, 4) = z;
    r(2 * nv + v, 4) = -x;
    // about z: (-y, x, 0)
    r(0 * nv + v, 5) = -y;
    r(1 * nv + v, 5) = x;
  }
  return r;
}

BeamMesh elasticity_hex_mesh(Index refinement, Lame left, Lame right) {
  if (refinement < 1) throw Error(ErrorCode::InvalidArgument, "refinement must be >= 1");
  const Index ex = 8 * refinement;
  const Index ey = refinement;
  const Index ez = refinement;
  const double h = 1.0 / static_cast<double>(refinement);
  BeamMesh mesh;
  mesh.grid.dims = {ex + 1, ey + 1, ez + 1};
  mesh.grid.spacing = {h, h, h};
  mesh.grid.components = 3;
  const Index nv = mesh.grid.vertex_count();
  mesh.coords.resize(static_cast<std::size_t>(nv));
  for (Index v = 0; v < nv; ++v) {
    const auto pos = mesh.grid.vertex_position(v);
    mesh.coords[v] = {static_cast<double>(pos[0]) * h, static_cast<double>(pos[1]) * h,
                      static_cast<double>(pos[2]) * h};
  }
  const DenseMatrix k_left = hex_element_stiffness(h, left);
  const DenseMatrix k_right = hex_element_stiffness(h, right);
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(ex * ey * ez * 576));
  for (Index k = 0; k < ez; ++k)
    for (Index j = 0; j < ey; ++j)
      for (Index i = 0; i < ex; ++i) {
        const double center_x = (static_cast<double>(i) + 0.5) * h;
        const DenseMatrix& ke = center_x < 4.0 ? k_left : k_right;
        std::array<Index, 24> dof{};
        for (int a = 0; a < 8; ++a) {
          const Index v = mesh.grid.vertex_id(i + (a & 1), j + ((a >> 1) & 1), k + ((a >> 2) & 1));
          for (int c = 0; c < 3; ++c) dof[c * 8 + a] = c * nv + v;
        }
        for (int r = 0; r < 24; ++r)
          for (int c = 0; c < 24; ++c) t.push_back({dof[r], dof[c], ke(r, c)});
      }
  mesh.stiffness = SparseMatrix::from_triplets(3 * nv, 3 * nv, std::move(t));
  return mesh;
}

ProblemInstance elasticity_hex_beam(Index refinement, Lame left, Lame right) {
  BeamMesh mesh = elasticity_hex_mesh(refinement, left, right);
  const auto& full = mesh.grid;
  const Index nv_full = full.vertex_count();
  ProblemInstance p;
  p.grid.dims = {full.dims[0] - 1, full.dims[1], full.dims[2]};
  p.grid.spacing = full.spacing;
  p.grid.components = 3;
  p.label = "elasticity beam r=" + std::to_string(refinement);
  const Index nv = p.grid.vertex_count();

  // free unknown index for every full unknown, -1 when clamped
  std::vector<Index> map(static_cast<std::size_t>(3 * nv_full), -1);
  p.coords.resize(static_cast<std::size_t>(nv));
  for (Index v = 0; v < nv; ++v) {
    const auto pos = p.grid.vertex_position(v);
    const Index fv = full.vertex_id(pos[0] + 1, pos[1], pos[2]);
    p.coords[v] = mesh.coords[fv];
    for (Index c = 0; c < 3; ++c) map[c * nv_full + fv] = c * nv + v;
  }
  std::vector<Triplet> t;
  const auto& a = mesh.stiffness;
  for (Index r = 0; r < a.rows(); ++r) {
    const Index fr = map[r];
    if (fr < 0) continue;
    for (Index q = a.row_ptr()[r]; q < a.row_ptr()[r + 1]; ++q) {
      const Index fc = map[a.col_idx()[q]];
      if (fc >= 0) t.push_back({fr, fc, a.values()[q]});
    }
  }
  p.matrix = SparseMatrix::from_triplets(3 * nv, 3 * nv, std::move(t));

  p.rhs.assign(static_cast<std::size_t>(3 * nv), 0.0);
  const double h = full.spacing[0];
  const Index ny = p.grid.dims[1];
  const Index nz = p.grid.dims[2];
  for (Index k = 0; k < nz; ++k)
    for (Index j = 0; j < ny; ++j) {
      const double wy = (j == 0 || j == ny - 1) ? 0.5 : 1.0;
      const double wz = (k == 0 || k == nz - 1) ? 0.5 : 1.0;
      const Index v = p.grid.vertex_id(p.grid.dims[0] - 1, j, k);
      p.rhs[2 * nv + v] = -wy * wz * h * h;
    }
  return p;
}

// ---------------------------------------------------------------------------
// Matrix Market

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<double> split_numbers(const std::string& line, char sep) {
  std::vector<double> out;
  std::string tok;
  std::stringstream ss(line);
  while (std::getline(ss, tok, sep)) {
    std::size_t used = 0;
    out.push_back(std::stod(tok, &used));
  }
  return out;
}

// Sorted distinct values, merging entries closer than tol.
std::vector<double> distinct(std::vector<double> v, double tol) {
  std::sort(v.begin(), v.end());
  std::vector<double> out;
  for (double x : v)
    if (out.empty() || x - out.back() > tol) out.push_back(x);
  return out;
}

}  // namespace

ProblemInstance read_mtx(const std::string& matrix_path, const std::string& coords_path) {
  std::ifstream in(matrix_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + matrix_path);
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, matrix_path + ": empty file");
  std::stringstream header(lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate") {
    throw Error(ErrorCode::ParseError, matrix_path + ": expected a coordinate Matrix Market banner");
  }
  if (field != "real" && field != "integer") throw Error(ErrorCode::ParseError, matrix_path + ": field must be real");
  const bool sym = symmetry == "symmetric";
  if (!sym && symmetry != "general") throw Error(ErrorCode::ParseError, matrix_path + ": unsupported symmetry");
  while (std::getline(in, line) && (line.empty() || line[0] == '%')) {
  }
  Index rows = 0, cols = 0, nnz = 0;
  {
    std::stringstream ss(line);
    if (!(ss >> rows >> cols >> nnz) || rows < 1 || rows != cols || nnz < 0) {
      throw Error(ErrorCode::ParseError, matrix_path + ": bad size line");
    }
  }
  std::vector<Triplet> t;
  t.reserve(static_cast<std::size_t>(sym ? 2 * nnz : nnz));
  for (Index e = 0; e < nnz; ++e) {
    Index r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v)) throw Error(ErrorCode::ParseError, matrix_path + ": truncated entry list");
    if (r < 1 || c < 1 || r > rows || c > cols) throw Error(ErrorCode::ParseError, matrix_path + ": index out of range");
    t.push_back({r - 1, c - 1, v});
    if (sym && r != c) t.push_back({c - 1, r - 1, v});
  }
  SparseMatrix a = SparseMatrix::from_triplets(rows, cols, std::move(t));
  if (!a.symmetric(1e-12)) throw Error(ErrorCode::NotSymmetric, matrix_path + ": matrix is not symmetric");

  std::ifstream cin(coords_path);
  if (!cin) throw Error(ErrorCode::IoError, "cannot open " + coords_path);
  std::vector<std::pair<Index, Point3>> pts;
  while (std::getline(cin, line)) {
    if (line.empty()) continue;
    std::vector<double> nums;
    try {
      nums = split_numbers(line, ',');
    } catch (const std::exception&) {
      if (pts.empty()) continue;  // header row
      throw Error(ErrorCode::ParseError, coords_path + ": bad line '" + line + "'");
    }
    if (nums.size() != 4) throw Error(ErrorCode::ParseError, coords_path + ": expected id,x,y,z");
    pts.push_back({static_cast<Index>(nums[0]), {nums[1], nums[2], nums[3]}});
  }
  const Index nv = static_cast<Index>(pts.size());
  if (nv == 0 || rows % nv != 0) {
    throw Error(ErrorCode::DimensionMismatch, "matrix size " + std::to_string(rows) +
                                                  " is not a multiple of the coordinate count " + std::to_string(nv));
  }
  std::vector<Point3> coords(static_cast<std::size_t>(nv));
  std::vector<bool> seen(static_cast<std::size_t>(nv), false);
  for (const auto& [id, x] : pts) {
    if (id < 0 || id >= nv || seen[id]) throw Error(ErrorCode::ParseError, coords_path + ": ids must be 0..V-1");
    seen[id] = true;
    coords[id] = x;
  }

  ProblemInstance p;
  p.grid.components = rows / nv;
  std::array<std::vector<double>, 3> axis;
  for (int d = 0; d < 3; ++d) {
    std::vector<double> vals;
    for (const auto& c : coords) vals.push_back(c[d]);
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    const double tol = 1e-9 * std::max(1.0, *mx - *mn);
    axis[d] = distinct(std::move(vals), tol);
    p.grid.dims[d] = static_cast<Index>(axis[d].size());
    p.grid.spacing[d] =
        axis[d].size() > 1 ? (axis[d].back() - axis[d].front()) / static_cast<double>(axis[d].size() - 1) : 1.0;
  }
  if (p.grid.vertex_count() != nv) {
    throw Error(ErrorCode::DimensionMismatch, "coordinates do not form a full lattice");
  }
  // grid vertex g holds file vertex vertex_of[g]
  std::vector<Index> vertex_of(static_cast<std::size_t>(nv), -1);
  for (Index v = 0; v < nv; ++v) {
    std::array<Index, 3> pos{};
    for (int d = 0; d < 3; ++d) {
      const auto& ax = axis[d];
      auto it = std::lower_bound(ax.begin(), ax.end(), coords[v][d] - 1e-9 * std::max(1.0, ax.back() - ax.front()));
      pos[d] = static_cast<Index>(it - ax.begin());
    }
    const Index g = p.grid.vertex_id(pos[0], pos[1], pos[2]);
    if (vertex_of[g] >= 0) throw Error(ErrorCode::DimensionMismatch, "two coordinates map to one lattice point");
    vertex_of[g] = v;
  }
  const Index comps = p.grid.components;
  p.original_order.resize(static_cast<std::size_t>(rows));
  std::vector<Index> new_index(static_cast<std::size_t>(rows));
  for (Index c = 0; c < comps; ++c)
    for (Index g = 0; g < nv; ++g) {
      p.original_order[c * nv + g] = c * nv + vertex_of[g];
      new_index[c * nv + vertex_of[g]] = c * nv + g;
    }
  std::vector<Triplet> pt;
  pt.reserve(static_cast<std::size_t>(a.nnz()));
  for (Index r = 0; r < rows; ++r)
    for (Index q = a.row_ptr()[r]; q < a.row_ptr()[r + 1]; ++q)
      pt.push_back({new_index[r], new_index[a.col_idx()[q]], a.values()[q]});
  p.matrix = SparseMatrix::from_triplets(rows, rows, std::move(pt));
  p.coords.resize(static_cast<std::size_t>(nv));
  for (Index g = 0; g < nv; ++g) p.coords[g] = coords[vertex_of[g]];
  p.rhs.assign(static_cast<std::size_t>(rows), 1.0);
  p.label = "mtx " + matrix_path;
  return p;
}

void write_mtx(const std::string& path, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  Index lower_nnz = 0;
  for (Index r = 0; r < a.rows(); ++r)
    for (Index q = a.row_ptr()[r]; q < a.row_ptr()[r + 1]; ++q)
      if (a.col_idx()[q] <= r) ++lower_nnz;
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.rows() << ' ' << a.cols() << ' ' << lower_nnz << '\n';
  out << std::setprecision(17);
  for (Index r = 0; r < a.rows(); ++r)
    for (Index q = a.row_ptr()[r]; q < a.row_ptr()[r + 1]; ++q)
      if (a.col_idx()[q] <= r) out << r + 1 << ' ' << a.col_idx()[q] + 1 << ' ' << a.values()[q] << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

void write_coords_csv(const std::string& path, std::span<const Point3> coords) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << "id,x,y,z\n" << std::setprecision(17);
  for (std::size_t i = 0; i < coords.size(); ++i)
    out << i << ',' << coords[i][0] << ',' << coords[i][1] << ',' << coords[i][2] << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

}  // namespace sgf
