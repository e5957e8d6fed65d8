#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sgf/partition.hpp"
#include "sgf/sparse.hpp"

namespace sgf {

using Point3 = std::array<double, 3>;

struct ProblemInstance {
  SparseMatrix matrix;
  std::vector<Point3> coords;  ///< one per grid vertex, x-fastest
  CartesianGrid grid;
  std::vector<double> rhs;
  std::string label;
  /// Unknown u of this instance is row original_order[u] of the source file.
  /// Empty for generated problems.
  std::vector<Index> original_order;

  Index components() const noexcept { return grid.components; }
  Index size() const noexcept { return matrix.rows(); }
};

/// 7-point Laplacian on the interior vertices of an (nx+1) x (ny+1) x (nz+1)
/// cell box with zero Dirichlet data. Non-positive spacing entries default to
/// 1/(n+1) along that axis. Vertex (i,j,k) sits at ((i+1)h1, (j+1)h2, (k+1)h3).
ProblemInstance poisson7(Index nx, Index ny, Index nz, Point3 spacing = {0.0, 0.0, 0.0});

/// Analytic eigenvalue of poisson7 for mode (p, q, s), 1-based.
double poisson7_eigenvalue(const ProblemInstance& p, Index kx, Index ky, Index kz);
/// Product-of-sines eigenvector, unit 2-norm.
std::vector<double> poisson7_eigenvector(const ProblemInstance& p, Index kx, Index ky, Index kz);

struct ScalarField {
  std::array<Index, 3> dims{0, 0, 0};
  std::vector<double> values;  ///< x-fastest

  Index count() const noexcept { return dims[0] * dims[1] * dims[2]; }
  double operator()(Index i, Index j, Index k) const {
    return values[static_cast<std::size_t>(i + dims[0] * (j + dims[1] * k))];
  }
};

enum class Face { XMin, XMax, YMin, YMax, ZMin, ZMax };

/// Cell-centered two-point flux discretization of -div(lambda grad p).
/// Transmissibilities are harmonic means times face area over distance. The
/// pressure is fixed to 1 on `dirichlet_face` (folded into the diagonal and
/// the right-hand side) and a unit inflow is imposed on the opposite face.
ProblemInstance darcy_tpfa(const ScalarField& field, Point3 spacing = {1.0, 1.0, 1.0},
                           Face dirichlet_face = Face::XMin);

/// ASCII field: "cx cy cz" then cx*cy*cz positive values, x-fastest.
ScalarField read_perm_field(const std::string& path);
void write_perm_field(const std::string& path, const ScalarField& field);

/// Layered log-normal field. Horizontal bands along z alternate between a
/// smooth sinusoidal log-field and an uncorrelated one; log values are mapped
/// affinely so that max/min equals `contrast`.
ScalarField synth_perm_field(std::array<Index, 3> dims, Index layers, double contrast, std::uint64_t seed);

ScalarField tile_field(const ScalarField& field, std::array<Index, 3> reps);

struct Lame {
  double lambda = 1.0;
  double mu = 1.0;
};

/// Stiffness of one trilinear cube element of side h, 2x2x2 Gauss rule.
/// Degrees of freedom are component-major: index c*8 + a, with local vertex
/// a = ax + 2 ay + 4 az.
DenseMatrix hex_element_stiffness(double h, Lame lame);

/// Local vertex offsets matching hex_element_stiffness.
std::array<Point3, 8> hex_element_vertices(double h);

/// Six rigid body displacement fields sampled at `coords`, component-major
/// (3V x 6): three translations then rotations about x, y, z through `center`.
DenseMatrix rigid_body_modes(std::span<const Point3> coords, Point3 center = {0.0, 0.0, 0.0});

/// Cantilever of 8r x r x r cube elements of side 1/r. Elements whose center
/// has x < 4 use `left`, the rest `right`.
struct BeamMesh {
  CartesianGrid grid;  ///< all vertices, components = 3
  std::vector<Point3> coords;
  SparseMatrix stiffness;  ///< before any boundary condition
};
BeamMesh elasticity_hex_mesh(Index refinement, Lame left = {1.0, 1.0}, Lame right = {50.0, 50.0});

/// Beam with the x = 0 face clamped (those unknowns removed) and a downward
/// traction on the x = 8 face in the right-hand side.
ProblemInstance elasticity_hex_beam(Index refinement, Lame left = {1.0, 1.0}, Lame right = {50.0, 50.0});

/// Symmetric coordinate Matrix Market file plus "id,x,y,z" coordinates. The
/// coordinates must form a full lattice; unknowns are reordered to grid order
/// (component-major) and the permutation is kept in original_order.
ProblemInstance read_mtx(const std::string& matrix_path, const std::string& coords_path);
void write_mtx(const std::string& path, const SparseMatrix& a);
void write_coords_csv(const std::string& path, std::span<const Point3> coords);

}  // namespace sgf
