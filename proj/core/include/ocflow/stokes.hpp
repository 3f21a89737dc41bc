#pragma once

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <array>
#include <functional>
#include <memory>
#include <string>

#include "ocflow/field.hpp"

namespace ocflow {

/// Structured Taylor-Hood triangulation over a W x H grid of vertices placed
/// at the pixel centers: one cell per pixel gap, each split along its (+1,+1)
/// diagonal. Velocity components are P2 (nodes = vertices plus edge
/// midpoints, which together form the (2W-1) x (2H-1) half-step grid);
/// pressure is P1 on the vertices. All queries are O(1) arithmetic.
class TriMesh {
 public:
  TriMesh(int width, int height, double spacing = 1.0);

  int width() const { return width_; }
  int height() const { return height_; }
  double spacing() const { return spacing_; }

  int n_vertices() const { return width_ * height_; }
  int p2_width() const { return 2 * width_ - 1; }
  int p2_height() const { return 2 * height_ - 1; }
  int n_p2_nodes() const { return p2_width() * p2_height(); }
  int n_cells() const { return (width_ - 1) * (height_ - 1); }
  int n_triangles() const { return 2 * n_cells(); }

  int vertex_id(int i, int j) const { return j * width_ + i; }
  int p2_node(int gx, int gy) const { return gy * p2_width() + gx; }
  bool p2_on_boundary(int gx, int gy) const {
    return gx == 0 || gy == 0 || gx == p2_width() - 1 || gy == p2_height() - 1;
  }

  /// Number of velocity DOFs per component after eliminating the Dirichlet
  /// boundary ring.
  int n_interior() const { return (p2_width() - 2) * (p2_height() - 2); }
  /// Interior DOF index of a P2 node, or -1 on the boundary.
  int interior_index(int gx, int gy) const {
    if (p2_on_boundary(gx, gy)) return -1;
    return (gy - 1) * (p2_width() - 2) + (gx - 1);
  }

  std::array<double, 2> p2_coords(int gx, int gy) const {
    return {0.5 * gx * spacing_, 0.5 * gy * spacing_};
  }

  /// Triangle t (0-based): cell t/2, lower half for even t, upper for odd.
  /// Local node order is v1, v2, v3, mid(v1,v2), mid(v2,v3), mid(v3,v1) with
  /// counterclockwise corners.
  struct TriangleRef {
    std::array<std::array<int, 2>, 6> p2_grid;         // (gx, gy) per local P2 node
    std::array<int, 3> vertices;                       // global vertex ids
    std::array<std::array<double, 2>, 3> corners;      // physical corner coords
  };
  TriangleRef triangle(int t) const;

 private:
  int width_ = 0;
  int height_ = 0;
  double spacing_ = 1.0;
};

/// Discretized generalized Stokes system
///   [ A  C^t ] [b]   [f]
///   [ C  0   ] [q] = [0]
/// with A = lambda x (two identical P2 stiffness blocks) on interior velocity
/// DOFs and C the divergence coupling. unit_A1 is the lambda-independent
/// stiffness the solver actually factors.
struct SaddleSystem {
  TriMesh mesh;
  Eigen::SparseMatrix<double> A1;       // lambda-scaled per-component block
  Eigen::SparseMatrix<double> unit_A1;  // A1 / lambda
  Eigen::SparseMatrix<double> C;        // n_vertices x (2 * n_interior)
  Eigen::VectorXd f;                    // 2 * n_interior load
  double lambda = 1.0;
  Eigen::VectorXd pressure_lumped;      // per-vertex lumped areas
};

struct StokesSolution {
  VectorField b;   // velocity at pixel centers, zero boundary ring
  ScalarField q;   // pressure at vertices, zero lumped-area mean
  double residual = 0.0;
  int iterations = 0;
  Eigen::VectorXd vx_nodes;  // full P2 grids of the velocity components,
  Eigen::VectorXd vy_nodes;  // boundary zeros included (diagnostics)
};

/// Pointwise samples of the Stokes right-hand side.
using RhsCallable = std::function<std::array<double, 2>(double x, double y)>;

/// Assemble stiffness, coupling, and load with a 6-point degree-4 triangle
/// rule. Velocity DOFs on the boundary are eliminated. The load is
/// -(mass matrix) x (nodal samples of f); P2 midpoint samples of a pixel-grid
/// f are taken by bilinear interpolation.
SaddleSystem assemble(const TriMesh& mesh, const VectorField& f, double lambda);

/// Same, but with exact nodal samples from a callable (manufactured cases).
SaddleSystem assemble(const TriMesh& mesh, const RhsCallable& f, double lambda);

/// Solve the saddle system with preconditioned MINRES (block-diagonal SPD
/// preconditioner: exact Cholesky of the unit velocity block, lumped pressure
/// mass) plus a rank-one pressure-consistency term inside the iteration.
/// Contract: relative residual of the full saddle system <= tol. max_iter <= 0
/// selects the default max(500, 10 sqrt(#unknowns)).
StokesSolution solve_saddle(const SaddleSystem& sys, double tol = 1e-8, int max_iter = 0);

/// assemble + solve_saddle + resample to pixel centers in one call.
StokesSolution stokes_flow_update(const VectorField& f, double lambda, double tol = 1e-8,
                                  int max_iter = 0);

/// Repeated-solve interface: the mesh matrices and the Cholesky factor of the
/// unit velocity block are built once (lazily, on the first nonzero load) and
/// reused across lambda values and right-hand sides.
class StokesSolver {
 public:
  StokesSolver(int width, int height, double spacing = 1.0);
  ~StokesSolver();
  StokesSolver(StokesSolver&&) noexcept;
  StokesSolver& operator=(StokesSolver&&) noexcept;

  StokesSolution flow_update(const VectorField& f, double lambda, double tol = 1e-8,
                             int max_iter = 0) const;

  const TriMesh& mesh() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Element stiffness of a single P2 triangle at unit lambda,
/// int grad N_i . grad N_j, local node order v1 v2 v3 m12 m23 m31.
std::array<std::array<double, 6>, 6> p2_element_stiffness(
    const std::array<std::array<double, 2>, 3>& corners);

/// Debug dump of the assembled full saddle matrix in Matrix Market
/// coordinate format.
void write_matrix_market(const SaddleSystem& sys, const std::string& path);

/// Element-quadrature L2 errors against exact fields (convergence studies).
double velocity_l2_error(const TriMesh& mesh, const Eigen::VectorXd& vx_nodes,
                         const Eigen::VectorXd& vy_nodes, const RhsCallable& exact);
double pressure_l2_error(const TriMesh& mesh, const ScalarField& q,
                         const std::function<double(double, double)>& exact);

}  // namespace ocflow
