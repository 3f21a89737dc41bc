#include "ocflow/stokes.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <vector>

#include "ocflow/resample.hpp"

namespace ocflow {

namespace {

// 6-point degree-4 triangle rule (two symmetric orbits), weights sum to 1.
constexpr int kNQuad = 6;
constexpr double kQa1 = 0.44594849091596488632;
constexpr double kQw1 = 0.22338158967801146570;
constexpr double kQa2 = 0.09157621350977074346;
constexpr double kQw2 = 0.10995174365532186764;

struct QuadPoint {
  double xi, eta, weight;
};

constexpr std::array<QuadPoint, kNQuad> kQuad = {{
    {kQa1, kQa1, kQw1},
    {1.0 - 2.0 * kQa1, kQa1, kQw1},
    {kQa1, 1.0 - 2.0 * kQa1, kQw1},
    {kQa2, kQa2, kQw2},
    {1.0 - 2.0 * kQa2, kQa2, kQw2},
    {kQa2, 1.0 - 2.0 * kQa2, kQw2},
}};

// P2 shape functions in barycentric form; local order v1 v2 v3 m12 m23 m31.
std::array<double, 6> p2_shape(double xi, double eta) {
  const double l1 = 1.0 - xi - eta;
  const double l2 = xi;
  const double l3 = eta;
  return {l1 * (2.0 * l1 - 1.0), l2 * (2.0 * l2 - 1.0), l3 * (2.0 * l3 - 1.0),
          4.0 * l1 * l2,         4.0 * l2 * l3,         4.0 * l3 * l1};
}

// Reference-coordinate gradients (d/dxi, d/deta).
std::array<std::array<double, 2>, 6> p2_shape_grad(double xi, double eta) {
  const double l1 = 1.0 - xi - eta;
  const double l2 = xi;
  const double l3 = eta;
  return {{{-(4.0 * l1 - 1.0), -(4.0 * l1 - 1.0)},
           {4.0 * l2 - 1.0, 0.0},
           {0.0, 4.0 * l3 - 1.0},
           {4.0 * (l1 - l2), -4.0 * l2},
           {4.0 * l3, 4.0 * l2},
           {-4.0 * l3, 4.0 * (l1 - l3)}}};
}

std::array<double, 3> p1_shape(double xi, double eta) { return {1.0 - xi - eta, xi, eta}; }

struct ElementMatrices {
  // per-geometry element integrals (unit lambda)
  std::array<std::array<double, 6>, 6> stiffness;
  std::array<std::array<double, 6>, 6> mass;
  std::array<std::array<double, 6>, 3> div_x;  // int (dN_i/dx) psi_j, rows: pressure node
  std::array<std::array<double, 6>, 3> div_y;
  double area = 0.0;
};

ElementMatrices element_matrices(const std::array<std::array<double, 2>, 3>& corners) {
  const double j11 = corners[1][0] - corners[0][0];
  const double j21 = corners[1][1] - corners[0][1];
  const double j12 = corners[2][0] - corners[0][0];
  const double j22 = corners[2][1] - corners[0][1];
  const double det = j11 * j22 - j12 * j21;
  if (det <= 0.0) throw Error("stokes: degenerate or mis-oriented triangle");
  // columns of J^{-T}: physical gradient = J^{-T} * reference gradient
  const double it11 = j22 / det;
  const double it12 = -j21 / det;
  const double it21 = -j12 / det;
  const double it22 = j11 / det;

  ElementMatrices em{};
  em.area = 0.5 * det;
  for (const QuadPoint& qp : kQuad) {
    const double w = qp.weight * 0.5 * det;
    const auto n = p2_shape(qp.xi, qp.eta);
    const auto gref = p2_shape_grad(qp.xi, qp.eta);
    const auto psi = p1_shape(qp.xi, qp.eta);
    std::array<std::array<double, 2>, 6> g;
    for (int i = 0; i < 6; ++i) {
      g[i][0] = it11 * gref[i][0] + it12 * gref[i][1];
      g[i][1] = it21 * gref[i][0] + it22 * gref[i][1];
    }
    for (int i = 0; i < 6; ++i) {
      for (int j = 0; j < 6; ++j) {
        em.stiffness[i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
        em.mass[i][j] += w * n[i] * n[j];
      }
    }
    for (int p = 0; p < 3; ++p) {
      for (int i = 0; i < 6; ++i) {
        em.div_x[p][i] += w * g[i][0] * psi[p];
        em.div_y[p][i] += w * g[i][1] * psi[p];
      }
    }
  }
  return em;
}

struct AssembledOperator {
  Eigen::SparseMatrix<double> unit_A1;  // n_int x n_int
  Eigen::SparseMatrix<double> C;        // n_vertices x 2 n_int
  Eigen::VectorXd pressure_lumped;      // n_vertices
  ElementMatrices lower, upper;         // cached element integrals
};

AssembledOperator assemble_operator(const TriMesh& mesh) {
  AssembledOperator op;
  const int n_int = mesh.n_interior();
  const int n_q = mesh.n_vertices();

  op.lower = element_matrices(mesh.triangle(0).corners);
  op.upper = element_matrices(mesh.triangle(1).corners);

  op.pressure_lumped = Eigen::VectorXd::Zero(n_q);

  // interior indices per triangle, reused in both passes
  const auto local_dofs = [&](const TriMesh::TriangleRef& tri) {
    std::array<int, 6> dof;
    for (int i = 0; i < 6; ++i) dof[i] = mesh.interior_index(tri.p2_grid[i][0], tri.p2_grid[i][1]);
    return dof;
  };

  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 36);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto tri = mesh.triangle(t);
      const ElementMatrices& em = (t % 2 == 0) ? op.lower : op.upper;
      const auto dof = local_dofs(tri);
      for (int i = 0; i < 6; ++i) {
        if (dof[i] < 0) continue;
        for (int j = 0; j < 6; ++j) {
          if (dof[j] < 0) continue;
          trips.emplace_back(dof[i], dof[j], em.stiffness[i][j]);
        }
      }
      for (int p = 0; p < 3; ++p) op.pressure_lumped[tri.vertices[p]] += em.area / 3.0;
    }
    op.unit_A1.resize(n_int, n_int);
    op.unit_A1.setFromTriplets(trips.begin(), trips.end());
  }
  {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(mesh.n_triangles()) * 36);
    for (int t = 0; t < mesh.n_triangles(); ++t) {
      const auto tri = mesh.triangle(t);
      const ElementMatrices& em = (t % 2 == 0) ? op.lower : op.upper;
      const auto dof = local_dofs(tri);
      for (int p = 0; p < 3; ++p) {
        const int row = tri.vertices[p];
        for (int i = 0; i < 6; ++i) {
          if (dof[i] < 0) continue;
          trips.emplace_back(row, dof[i], em.div_x[p][i]);
          trips.emplace_back(row, n_int + dof[i], em.div_y[p][i]);
        }
      }
    }
    op.C.resize(n_q, 2 * n_int);
    op.C.setFromTriplets(trips.begin(), trips.end());
  }
  return op;
}

// Load vector -(M f_nodal) restricted to interior DOFs, from per-node samples.
Eigen::VectorXd load_from_nodal(const TriMesh& mesh, const AssembledOperator& op,
                                const std::vector<double>& f1, const std::vector<double>& f2) {
  const int n_int = mesh.n_interior();
  Eigen::VectorXd F = Eigen::VectorXd::Zero(2 * n_int);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    const ElementMatrices& em = (t % 2 == 0) ? op.lower : op.upper;
    std::array<int, 6> node;
    std::array<int, 6> dof;
    for (int i = 0; i < 6; ++i) {
      node[i] = mesh.p2_node(tri.p2_grid[i][0], tri.p2_grid[i][1]);
      dof[i] = mesh.interior_index(tri.p2_grid[i][0], tri.p2_grid[i][1]);
    }
    for (int i = 0; i < 6; ++i) {
      if (dof[i] < 0) continue;
      double acc1 = 0.0;
      double acc2 = 0.0;
      for (int j = 0; j < 6; ++j) {
        acc1 += em.mass[i][j] * f1[node[j]];
        acc2 += em.mass[i][j] * f2[node[j]];
      }
      F[dof[i]] -= acc1;
      F[n_int + dof[i]] -= acc2;
    }
  }
  return F;
}

void nodal_samples_from_field(const TriMesh& mesh, const VectorField& f, std::vector<double>& f1,
                              std::vector<double>& f2) {
  const int pw = mesh.p2_width();
  const int ph = mesh.p2_height();
  f1.resize(static_cast<std::size_t>(pw) * ph);
  f2.resize(static_cast<std::size_t>(pw) * ph);
  for (int gy = 0; gy < ph; ++gy) {
    for (int gx = 0; gx < pw; ++gx) {
      const auto [v, w] = sample_flow_bilinear(f, 0.5 * gx, 0.5 * gy);
      f1[mesh.p2_node(gx, gy)] = v;
      f2[mesh.p2_node(gx, gy)] = w;
    }
  }
}

void nodal_samples_from_callable(const TriMesh& mesh, const RhsCallable& f,
                                 std::vector<double>& f1, std::vector<double>& f2) {
  const int pw = mesh.p2_width();
  const int ph = mesh.p2_height();
  f1.resize(static_cast<std::size_t>(pw) * ph);
  f2.resize(static_cast<std::size_t>(pw) * ph);
  for (int gy = 0; gy < ph; ++gy) {
    for (int gx = 0; gx < pw; ++gx) {
      const auto [x, y] = mesh.p2_coords(gx, gy);
      const auto val = f(x, y);
      f1[mesh.p2_node(gx, gy)] = val[0];
      f2[mesh.p2_node(gx, gy)] = val[1];
    }
  }
}

using Ldlt = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

struct MinresOutcome {
  Eigen::VectorXd x;
  double residual = 0.0;
  int iterations = 0;
};

// Preconditioned MINRES on the unit-lambda augmented saddle operator
//   K [v; p] = [A1 v + C^t p;  C v + rho (1^t p) 1]
// with block preconditioner diag(chol(A1)^{-1} x2, lumped pressure mass).
// Convergence is declared on the true relative residual of the original
// lambda-scaled system, evaluated through `true_residual`.
MinresOutcome pminres_saddle(const Eigen::SparseMatrix<double>& A1,
                             const Eigen::SparseMatrix<double>& C, const Ldlt& ldlt,
                             const Eigen::VectorXd& lumped, const Eigen::VectorXd& rhs,
                             double tol, int max_iter,
                             const std::function<double(const Eigen::VectorXd&)>& true_residual) {
  const int n = static_cast<int>(A1.rows());
  const int q = static_cast<int>(lumped.size());
  const int total = 2 * n + q;
  const double rho = lumped.mean();

  const auto apply_k = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(total);
    y.segment(0, n) = A1 * x.segment(0, n);
    y.segment(n, n) = A1 * x.segment(n, n);
    y.segment(0, 2 * n) += C.transpose() * x.tail(q);
    y.tail(q) = C * x.head(2 * n);
    y.tail(q).array() += rho * x.tail(q).sum();
    return y;
  };
  const auto apply_minv = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y(total);
    y.segment(0, n) = ldlt.solve(x.segment(0, n));
    y.segment(n, n) = ldlt.solve(x.segment(n, n));
    y.tail(q) = x.tail(q).cwiseQuotient(lumped);
    return y;
  };

  MinresOutcome out;
  out.x = Eigen::VectorXd::Zero(total);

  Eigen::VectorXd r1 = rhs;
  Eigen::VectorXd y = apply_minv(r1);
  const double beta1_sq = r1.dot(y);
  if (beta1_sq <= 0.0) {
    out.residual = true_residual(out.x);
    return out;
  }
  const double beta1 = std::sqrt(beta1_sq);

  double oldb = 0.0;
  double beta = beta1;
  double dbar = 0.0;
  double epsln = 0.0;
  double phibar = beta1;
  double cs = -1.0;
  double sn = 0.0;
  Eigen::VectorXd w = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd w2 = Eigen::VectorXd::Zero(total);
  Eigen::VectorXd r2 = r1;

  double best_resid = std::numeric_limits<double>::infinity();
  for (int itn = 1; itn <= max_iter; ++itn) {
    const double s = 1.0 / beta;
    const Eigen::VectorXd v = s * y;
    y = apply_k(v);
    if (itn >= 2) y -= (beta / oldb) * r1;
    const double alfa = v.dot(y);
    y -= (alfa / beta) * r2;
    r1 = r2;
    r2 = y;
    y = apply_minv(r2);
    oldb = beta;
    const double beta_sq = r2.dot(y);
    if (beta_sq < 0.0) {
      throw SolverError("stokes: preconditioner lost positive definiteness", best_resid);
    }
    beta = std::sqrt(beta_sq);

    const double oldeps = epsln;
    const double delta = cs * dbar + sn * alfa;
    const double gbar = sn * dbar - cs * alfa;
    epsln = sn * beta;
    dbar = -cs * beta;
    double gamma = std::hypot(gbar, beta);
    gamma = std::max(gamma, 1e-300);
    cs = gbar / gamma;
    sn = beta / gamma;
    const double phi = cs * phibar;
    phibar = sn * phibar;

    const Eigen::VectorXd w1 = w2;
    w2 = w;
    w = (v - oldeps * w1 - delta * w2) / gamma;
    out.x += phi * w;
    out.iterations = itn;

    // cheap estimate first, true residual on candidate convergence
    if (phibar <= 0.5 * tol * beta1 || itn % 50 == 0 || itn == max_iter) {
      const double rr = true_residual(out.x);
      best_resid = std::min(best_resid, rr);
      if (rr <= tol) {
        out.residual = rr;
        return out;
      }
    }
  }
  throw SolverError("stokes: MINRES did not reach tol " + std::to_string(tol) + " in " +
                        std::to_string(max_iter) + " iterations",
                    best_resid);
}

int default_max_iter(int unknowns, int requested) {
  if (requested > 0) return requested;
  return std::max(500, static_cast<int>(10.0 * std::sqrt(static_cast<double>(unknowns))));
}

// Shared solve path: unit-lambda MINRES, rescale, project pressure, resample.
StokesSolution solve_with_operator(const TriMesh& mesh, const AssembledOperator& op,
                                   const Ldlt* ldlt, const Eigen::VectorXd& F, double lambda,
                                   double tol, int max_iter) {
  const int n = mesh.n_interior();
  const int q = mesh.n_vertices();

  StokesSolution sol;
  sol.b = VectorField(mesh.width(), mesh.height(), mesh.spacing());
  sol.q = ScalarField(mesh.width(), mesh.height(), 0.0, mesh.spacing());
  sol.vx_nodes = Eigen::VectorXd::Zero(mesh.n_p2_nodes());
  sol.vy_nodes = Eigen::VectorXd::Zero(mesh.n_p2_nodes());

  const double fnorm = F.norm();
  if (fnorm == 0.0) return sol;  // unique solution of the homogeneous system

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * n + q);
  rhs.head(2 * n) = F;

  // Relative residual of the original lambda-scaled system: the velocity
  // block of the unit residual is unchanged, the pressure block divides by
  // lambda (unit unknowns are beta = lambda b).
  const auto true_residual = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd rv = F;
    rv.segment(0, n) -= op.unit_A1 * x.segment(0, n);
    rv.segment(n, n) -= op.unit_A1 * x.segment(n, n);
    rv -= op.C.transpose() * x.tail(q);
    const Eigen::VectorXd rp = (op.C * x.head(2 * n)) / lambda;
    return std::sqrt(rv.squaredNorm() + rp.squaredNorm()) / fnorm;
  };

  MinresOutcome mr = pminres_saddle(op.unit_A1, op.C, *ldlt, op.pressure_lumped, rhs, tol,
                                    default_max_iter(2 * n + q, max_iter), true_residual);

  // zero lumped-area mean for the pressure
  Eigen::VectorXd qvec = mr.x.tail(q);
  const double mean = op.pressure_lumped.dot(qvec) / op.pressure_lumped.sum();
  qvec.array() -= mean;

  sol.residual = mr.residual;
  sol.iterations = mr.iterations;

  const double inv_lambda = 1.0 / lambda;
  for (int gy = 1; gy < mesh.p2_height() - 1; ++gy) {
    for (int gx = 1; gx < mesh.p2_width() - 1; ++gx) {
      const int idx = mesh.interior_index(gx, gy);
      sol.vx_nodes[mesh.p2_node(gx, gy)] = mr.x[idx] * inv_lambda;
      sol.vy_nodes[mesh.p2_node(gx, gy)] = mr.x[n + idx] * inv_lambda;
    }
  }
  for (int j = 0; j < mesh.height(); ++j) {
    for (int i = 0; i < mesh.width(); ++i) {
      sol.b.v(i, j) = sol.vx_nodes[mesh.p2_node(2 * i, 2 * j)];
      sol.b.w(i, j) = sol.vy_nodes[mesh.p2_node(2 * i, 2 * j)];
      sol.q(i, j) = qvec[mesh.vertex_id(i, j)];
    }
  }
  return sol;
}

}  // namespace

TriMesh::TriMesh(int width, int height, double spacing)
    : width_(width), height_(height), spacing_(spacing) {
  if (width < kMinFieldDim || height < kMinFieldDim) {
    throw DimensionError("TriMesh: grid must be at least " + std::to_string(kMinFieldDim) + "x" +
                         std::to_string(kMinFieldDim));
  }
  if (spacing <= 0.0) throw Error("TriMesh: spacing must be positive");
}

TriMesh::TriangleRef TriMesh::triangle(int t) const {
  const int cell = t / 2;
  const int cx = cell % (width_ - 1);
  const int cy = cell / (width_ - 1);
  const int gx = 2 * cx;
  const int gy = 2 * cy;
  TriangleRef tri;
  const auto corner = [&](int i, int j) -> std::array<double, 2> {
    return {i * spacing_, j * spacing_};
  };
  if (t % 2 == 0) {
    // lower: (cx,cy) (cx+1,cy) (cx+1,cy+1)
    tri.p2_grid = {{{gx, gy},
                    {gx + 2, gy},
                    {gx + 2, gy + 2},
                    {gx + 1, gy},
                    {gx + 2, gy + 1},
                    {gx + 1, gy + 1}}};
    tri.vertices = {vertex_id(cx, cy), vertex_id(cx + 1, cy), vertex_id(cx + 1, cy + 1)};
    tri.corners = {corner(cx, cy), corner(cx + 1, cy), corner(cx + 1, cy + 1)};
  } else {
    // upper: (cx,cy) (cx+1,cy+1) (cx,cy+1)
    tri.p2_grid = {{{gx, gy},
                    {gx + 2, gy + 2},
                    {gx, gy + 2},
                    {gx + 1, gy + 1},
                    {gx + 1, gy + 2},
                    {gx, gy + 1}}};
    tri.vertices = {vertex_id(cx, cy), vertex_id(cx + 1, cy + 1), vertex_id(cx, cy + 1)};
    tri.corners = {corner(cx, cy), corner(cx + 1, cy + 1), corner(cx, cy + 1)};
  }
  return tri;
}

SaddleSystem assemble(const TriMesh& mesh, const VectorField& f, double lambda) {
  if (f.width() != mesh.width() || f.height() != mesh.height()) {
    throw DimensionError("assemble: rhs field does not match mesh dimensions");
  }
  if (lambda <= 0.0) throw Error("assemble: lambda must be positive");
  AssembledOperator op = assemble_operator(mesh);
  std::vector<double> f1, f2;
  nodal_samples_from_field(mesh, f, f1, f2);
  SaddleSystem sys{mesh,
                   lambda * op.unit_A1,
                   std::move(op.unit_A1),
                   std::move(op.C),
                   load_from_nodal(mesh, op, f1, f2),
                   lambda,
                   std::move(op.pressure_lumped)};
  return sys;
}

SaddleSystem assemble(const TriMesh& mesh, const RhsCallable& f, double lambda) {
  if (lambda <= 0.0) throw Error("assemble: lambda must be positive");
  AssembledOperator op = assemble_operator(mesh);
  std::vector<double> f1, f2;
  nodal_samples_from_callable(mesh, f, f1, f2);
  SaddleSystem sys{mesh,
                   lambda * op.unit_A1,
                   std::move(op.unit_A1),
                   std::move(op.C),
                   load_from_nodal(mesh, op, f1, f2),
                   lambda,
                   std::move(op.pressure_lumped)};
  return sys;
}

StokesSolution solve_saddle(const SaddleSystem& sys, double tol, int max_iter) {
  AssembledOperator op;
  op.unit_A1 = sys.unit_A1;
  op.C = sys.C;
  op.pressure_lumped = sys.pressure_lumped;
  Ldlt ldlt;
  ldlt.compute(op.unit_A1);
  if (ldlt.info() != Eigen::Success) {
    throw SolverError("stokes: Cholesky factorization of the velocity block failed");
  }
  return solve_with_operator(sys.mesh, op, &ldlt, sys.f, sys.lambda, tol, max_iter);
}

StokesSolution stokes_flow_update(const VectorField& f, double lambda, double tol, int max_iter) {
  const TriMesh mesh(f.width(), f.height(), f.spacing());
  const SaddleSystem sys = assemble(mesh, f, lambda);
  return solve_saddle(sys, tol, max_iter);
}

struct StokesSolver::Impl {
  TriMesh mesh;
  mutable bool built = false;
  mutable AssembledOperator op;
  mutable Ldlt ldlt;

  explicit Impl(TriMesh m) : mesh(m) {}

  void ensure_built() const {
    if (built) return;
    op = assemble_operator(mesh);
    ldlt.compute(op.unit_A1);
    if (ldlt.info() != Eigen::Success) {
      throw SolverError("stokes: Cholesky factorization of the velocity block failed");
    }
    built = true;
  }
};

StokesSolver::StokesSolver(int width, int height, double spacing)
    : impl_(std::make_unique<Impl>(TriMesh(width, height, spacing))) {}
StokesSolver::~StokesSolver() = default;
StokesSolver::StokesSolver(StokesSolver&&) noexcept = default;
StokesSolver& StokesSolver::operator=(StokesSolver&&) noexcept = default;

const TriMesh& StokesSolver::mesh() const { return impl_->mesh; }

StokesSolution StokesSolver::flow_update(const VectorField& f, double lambda, double tol,
                                         int max_iter) const {
  if (f.width() != impl_->mesh.width() || f.height() != impl_->mesh.height()) {
    throw DimensionError("StokesSolver: rhs field does not match mesh dimensions");
  }
  if (lambda <= 0.0) throw Error("StokesSolver: lambda must be positive");
  // zero rhs never forces the (expensive, lazy) matrix build
  bool all_zero = true;
  for (double x : f.v_values()) {
    if (x != 0.0) {
      all_zero = false;
      break;
    }
  }
  if (all_zero) {
    for (double x : f.w_values()) {
      if (x != 0.0) {
        all_zero = false;
        break;
      }
    }
  }
  if (all_zero) {
    StokesSolution sol;
    sol.b = VectorField(impl_->mesh.width(), impl_->mesh.height(), impl_->mesh.spacing());
    sol.q = ScalarField(impl_->mesh.width(), impl_->mesh.height(), 0.0, impl_->mesh.spacing());
    sol.vx_nodes = Eigen::VectorXd::Zero(impl_->mesh.n_p2_nodes());
    sol.vy_nodes = Eigen::VectorXd::Zero(impl_->mesh.n_p2_nodes());
    return sol;
  }
  impl_->ensure_built();
  std::vector<double> f1, f2;
  nodal_samples_from_field(impl_->mesh, f, f1, f2);
  const Eigen::VectorXd F = load_from_nodal(impl_->mesh, impl_->op, f1, f2);
  return solve_with_operator(impl_->mesh, impl_->op, &impl_->ldlt, F, lambda, tol, max_iter);
}

std::array<std::array<double, 6>, 6> p2_element_stiffness(
    const std::array<std::array<double, 2>, 3>& corners) {
  return element_matrices(corners).stiffness;
}

void write_matrix_market(const SaddleSystem& sys, const std::string& path) {
  const int n = static_cast<int>(sys.A1.rows());
  const int q = static_cast<int>(sys.C.rows());
  const int total = 2 * n + q;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::size_t nnz = 2 * static_cast<std::size_t>(sys.A1.nonZeros()) +
                    2 * static_cast<std::size_t>(sys.C.nonZeros());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << total << " " << total << " " << nnz << "\n";
  out.precision(17);
  for (int comp = 0; comp < 2; ++comp) {
    const int off = comp * n;
    for (int k = 0; k < sys.A1.outerSize(); ++k) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A1, k); it; ++it) {
        out << it.row() + off + 1 << " " << it.col() + off + 1 << " " << it.value() << "\n";
      }
    }
  }
  for (int k = 0; k < sys.C.outerSize(); ++k) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(sys.C, k); it; ++it) {
      // C block and its transpose
      out << 2 * n + it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
      out << it.col() + 1 << " " << 2 * n + it.row() + 1 << " " << it.value() << "\n";
    }
  }
  if (!out) throw IoError("failed while writing " + path);
}

double velocity_l2_error(const TriMesh& mesh, const Eigen::VectorXd& vx_nodes,
                         const Eigen::VectorXd& vy_nodes, const RhsCallable& exact) {
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    const auto& c = tri.corners;
    const double det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) -
                       (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    for (const QuadPoint& qp : kQuad) {
      const auto n = p2_shape(qp.xi, qp.eta);
      double ux = 0.0;
      double uy = 0.0;
      for (int i = 0; i < 6; ++i) {
        const int node = mesh.p2_node(tri.p2_grid[i][0], tri.p2_grid[i][1]);
        ux += n[i] * vx_nodes[node];
        uy += n[i] * vy_nodes[node];
      }
      const double x = c[0][0] + qp.xi * (c[1][0] - c[0][0]) + qp.eta * (c[2][0] - c[0][0]);
      const double y = c[0][1] + qp.xi * (c[1][1] - c[0][1]) + qp.eta * (c[2][1] - c[0][1]);
      const auto ex = exact(x, y);
      const double dx = ux - ex[0];
      const double dy = uy - ex[1];
      acc += qp.weight * 0.5 * det * (dx * dx + dy * dy);
    }
  }
  return std::sqrt(acc);
}

double pressure_l2_error(const TriMesh& mesh, const ScalarField& q,
                         const std::function<double(double, double)>& exact) {
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto tri = mesh.triangle(t);
    const auto& c = tri.corners;
    const double det = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) -
                       (c[2][0] - c[0][0]) * (c[1][1] - c[0][1]);
    for (const QuadPoint& qp : kQuad) {
      const auto psi = p1_shape(qp.xi, qp.eta);
      double qh = 0.0;
      for (int p = 0; p < 3; ++p) qh += psi[p] * q.values()[tri.vertices[p]];
      const double x = c[0][0] + qp.xi * (c[1][0] - c[0][0]) + qp.eta * (c[2][0] - c[0][0]);
      const double y = c[0][1] + qp.xi * (c[1][1] - c[0][1]) + qp.eta * (c[2][1] - c[0][1]);
      const double d = qh - exact(x, y);
      acc += qp.weight * 0.5 * det * d * d;
    }
  }
  return std::sqrt(acc);
}

}  // namespace ocflow
