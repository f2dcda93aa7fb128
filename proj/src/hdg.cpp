#include "hdgnl/hdg.hpp"

#include <algorithm>
#include <limits>

#include "hdgnl/parallel.hpp"

namespace hdgnl
{

namespace
{

using Index = Eigen::Index;

const RealMatrix &oriented_trace(const ReferenceElement &ref, int sign)
{
  return ref.trace_values[sign > 0 ? 0 : 1];
}

int side_sign(const Skeleton &sk, int element, int k)
{
  const Edge &e = sk.edges[sk.element_edges[element][k]];
  for (int s = 0; s < e.num_sides; ++s)
  {
    if (e.sides[s].element == element && e.sides[s].local_edge == k)
    {
      return e.sides[s].sign;
    }
  }
  fail(ErrorKind::Numerical, "skeleton: element side not found");
}

ElementOperators build_operators(const ReferenceElement &ref, const ElementGeometry &g,
                                 const Skeleton &sk, int element)
{
  const int nb = ref.num_basis();
  const int nt = ref.num_trace();
  const Index nq = static_cast<Index>(g.weights.size());
  ElementOperators op;
  RealMatrix dx(nq, nb), dy(nq, nb);
  for (Index q = 0; q < nq; ++q)
  {
    const auto &inv = g.inverse[q];
    for (int j = 0; j < nb; ++j)
    {
      dx(q, j) = ref.dxi(q, j) * inv[0] + ref.deta(q, j) * inv[2];
      dy(q, j) = ref.dxi(q, j) * inv[1] + ref.deta(q, j) * inv[3];
    }
  }
  const Eigen::Map<const Eigen::VectorXd> w(g.weights.data(), nq);
  const RealMatrix wv = w.asDiagonal() * ref.values;
  op.mass = wv.transpose() * ref.values;
  op.gx = wv.transpose() * dx;
  op.gy = wv.transpose() * dy;
  op.surface = RealMatrix::Zero(nb, nb);
  for (int k = 0; k < 3; ++k)
  {
    const auto &ed = g.edges[k];
    const Index ne = static_cast<Index>(ed.weights.size());
    const RealMatrix &mu = oriented_trace(ref, side_sign(sk, element, k));
    const RealMatrix &phi = ref.edge_values[k];
    RealMatrix wphi(ne, nb), nxphi(ne, nb), nyphi(ne, nb), wmu(ne, nt);
    for (Index q = 0; q < ne; ++q)
    {
      wphi.row(q) = ed.weights[q] * phi.row(q);
      nxphi.row(q) = ed.normals[q].x * wphi.row(q);
      nyphi.row(q) = ed.normals[q].y * wphi.row(q);
      wmu.row(q) = ed.weights[q] * mu.row(q);
    }
    op.surface += wphi.transpose() * phi;
    op.t[k] = wphi.transpose() * mu;
    op.tnx[k] = nxphi.transpose() * mu;
    op.tny[k] = nyphi.transpose() * mu;
    op.trace_mass[k] = wmu.transpose() * mu;
  }
  return op;
}

bool is_outer(const Skeleton &sk, int edge) { return sk.edges[edge].on_boundary; }

// Trace-space boundary contribution of an outer edge: -<lambda, mu> for Silver-Muller.
void add_boundary_terms(const Discretization &disc, std::vector<Triplet> &triplets, index_t shift)
{
  if (disc.boundary != BoundaryKind::SilverMuller)
  {
    return;
  }
  const int nt = disc.dofs.num_trace;
  for (int edge = 0; edge < disc.skeleton.num_edges(); ++edge)
  {
    if (!is_outer(disc.skeleton, edge))
    {
      continue;
    }
    const EdgeSide &side = disc.skeleton.edges[edge].sides[0];
    const RealMatrix &mf = disc.operators[side.element].trace_mass[side.local_edge];
    const index_t off = shift + disc.dofs.lambda_offset(edge);
    for (int i = 0; i < nt; ++i)
    {
      for (int j = 0; j < nt; ++j)
      {
        triplets.push_back({static_cast<int>(off + i), static_cast<int>(off + j), -mf(i, j)});
      }
    }
  }
}

}  // namespace

DofMap make_dofmap(const Mesh &mesh, const Skeleton &skeleton, int degree, bool hydrodynamic)
{
  if (degree < 1 || degree > max_degree)
  {
    fail(ErrorKind::Validation, "degree: must be in 1.." + std::to_string(max_degree));
  }
  DofMap d;
  d.degree = degree;
  d.num_basis = (degree + 1) * (degree + 2) / 2;
  d.num_trace = degree + 1;
  d.num_edges = skeleton.num_edges();
  d.eta_edge.assign(d.num_edges, -1);
  if (hydrodynamic)
  {
    for (int e = 0; e < d.num_edges; ++e)
    {
      d.eta_edge[e] = skeleton.scatterer_edge_index[e];
    }
    d.num_eta_edges = skeleton.num_scatterer_edges;
  }
  const int ne = mesh.num_elements();
  d.local_offset.resize(ne);
  d.local_size.resize(ne);
  d.has_current.resize(ne);
  index_t off = 0;
  for (int k = 0; k < ne; ++k)
  {
    const bool cur = hydrodynamic && mesh.domains[k] == Domain::Scatterer;
    d.has_current[k] = cur ? 1 : 0;
    d.local_size[k] = (cur ? 6 : 3) * d.num_basis;
    d.local_offset[k] = static_cast<int>(off);
    off += d.local_size[k];
  }
  d.num_locals = off;
  return d;
}

PlaneWaveValue plane_wave(const Incidence &inc, double omega, Vec2 x)
{
  if (std::abs(norm(inc.direction) - 1.0) > 1e-12)
  {
    fail(ErrorKind::Argument, "incidence: direction must be a unit vector");
  }
  PlaneWaveValue v;
  v.h = inc.amplitude * std::exp(I * omega * dot(inc.direction, x));
  v.e = {-inc.direction.y * v.h, inc.direction.x * v.h};
  return v;
}

Discretization make_discretization(Mesh mesh, const std::vector<CurvedEdgeMap> &curved_maps,
                                   const DiscretizationOptions &options)
{
  if (!(options.stab.tau_lambda > 0.0) || !(options.stab.tau_eta > 0.0))
  {
    fail(ErrorKind::Validation, "stabilization: tau_lambda and tau_eta must be positive");
  }
  Discretization d;
  d.mesh = std::move(mesh);
  d.skeleton = build_skeleton(d.mesh);
  d.curved = CurvedEdges(d.skeleton.num_edges(), curved_maps);
  d.ref = std::make_shared<ReferenceElement>(options.degree);
  d.hydrodynamic = options.hydrodynamic;
  if (d.hydrodynamic && !d.mesh.has_scatterer())
  {
    // Nothing carries current; the run degenerates to the field-only system.
    d.hydrodynamic = false;
  }
  d.dofs = make_dofmap(d.mesh, d.skeleton, options.degree, d.hydrodynamic);
  d.boundary = options.boundary;
  d.stab = options.stab;
  const int ne = d.mesh.num_elements();
  d.geometry.resize(ne);
  d.operators.resize(ne);
  parallel_for(ne, options.width, [&](int k) {
    d.geometry[k] = geometric_map(d.mesh, d.skeleton, d.curved, k, d.ref->tri_rule, d.ref->edge_rule);
    d.operators[k] = build_operators(*d.ref, d.geometry[k], d.skeleton, k);
  });
  return d;
}

LocalBlocks assemble_local_blocks(const Discretization &disc, int element,
                                  const ScaledCoefficients &coeffs, const VolumeSource *source)
{
  const ElementOperators &op = disc.operators[element];
  const int nb = disc.dofs.num_basis;
  const int nt = disc.dofs.num_trace;
  const bool cur = disc.dofs.has_current[element] != 0;
  const int nl = disc.dofs.local_size[element];
  const int ntr = disc.dofs.element_trace_size(element);
  const double tl = disc.stab.tau_lambda;
  const double te = disc.stab.tau_eta;
  const complex iw = I * coeffs.omega;
  const complex eps =
      !disc.hydrodynamic && disc.mesh.domains[element] == Domain::Scatterer ? coeffs.epsilon : 1.0;

  LocalBlocks lb;
  lb.element = element;
  lb.a = ComplexMatrix::Zero(nl, nl);
  lb.b = ComplexMatrix::Zero(nl, ntr);
  lb.c = ComplexMatrix::Zero(ntr, nl);
  lb.d = ComplexMatrix::Zero(ntr, ntr);
  lb.f = ComplexVector::Zero(nl);
  auto blk = [&](ComplexMatrix &m, int r, int c, int rows, int cols) {
    return m.block(static_cast<Index>(r) * rows, static_cast<Index>(c) * cols, rows, cols);
  };
  const int ex = 0, ey = 1, h = 2, jx = 3, jy = 4, q = 5;
  const auto mass = op.mass.cast<complex>();
  blk(lb.a, ex, ex, nb, nb) = iw * eps * mass;
  blk(lb.a, ex, h, nb, nb) = -op.gy.transpose().cast<complex>();
  blk(lb.a, ey, ey, nb, nb) = iw * eps * mass;
  blk(lb.a, ey, h, nb, nb) = op.gx.transpose().cast<complex>();
  blk(lb.a, h, ex, nb, nb) = op.gy.cast<complex>();
  blk(lb.a, h, ey, nb, nb) = -op.gx.cast<complex>();
  blk(lb.a, h, h, nb, nb) = iw * mass - tl * op.surface.cast<complex>();
  if (cur)
  {
    blk(lb.a, ex, jx, nb, nb) = -mass;
    blk(lb.a, ey, jy, nb, nb) = -mass;
    blk(lb.a, jx, jx, nb, nb) = coeffs.hydro * mass;
    blk(lb.a, jx, ex, nb, nb) = -coeffs.drive * mass;
    blk(lb.a, jx, q, nb, nb) = -op.gx.transpose().cast<complex>();
    blk(lb.a, jy, jy, nb, nb) = coeffs.hydro * mass;
    blk(lb.a, jy, ey, nb, nb) = -coeffs.drive * mass;
    blk(lb.a, jy, q, nb, nb) = -op.gy.transpose().cast<complex>();
    blk(lb.a, q, q, nb, nb) = iw * mass - te * op.surface.cast<complex>();
    blk(lb.a, q, jx, nb, nb) = -op.gx.cast<complex>();
    blk(lb.a, q, jy, nb, nb) = -op.gy.cast<complex>();
  }
  for (int k = 0; k < 3; ++k)
  {
    const int lam = k;
    blk(lb.b, ex, lam, nb, nt) = op.tny[k].cast<complex>();
    blk(lb.b, ey, lam, nb, nt) = -op.tnx[k].cast<complex>();
    blk(lb.b, h, lam, nb, nt) = tl * op.t[k].cast<complex>();
    blk(lb.c, lam, ex, nt, nb) = -op.tny[k].transpose().cast<complex>();
    blk(lb.c, lam, ey, nt, nb) = op.tnx[k].transpose().cast<complex>();
    blk(lb.c, lam, h, nt, nb) = tl * op.t[k].transpose().cast<complex>();
    blk(lb.d, lam, lam, nt, nt) = -tl * op.trace_mass[k].cast<complex>();
    if (cur)
    {
      const int eta = 3 + k;
      blk(lb.b, jx, eta, nb, nt) = op.tnx[k].cast<complex>();
      blk(lb.b, jy, eta, nb, nt) = op.tny[k].cast<complex>();
      blk(lb.b, q, eta, nb, nt) = te * op.t[k].cast<complex>();
      blk(lb.c, eta, jx, nt, nb) = op.tnx[k].transpose().cast<complex>();
      blk(lb.c, eta, jy, nt, nb) = op.tny[k].transpose().cast<complex>();
      blk(lb.c, eta, q, nt, nb) = te * op.t[k].transpose().cast<complex>();
      blk(lb.d, eta, eta, nt, nt) = -te * op.trace_mass[k].cast<complex>();
    }
  }
  if (source != nullptr)
  {
    const ElementGeometry &g = disc.geometry[element];
    const RealMatrix &phi = disc.ref->values;
    for (std::size_t qp = 0; qp < g.points.size(); ++qp)
    {
      std::array<complex, 2> amp{}, cur_src{};
      (*source)(g.points[qp], amp, cur_src);
      const double w = g.weights[qp];
      for (int i = 0; i < nb; ++i)
      {
        const double v = w * phi(static_cast<Index>(qp), i);
        lb.f(ex * nb + i) += v * amp[0];
        lb.f(ey * nb + i) += v * amp[1];
        if (cur)
        {
          lb.f(jx * nb + i) += v * cur_src[0];
          lb.f(jy * nb + i) += v * cur_src[1];
        }
      }
    }
  }
  return lb;
}

Condensed condense_element(const LocalBlocks &blocks)
{
  Eigen::PartialPivLU<ComplexMatrix> lu(blocks.a);
  // PartialPivLU does not report singularity; check the pivots.
  const ComplexMatrix &lu_m = lu.matrixLU();
  double max_pivot = 0.0, min_pivot = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < lu_m.rows(); ++i)
  {
    const double p = std::abs(lu_m(i, i));
    max_pivot = std::max(max_pivot, p);
    min_pivot = std::min(min_pivot, p);
  }
  if (!(min_pivot > 1e-14 * max_pivot) || !std::isfinite(max_pivot))
  {
    fail(ErrorKind::Numerical,
         "condense_element: singular local matrix in element " + std::to_string(blocks.element));
  }
  Condensed c;
  c.x = lu.solve(blocks.b);
  c.y = lu.solve(blocks.f);
  c.schur = blocks.d - blocks.c * c.x;
  c.load = -(blocks.c * c.y);
  return c;
}

std::vector<index_t> element_trace_indices(const Discretization &disc, int element)
{
  const int nt = disc.dofs.num_trace;
  std::vector<index_t> idx;
  idx.reserve(disc.dofs.element_trace_size(element));
  for (int k = 0; k < 3; ++k)
  {
    const index_t off = disc.dofs.lambda_offset(disc.skeleton.element_edges[element][k]);
    for (int m = 0; m < nt; ++m)
    {
      idx.push_back(off + m);
    }
  }
  if (disc.dofs.has_current[element])
  {
    for (int k = 0; k < 3; ++k)
    {
      const index_t off = disc.dofs.eta_offset(disc.skeleton.element_edges[element][k]);
      for (int m = 0; m < nt; ++m)
      {
        idx.push_back(off + m);
      }
    }
  }
  return idx;
}

std::vector<complex> incident_load(const Discretization &disc, const Incidence &inc, double omega)
{
  std::vector<complex> g(static_cast<std::size_t>(disc.dofs.num_traces()), 0.0);
  if (disc.boundary != BoundaryKind::SilverMuller)
  {
    return g;
  }
  const int nt = disc.dofs.num_trace;
  for (int edge = 0; edge < disc.skeleton.num_edges(); ++edge)
  {
    if (!is_outer(disc.skeleton, edge))
    {
      continue;
    }
    const EdgeSide &side = disc.skeleton.edges[edge].sides[0];
    const auto &ed = disc.geometry[side.element].edges[side.local_edge];
    const RealMatrix &mu = oriented_trace(*disc.ref, side.sign);
    const index_t off = disc.dofs.lambda_offset(edge);
    for (std::size_t q = 0; q < ed.points.size(); ++q)
    {
      const PlaneWaveValue pw = plane_wave(inc, omega, ed.points[q]);
      const Vec2 n = ed.normals[q];
      const complex val = n.x * pw.e[1] - n.y * pw.e[0] - pw.h;
      for (int m = 0; m < nt; ++m)
      {
        g[off + m] += ed.weights[q] * mu(static_cast<Index>(q), m) * val;
      }
    }
  }
  return g;
}

CondensedSystem assemble_condensed(const Discretization &disc, const FrequencyProblem &problem,
                                   int width)
{
  const int ne = disc.mesh.num_elements();
  CondensedSystem sys;
  sys.elements.resize(ne);
  parallel_for(ne, width, [&](int k) {
    sys.elements[k] =
        condense_element(assemble_local_blocks(disc, k, problem.coeffs, problem.source));
  });
  const index_t n = disc.dofs.num_traces();
  std::vector<Triplet> triplets;
  std::size_t count = 0;
  for (int k = 0; k < ne; ++k)
  {
    count += static_cast<std::size_t>(sys.elements[k].schur.size());
  }
  triplets.reserve(count + 4 * static_cast<std::size_t>(disc.skeleton.num_edges()));
  sys.global.rhs = problem.incidence != nullptr
                       ? incident_load(disc, *problem.incidence, problem.coeffs.omega)
                       : std::vector<complex>(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < ne; ++k)
  {
    const auto idx = element_trace_indices(disc, k);
    const Condensed &c = sys.elements[k];
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
      for (std::size_t j = 0; j < idx.size(); ++j)
      {
        triplets.push_back({static_cast<int>(idx[i]), static_cast<int>(idx[j]),
                            c.schur(static_cast<Index>(i), static_cast<Index>(j))});
      }
      sys.global.rhs[idx[i]] += c.load(static_cast<Index>(i));
    }
  }
  add_boundary_terms(disc, triplets, 0);
  sys.global.matrix = SparseMatrix::from_triplets(static_cast<int>(n), triplets);
  return sys;
}

namespace
{

void recover(const Discretization &disc, const std::vector<Condensed> &elements,
             FieldSolution &sol, int width)
{
  sol.locals.assign(static_cast<std::size_t>(disc.dofs.num_locals), 0.0);
  parallel_for(disc.mesh.num_elements(), width, [&](int k) {
    const auto idx = element_trace_indices(disc, k);
    ComplexVector lam(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
      lam(static_cast<Index>(i)) = sol.traces[idx[i]];
    }
    const ComplexVector x = elements[k].y - elements[k].x * lam;
    const int off = disc.dofs.local_offset[k];
    for (Index i = 0; i < x.size(); ++i)
    {
      sol.locals[off + i] = x(i);
    }
  });
}

}  // namespace

FieldSolution solve_frequency(const Discretization &disc, const FrequencyProblem &problem,
                              DirectSolver &solver, const SolverOptions &options, int width)
{
  CondensedSystem sys = assemble_condensed(disc, problem, width);
  FieldSolution sol;
  sol.coeffs = problem.coeffs;
  const SolveReport rep = solve_system(sys.global.matrix, sys.global.rhs, solver, options);
  sol.traces = rep.x;
  sol.residual = rep.residual;
  sol.diagnostics = solver.diagnostics();
  recover(disc, sys.elements, sol, width);
  return sol;
}

FieldSolution solve_frequency(const Discretization &disc, const FrequencyProblem &problem,
                              const SolverOptions &options, int width)
{
  auto solver = make_solver(options);
  return solve_frequency(disc, problem, *solver, options, width);
}

GlobalSystem assemble_monolithic(const Discretization &disc, const FrequencyProblem &problem)
{
  const int ne = disc.mesh.num_elements();
  if (ne > 200)
  {
    fail(ErrorKind::Argument, "assemble_monolithic: limited to 200 elements");
  }
  const index_t nloc = disc.dofs.num_locals;
  const index_t n = nloc + disc.dofs.num_traces();
  GlobalSystem sys;
  sys.rhs.assign(static_cast<std::size_t>(n), 0.0);
  if (problem.incidence != nullptr)
  {
    const auto g = incident_load(disc, *problem.incidence, problem.coeffs.omega);
    std::copy(g.begin(), g.end(), sys.rhs.begin() + nloc);
  }
  std::vector<Triplet> t;
  auto push = [&](index_t r, index_t c, complex v) {
    if (v != 0.0)
    {
      t.push_back({static_cast<int>(r), static_cast<int>(c), v});
    }
  };
  for (int k = 0; k < ne; ++k)
  {
    const LocalBlocks lb = assemble_local_blocks(disc, k, problem.coeffs, problem.source);
    const auto idx = element_trace_indices(disc, k);
    const index_t off = disc.dofs.local_offset[k];
    for (Index i = 0; i < lb.a.rows(); ++i)
    {
      for (Index j = 0; j < lb.a.cols(); ++j)
      {
        push(off + i, off + j, lb.a(i, j));
      }
      for (std::size_t j = 0; j < idx.size(); ++j)
      {
        push(off + i, nloc + idx[j], lb.b(i, static_cast<Index>(j)));
      }
      sys.rhs[off + i] += lb.f(i);
    }
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
      for (Index j = 0; j < lb.c.cols(); ++j)
      {
        push(nloc + idx[i], off + j, lb.c(static_cast<Index>(i), j));
      }
      for (std::size_t j = 0; j < idx.size(); ++j)
      {
        push(nloc + idx[i], nloc + idx[j], lb.d(static_cast<Index>(i), static_cast<Index>(j)));
      }
    }
  }
  add_boundary_terms(disc, t, nloc);
  sys.matrix = SparseMatrix::from_triplets(static_cast<int>(n), t);
  return sys;
}

FieldSolution solve_monolithic(const Discretization &disc, const FrequencyProblem &problem,
                               const SolverOptions &options)
{
  const GlobalSystem sys = assemble_monolithic(disc, problem);
  auto solver = make_solver(options);
  const SolveReport rep = solve_system(sys.matrix, sys.rhs, *solver, options);
  FieldSolution sol;
  sol.coeffs = problem.coeffs;
  sol.residual = rep.residual;
  sol.diagnostics = solver->diagnostics();
  const auto nloc = static_cast<std::ptrdiff_t>(disc.dofs.num_locals);
  sol.locals.assign(rep.x.begin(), rep.x.begin() + nloc);
  sol.traces.assign(rep.x.begin() + nloc, rep.x.end());
  return sol;
}

double local_residual(const Discretization &disc, const FieldSolution &sol,
                      const FrequencyProblem &problem)
{
  double worst = 0.0;
  for (int k = 0; k < disc.mesh.num_elements(); ++k)
  {
    const LocalBlocks lb = assemble_local_blocks(disc, k, problem.coeffs, problem.source);
    const auto idx = element_trace_indices(disc, k);
    ComplexVector lam(static_cast<Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
    {
      lam(static_cast<Index>(i)) = sol.traces[idx[i]];
    }
    const Eigen::Map<const ComplexVector> x(sol.locals.data() + disc.dofs.local_offset[k],
                                            disc.dofs.local_size[k]);
    const ComplexVector ax = lb.a * x;
    const ComplexVector bl = lb.b * lam;
    const double scale = std::max({ax.cwiseAbs().maxCoeff(), bl.cwiseAbs().maxCoeff(),
                                   lb.f.size() ? lb.f.cwiseAbs().maxCoeff() : 0.0});
    if (scale > 0.0)
    {
      worst = std::max(worst, (ax + bl - lb.f).cwiseAbs().maxCoeff() / scale);
    }
  }
  return worst;
}

namespace
{

// Element-side trace contributions <n x E^, mu> and <n . J^, mu> for local edge k, in
// the canonical orientation of the edge.
void side_traces(const Discretization &disc, const FieldSolution &sol, int element, int k,
                 ComplexVector &tangential, ComplexVector &normal, double &scale)
{
  const ElementOperators &op = disc.operators[element];
  const int nb = disc.dofs.num_basis;
  const int edge = disc.skeleton.element_edges[element][k];
  const auto *x = sol.locals.data() + disc.dofs.local_offset[element];
  auto field = [&](int f) { return Eigen::Map<const ComplexVector>(x + f * nb, nb); };
  const Eigen::Map<const ComplexVector> lam(sol.traces.data() + disc.dofs.lambda_offset(edge),
                                            disc.dofs.num_trace);
  const double tl = disc.stab.tau_lambda;
  const ComplexVector a = -op.tny[k].transpose().cast<complex>() * field(0);
  const ComplexVector b = op.tnx[k].transpose().cast<complex>() * field(1);
  const ComplexVector c = tl * (op.t[k].transpose().cast<complex>() * field(2));
  const ComplexVector d = -tl * (op.trace_mass[k].cast<complex>() * lam);
  tangential = a + b + c + d;
  scale = std::max({scale, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff(),
                    c.cwiseAbs().maxCoeff(), d.cwiseAbs().maxCoeff()});
  normal = ComplexVector::Zero(disc.dofs.num_trace);
  if (disc.dofs.has_current[element])
  {
    const Eigen::Map<const ComplexVector> eta(sol.traces.data() + disc.dofs.eta_offset(edge),
                                              disc.dofs.num_trace);
    const double te = disc.stab.tau_eta;
    const ComplexVector p = op.tnx[k].transpose().cast<complex>() * field(3);
    const ComplexVector r = op.tny[k].transpose().cast<complex>() * field(4);
    const ComplexVector s = te * (op.t[k].transpose().cast<complex>() * field(5));
    const ComplexVector u = -te * (op.trace_mass[k].cast<complex>() * eta);
    normal = p + r + s + u;
    scale = std::max({scale, p.cwiseAbs().maxCoeff(), r.cwiseAbs().maxCoeff(),
                      s.cwiseAbs().maxCoeff(), u.cwiseAbs().maxCoeff()});
  }
}

}  // namespace

double trace_jump_residual(const Discretization &disc, const FieldSolution &sol)
{
  double worst = 0.0, scale = 0.0;
  for (const Edge &e : disc.skeleton.edges)
  {
    if (e.num_sides != 2)
    {
      continue;
    }
    ComplexVector t0, n0, t1, n1;
    side_traces(disc, sol, e.sides[0].element, e.sides[0].local_edge, t0, n0, scale);
    side_traces(disc, sol, e.sides[1].element, e.sides[1].local_edge, t1, n1, scale);
    worst = std::max(worst, (t0 + t1).cwiseAbs().maxCoeff());
    const bool both = disc.dofs.has_current[e.sides[0].element] &&
                      disc.dofs.has_current[e.sides[1].element];
    if (both)
    {
      worst = std::max(worst, (n0 + n1).cwiseAbs().maxCoeff());
    }
  }
  return scale > 0.0 ? worst / scale : 0.0;
}

double hard_wall_residual(const Discretization &disc, const FieldSolution &sol)
{
  if (!disc.hydrodynamic)
  {
    fail(ErrorKind::Validation, "hard_wall_residual: solution carries no current");
  }
  const int nb = disc.dofs.num_basis;
  const int nt = disc.dofs.num_trace;
  const ReferenceElement &ref = *disc.ref;
  double num = 0.0, den = 0.0;
  for (int edge = 0; edge < disc.skeleton.num_edges(); ++edge)
  {
    const Edge &e = disc.skeleton.edges[edge];
    if (e.cls != EdgeClass::ScattererSurface)
    {
      continue;
    }
    for (int s = 0; s < e.num_sides; ++s)
    {
      const EdgeSide &side = e.sides[s];
      if (!disc.dofs.has_current[side.element])
      {
        continue;
      }
      const auto &ed = disc.geometry[side.element].edges[side.local_edge];
      const RealMatrix &phi = ref.edge_values[side.local_edge];
      const RealMatrix &mu = oriented_trace(ref, side.sign);
      const complex *x = sol.locals.data() + disc.dofs.local_offset[side.element];
      const complex *eta = sol.traces.data() + disc.dofs.eta_offset(edge);
      for (std::size_t q = 0; q < ed.points.size(); ++q)
      {
        const Index qi = static_cast<Index>(q);
        complex jx = 0.0, jy = 0.0, qv = 0.0, ev = 0.0;
        for (int i = 0; i < nb; ++i)
        {
          jx += phi(qi, i) * x[3 * nb + i];
          jy += phi(qi, i) * x[4 * nb + i];
          qv += phi(qi, i) * x[5 * nb + i];
        }
        for (int m = 0; m < nt; ++m)
        {
          ev += mu(qi, m) * eta[m];
        }
        const Vec2 n = ed.normals[q];
        const complex jn = n.x * jx + n.y * jy + disc.stab.tau_eta * (qv - ev);
        num += ed.weights[q] * std::abs(jn);
        den += ed.weights[q] * std::sqrt(std::norm(jx) + std::norm(jy));
      }
    }
  }
  return den > 0.0 ? num / den : 0.0;
}

PointFields evaluate_fields(const Discretization &disc, const FieldSolution &sol, int element,
                            Vec2 ref)
{
  RealMatrix v;
  const Vec2 pt[1] = {ref};
  disc.ref->basis.evaluate(pt, v);
  const int nb = disc.dofs.num_basis;
  const complex *x = sol.locals.data() + disc.dofs.local_offset[element];
  auto eval = [&](int f) {
    complex s = 0.0;
    for (int i = 0; i < nb; ++i)
    {
      s += v(0, i) * x[f * nb + i];
    }
    return s;
  };
  PointFields p;
  p.e = {eval(0), eval(1)};
  p.h = eval(2);
  if (disc.dofs.has_current[element])
  {
    p.j = {eval(3), eval(4)};
    p.q = eval(5);
  }
  return p;
}

}  // namespace hdgnl
