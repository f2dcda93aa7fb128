#ifndef HDGNL_HDG_HPP
#define HDGNL_HDG_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "hdgnl/approximation.hpp"
#include "hdgnl/materials.hpp"
#include "hdgnl/mesh.hpp"
#include "hdgnl/sparse.hpp"

namespace hdgnl
{

using ComplexMatrix = Eigen::Matrix<complex, Eigen::Dynamic, Eigen::Dynamic>;
using ComplexVector = Eigen::Matrix<complex, Eigen::Dynamic, 1>;

// Field blocks of the element-local unknown vector, in storage order.
enum class Field
{
  Ex = 0,
  Ey = 1,
  H = 2,
  Jx = 3,
  Jy = 4,
  Q = 5
};

// Layout of all unknowns. Element-local blocks are [Ex, Ey, H] for free-space elements
// (and for every element of a local Drude run) and [Ex, Ey, H, Jx, Jy, q] for
// hydrodynamic scatterer elements, each block of size num_basis. Trace unknowns are
// lambda on every edge followed by eta on every edge of F_h^I, num_trace per edge.
struct DofMap
{
  int degree = 1;
  int num_basis = 0;
  int num_trace = 0;
  int num_edges = 0;
  int num_eta_edges = 0;
  std::vector<int> local_offset;  // per element, into the local vector
  std::vector<int> local_size;    // 3 or 6 blocks of num_basis
  std::vector<char> has_current;
  std::vector<int> eta_edge;  // edge -> position in the eta block, or -1
  index_t num_locals = 0;

  index_t num_traces() const { return static_cast<index_t>(num_edges + num_eta_edges) * num_trace; }
  index_t lambda_offset(int edge) const { return static_cast<index_t>(edge) * num_trace; }
  index_t eta_offset(int edge) const
  {
    return static_cast<index_t>(num_edges + eta_edge[edge]) * num_trace;
  }
  int element_trace_size(int element) const { return (has_current[element] ? 6 : 3) * num_trace; }
};

// eta (and J, q) exist only when `hydrodynamic` is set.
DofMap make_dofmap(const Mesh &mesh, const Skeleton &skeleton, int degree, bool hydrodynamic);

enum class BoundaryKind
{
  SilverMuller,
  PEC
};

struct Stabilization
{
  double tau_lambda = 1.0;
  double tau_eta = 1.0;
};

// Unit-amplitude TM plane wave H_inc = A exp(i k d.x) with E_inc = (-d_y, d_x) H_inc in
// scaled units.
struct Incidence
{
  Vec2 direction{1.0, 0.0};
  complex amplitude{1.0, 0.0};
};

struct PlaneWaveValue
{
  std::array<complex, 2> e{};
  complex h;
};

// Throws Error(Argument) for a direction that is not of unit length.
PlaneWaveValue plane_wave(const Incidence &inc, double omega, Vec2 x);

// Frequency-independent real matrices of one element.
struct ElementOperators
{
  RealMatrix mass;    // (phi_i, phi_j)
  RealMatrix gx, gy;  // (phi_i, d phi_j / dx), (phi_i, d phi_j / dy)
  RealMatrix surface;  // sum over edges <phi_i, phi_j>
  // Per local edge, trace basis taken in the canonical edge orientation.
  std::array<RealMatrix, 3> t, tnx, tny;  // <phi_i, mu_m>, <n_x phi_i, mu_m>, <n_y phi_i, mu_m>
  std::array<RealMatrix, 3> trace_mass;   // <mu_m, mu_l>
};

// Static data of a discretized problem: mesh, skeleton, curved maps, reference tables,
// per-element geometry and operators, and the boundary kind of the outer boundary.
// Coordinates are in scaled length units.
struct Discretization
{
  Mesh mesh;
  Skeleton skeleton;
  CurvedEdges curved;
  std::shared_ptr<const ReferenceElement> ref;
  DofMap dofs;
  std::vector<ElementGeometry> geometry;
  std::vector<ElementOperators> operators;
  BoundaryKind boundary = BoundaryKind::SilverMuller;
  Stabilization stab;
  bool hydrodynamic = true;

  int degree() const { return ref->degree; }
};

struct DiscretizationOptions
{
  int degree = 1;
  bool hydrodynamic = true;
  BoundaryKind boundary = BoundaryKind::SilverMuller;
  Stabilization stab;
  int width = 1;  // threads for the per-element precomputation
};

// `mesh` must already be in scaled length units; `curved_maps` index edges of the
// skeleton built from it.
Discretization make_discretization(Mesh mesh, const std::vector<CurvedEdgeMap> &curved_maps,
                                   const DiscretizationOptions &options);

// Element-local source: values of the Ampere-row source (x, y) and the current-row
// source (x, y) at a physical point.
using VolumeSource = std::function<void(Vec2, std::array<complex, 2> &, std::array<complex, 2> &)>;

struct LocalBlocks
{
  int element = -1;
  ComplexMatrix a;  // local <- local
  ComplexMatrix b;  // local <- element traces
  ComplexMatrix c;  // element traces <- local
  ComplexMatrix d;  // element traces <- element traces
  ComplexVector f;  // local load
};

// Element matrices for the given coefficients; the source (if any) fills f.
LocalBlocks assemble_local_blocks(const Discretization &disc, int element,
                                  const ScaledCoefficients &coeffs, const VolumeSource *source);

struct Condensed
{
  ComplexMatrix schur;  // d - c a^{-1} b
  ComplexVector load;   // -c a^{-1} f
  ComplexMatrix x;      // a^{-1} b (recovery)
  ComplexVector y;      // a^{-1} f (recovery)
};

// Throws Error(Numerical) if a is singular.
Condensed condense_element(const LocalBlocks &blocks);

// Global trace indices of an element's trace vector: lambda on local edges 0, 1, 2,
// then eta on local edges 0, 1, 2 (hydrodynamic scatterer elements only).
std::vector<index_t> element_trace_indices(const Discretization &disc, int element);

// <g_inc, mu> on each outer-boundary edge with g_inc = n x E_inc - H_inc (Silver-Muller
// only); returned as a dense vector over all traces.
std::vector<complex> incident_load(const Discretization &disc, const Incidence &inc, double omega);

struct GlobalSystem
{
  SparseMatrix matrix;
  std::vector<complex> rhs;
};

struct FieldSolution
{
  ScaledCoefficients coeffs;
  std::vector<complex> locals;  // DofMap layout
  std::vector<complex> traces;
  double residual = 0.0;
  FactorDiagnostics diagnostics;
};

// Per-frequency problem: coefficients, optional incidence and volume source.
struct FrequencyProblem
{
  ScaledCoefficients coeffs;
  const Incidence *incidence = nullptr;
  const VolumeSource *source = nullptr;
};

struct CondensedSystem
{
  GlobalSystem global;
  std::vector<Condensed> elements;
};

CondensedSystem assemble_condensed(const Discretization &disc, const FrequencyProblem &problem,
                                   int width = 1);

// Condensed solve followed by element-wise recovery x_K = A_K^{-1}(f_K - B_K Lambda_K).
// `solver` may be reused across frequencies (symbolic analysis is kept).
FieldSolution solve_frequency(const Discretization &disc, const FrequencyProblem &problem,
                              DirectSolver &solver, const SolverOptions &options, int width = 1);

FieldSolution solve_frequency(const Discretization &disc, const FrequencyProblem &problem,
                              const SolverOptions &options = {}, int width = 1);

// Uncondensed system over all unknowns (locals first, then traces). Throws
// Error(Argument) above 200 elements.
GlobalSystem assemble_monolithic(const Discretization &disc, const FrequencyProblem &problem);

FieldSolution solve_monolithic(const Discretization &disc, const FrequencyProblem &problem,
                               const SolverOptions &options = {});

// Residual of the local equations of every element, max_K |A_K x_K + B_K L_K - f_K| /
// max(|f|, |B L|), evaluated on a solution.
double local_residual(const Discretization &disc, const FieldSolution &sol,
                      const FrequencyProblem &problem);

// Weak jumps of the tangential electric and normal current traces, max over interior
// edges and test functions of |<[n x E^], mu>| and |<[n . J^], mu>|, relative to the
// largest single-side contribution.
double trace_jump_residual(const Discretization &disc, const FieldSolution &sol);

// integral |n . J^| / integral |J| over the scatterer surface, J^ the numerical trace.
// Throws Error(Validation) for a solution without current.
double hard_wall_residual(const Discretization &disc, const FieldSolution &sol);

// Values of one element's fields at a reference point.
struct PointFields
{
  std::array<complex, 2> e{};
  complex h;
  std::array<complex, 2> j{};
  complex q;
};

PointFields evaluate_fields(const Discretization &disc, const FieldSolution &sol, int element,
                            Vec2 ref);

}  // namespace hdgnl

#endif  // HDGNL_HDG_HPP
