#ifndef HDGNL_APPROXIMATION_HPP
#define HDGNL_APPROXIMATION_HPP

#include <array>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hdgnl/common.hpp"
#include "hdgnl/mesh.hpp"

namespace hdgnl
{

inline constexpr int max_degree = 4;

using RealMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Nodal Lagrange basis of P_p on the reference triangle (0,0), (1,0), (0,1) with
// equispaced nodes, ordered lattice-wise: node (i, j) = (i/p, j/p) for j = 0..p,
// i = 0..p-j.
class TriangleBasis
{
public:
  explicit TriangleBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<Vec2> &nodes() const { return nodes_; }

  // values(q, i) = phi_i(points[q]); dxi / deta hold the reference gradients.
  void evaluate(std::span<const Vec2> points, RealMatrix &values, RealMatrix *dxi = nullptr,
                RealMatrix *deta = nullptr) const;

private:
  int degree_;
  std::vector<Vec2> nodes_;
  std::vector<std::array<int, 2>> exponents_;
  RealMatrix coeffs_;  // monomial -> nodal change of basis
};

// Nodal Lagrange basis of P_p on [0, 1] with equispaced nodes k/p.
class EdgeBasis
{
public:
  explicit EdgeBasis(int degree);

  int degree() const { return degree_; }
  int size() const { return degree_ + 1; }
  double value(int i, double s) const;

private:
  int degree_;
};

enum class QuadratureDomain
{
  Triangle,
  Edge
};

// Reference-element rule. Edge points live on [0, 1] (stored in .x); triangle weights
// sum to 1/2, edge weights to 1.
struct QuadratureRule
{
  std::vector<Vec2> points;
  std::vector<double> weights;
  int order = 0;
};

// Gauss-Legendre on the edge; collapsed (Duffy) Gauss-Legendre product on the triangle.
// Both integrate polynomials of total degree <= order exactly.
QuadratureRule make_quadrature(int order, QuadratureDomain domain);

// Gauss-Legendre nodes/weights on [-1, 1].
void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w);

enum class MappingKind
{
  Affine,
  Curved  // quadratic map with at least one curved edge
};

// Geometric data of one element at the quadrature points of a fixed rule.
struct ElementGeometry
{
  int element = -1;
  MappingKind kind = MappingKind::Affine;
  std::vector<Vec2> points;                    // physical quadrature points
  std::vector<double> det_jacobian;            // det J
  std::vector<std::array<double, 4>> inverse;  // J^{-1} row-major (dxi/dx, dxi/dy, deta/dx, deta/dy)
  std::vector<double> weights;                 // reference weight * det J

  // Per local edge, at the edge rule points.
  struct EdgeData
  {
    std::vector<Vec2> points;
    std::vector<Vec2> normals;    // unit outward
    std::vector<double> weights;  // reference weight * |dx/ds|
  };
  std::array<EdgeData, 3> edges;
};

// Quadratic (P2) control nodes of an element: 3 vertices then the midpoints of local
// edges 0, 1, 2 (curved midpoints taken from the maps).
struct ElementShape
{
  std::array<Vec2, 6> control{};
  MappingKind kind = MappingKind::Affine;

  Vec2 map(Vec2 ref) const;
  // Row-major Jacobian d(x,y)/d(xi,eta).
  std::array<double, 4> jacobian(Vec2 ref) const;
};

// Lookup from edge id to its curved map (empty optional slot for straight edges).
class CurvedEdges
{
public:
  CurvedEdges() = default;
  CurvedEdges(int num_edges, const std::vector<CurvedEdgeMap> &maps);
  const CurvedEdgeMap *find(int edge) const;
  bool empty() const { return maps_.empty(); }

private:
  std::vector<int> slot_;
  std::vector<CurvedEdgeMap> maps_;
};

ElementShape element_shape(const Mesh &mesh, const Skeleton &skeleton,
                           const CurvedEdges &curved, int element);

// Reference triangle coordinates of the point at parameter s along local edge k, taken
// in the element's counterclockwise direction.
Vec2 local_edge_point(int k, double s);

ElementGeometry geometric_map(const Mesh &mesh, const Skeleton &skeleton,
                              const CurvedEdges &curved, int element,
                              const QuadratureRule &tri_rule, const QuadratureRule &edge_rule);

// Inverts the element map by Newton iteration; returns false if the point is not inside.
bool inverse_map(const ElementShape &shape, Vec2 x, Vec2 &ref, double tol = 1e-12);

// Precomputed reference tables for a degree and quadrature order.
struct ReferenceElement
{
  explicit ReferenceElement(int degree, int quad_order = -1);

  int degree;
  TriangleBasis basis;
  EdgeBasis edge_basis;
  QuadratureRule tri_rule;
  QuadratureRule edge_rule;
  RealMatrix values, dxi, deta;  // tri_rule points x basis functions
  // Basis traces on local edge k at the edge rule points (counterclockwise parameter).
  std::array<RealMatrix, 3> edge_values;
  // Edge-basis values: trace[0] for parameter s, trace[1] for 1 - s (reversed edge).
  std::array<RealMatrix, 2> trace_values;

  int num_basis() const { return basis.size(); }
  int num_trace() const { return edge_basis.size(); }
};

}  // namespace hdgnl

#endif  // HDGNL_APPROXIMATION_HPP
