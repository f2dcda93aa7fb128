#ifndef HDGNL_MESH_HPP
#define HDGNL_MESH_HPP

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hdgnl/common.hpp"

namespace hdgnl
{

enum class Domain
{
  FreeSpace,
  Scatterer
};

// Maps Gmsh physical-group tags onto domains. Supplied by the run configuration.
using TagTable = std::map<int, Domain>;

// Unstructured triangle mesh. Coordinates are in meters and every triangle is stored
// counterclockwise.
struct Mesh
{
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Domain> domains;
  std::vector<int> physical_tags;

  int num_nodes() const { return static_cast<int>(nodes.size()); }
  int num_elements() const { return static_cast<int>(triangles.size()); }
  bool has_scatterer() const;
  double signed_area(int element) const;
};

// Checks the Mesh invariants (index range, positive orientation, no duplicates);
// throws Error(Validation) naming the first offending triangle.
void validate_mesh(const Mesh &mesh);

// Gmsh MSH 2.2 ASCII reader. Coordinates are multiplied by `scale` to obtain meters.
// Point and line elements are accepted and ignored and nodes not used by any triangle
// are dropped. Any other element type is an error, as is a triangle whose physical
// tag is missing from `tags`.
Mesh load_gmsh(const std::string &path, const TagTable &tags, double scale = 1.0);

// Same as load_gmsh but reading from an in-memory string; `source` names it in errors.
Mesh parse_gmsh(const std::string &text, const TagTable &tags, double scale = 1.0,
                const std::string &source = "<string>");

// Writes MSH 2.2 ASCII (used by tests and the structured cavity generator).
std::string write_gmsh(const Mesh &mesh, double scale = 1.0);

// Uniform right-triangle mesh of [0, L]^2 with n x n squares, all tagged Scatterer.
Mesh structured_square(double side, int n);

enum class EdgeClass
{
  Interior,
  AbsorbingBoundary,
  ScattererInterior,
  ScattererSurface
};

const char *to_string(EdgeClass c);

// One side of an edge as seen from an incident element. `sign` is +1 when the
// element's counterclockwise traversal of its local edge runs along the canonical
// orientation (lower node index first), in which case its outward normal equals the
// canonical normal; -1 otherwise.
struct EdgeSide
{
  int element = -1;
  int local_edge = -1;
  int sign = 0;
};

struct Edge
{
  std::array<int, 2> nodes{};  // canonical: nodes[0] < nodes[1]
  std::array<EdgeSide, 2> sides{};
  int num_sides = 0;
  EdgeClass cls = EdgeClass::Interior;
  // Single-sided edge on the outer boundary of the computational domain. A boundary
  // edge of a scatterer element (cavity) is ScattererSurface and on_boundary at once.
  bool on_boundary = false;
};

// Edge skeleton F_h with adjacency, orientation and domain classification.
struct Skeleton
{
  std::vector<Edge> edges;
  std::vector<std::array<int, 3>> element_edges;
  // Position of each edge inside F_h^I (edges of scatterer elements), or -1.
  std::vector<int> scatterer_edge_index;
  int num_scatterer_edges = 0;

  int num_edges() const { return static_cast<int>(edges.size()); }
};

// Local edge k of a triangle runs from vertex k to vertex (k + 1) % 3.
inline std::array<int, 2> local_edge_vertices(int k) { return {k, (k + 1) % 3}; }

Skeleton build_skeleton(const Mesh &mesh);

// Quadratic edge map x(s) = x0 (1-s)(1-2s) + xm 4s(1-s) + x1 s(2s-1), s in [0, 1],
// parameterized along the canonical edge orientation.
struct CurvedEdgeMap
{
  int edge = -1;
  std::array<Vec2, 3> control{};  // x0, xm, x1

  Vec2 point(double s) const;
  Vec2 tangent(double s) const;  // dx/ds
  // Coefficients of x(s) = a + b s + c s^2.
  std::array<Vec2, 3> coefficients() const;
};

struct Circle
{
  Vec2 center;
  double radius = 0.0;
};

// Builds quadratic maps for every ScattererSurface edge. Each edge is matched to the
// circle on which both endpoints lie (relative tolerance `tol` of the radius) and its
// mid control point is projected radially onto that circle.
std::vector<CurvedEdgeMap> curved_boundary_map(const Mesh &mesh, const Skeleton &skeleton,
                                               const std::vector<Circle> &circles,
                                               double tol = 1e-6);

// Single-edge variant used by curved_boundary_map; throws on a zero-length edge or an
// endpoint off the circle.
CurvedEdgeMap curve_edge_onto_circle(int edge, Vec2 a, Vec2 b, const Circle &circle,
                                     double tol = 1e-6);

struct MeshStats
{
  int nodes = 0;
  int elements = 0;
  int scatterer_elements = 0;
  int edges = 0;
  int interior_edges = 0;
  int absorbing_boundary_edges = 0;
  int scatterer_interior_edges = 0;
  int scatterer_surface_edges = 0;
  int outer_boundary_edges = 0;
  int scatterer_edges = 0;  // |F_h^I|
  double total_area = 0.0;
};

MeshStats mesh_stats(const Mesh &mesh, const Skeleton &skeleton);

// "key: value" lines, one per MeshStats field, in declaration order.
std::string format_mesh_stats(const MeshStats &stats);

// FNV-1a hash of the node coordinates and connectivity (run-summary provenance).
std::uint64_t mesh_hash(const Mesh &mesh);

}  // namespace hdgnl

#endif  // HDGNL_MESH_HPP
