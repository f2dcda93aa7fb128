#include "hdgnl/approximation.hpp"

#include <algorithm>

namespace hdgnl
{

TriangleBasis::TriangleBasis(int degree) : degree_(degree)
{
  if (degree < 1 || degree > max_degree)
  {
    fail(ErrorKind::Argument, "basis degree " + std::to_string(degree) + " outside [1, " +
                                  std::to_string(max_degree) + "]");
  }
  for (int j = 0; j <= degree; ++j)
  {
    for (int i = 0; i + j <= degree; ++i)
    {
      nodes_.push_back({static_cast<double>(i) / degree, static_cast<double>(j) / degree});
    }
  }
  for (int total = 0; total <= degree; ++total)
  {
    for (int b = 0; b <= total; ++b)
    {
      exponents_.push_back({total - b, b});
    }
  }
  const int n = size();
  RealMatrix vandermonde(n, n);
  for (int k = 0; k < n; ++k)
  {
    for (int m = 0; m < n; ++m)
    {
      vandermonde(k, m) =
          std::pow(nodes_[k].x, exponents_[m][0]) * std::pow(nodes_[k].y, exponents_[m][1]);
    }
  }
  coeffs_ = vandermonde.fullPivLu().inverse();
}

void TriangleBasis::evaluate(std::span<const Vec2> points, RealMatrix &values, RealMatrix *dxi,
                             RealMatrix *deta) const
{
  const int n = size();
  const int np = static_cast<int>(points.size());
  RealMatrix mono(np, n), mx(np, n), my(np, n);
  auto ipow = [](double x, int e) { return e <= 0 ? 1.0 : std::pow(x, e); };
  for (int q = 0; q < np; ++q)
  {
    const auto [x, y] = points[q];
    for (int m = 0; m < n; ++m)
    {
      const int a = exponents_[m][0];
      const int b = exponents_[m][1];
      mono(q, m) = ipow(x, a) * ipow(y, b);
      mx(q, m) = a > 0 ? a * ipow(x, a - 1) * ipow(y, b) : 0.0;
      my(q, m) = b > 0 ? b * ipow(x, a) * ipow(y, b - 1) : 0.0;
    }
  }
  values = mono * coeffs_;
  if (dxi != nullptr)
  {
    *dxi = mx * coeffs_;
  }
  if (deta != nullptr)
  {
    *deta = my * coeffs_;
  }
}

EdgeBasis::EdgeBasis(int degree) : degree_(degree)
{
  if (degree < 1 || degree > max_degree)
  {
    fail(ErrorKind::Argument, "edge basis degree " + std::to_string(degree) + " out of range");
  }
}

double EdgeBasis::value(int i, double s) const
{
  double v = 1.0;
  const double si = static_cast<double>(i) / degree_;
  for (int k = 0; k <= degree_; ++k)
  {
    if (k != i)
    {
      const double sk = static_cast<double>(k) / degree_;
      v *= (s - sk) / (si - sk);
    }
  }
  return v;
}

void gauss_legendre(int n, std::vector<double> &x, std::vector<double> &w)
{
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  for (int i = 0; i < n; ++i)
  {
    double z = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it)
    {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k)
      {
        const double pk = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      if (n == 1)
      {
        p0 = 1.0;
        p1 = z;
      }
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16)
      {
        break;
      }
    }
    x[n - 1 - i] = z;
    w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
}

QuadratureRule make_quadrature(int order, QuadratureDomain domain)
{
  if (order < 1 || order > 40)
  {
    fail(ErrorKind::Argument, "unsupported quadrature order " + std::to_string(order));
  }
  QuadratureRule rule;
  rule.order = order;
  std::vector<double> x, w;
  if (domain == QuadratureDomain::Edge)
  {
    gauss_legendre((order + 2) / 2, x, w);
    for (std::size_t i = 0; i < x.size(); ++i)
    {
      rule.points.push_back({0.5 * (x[i] + 1.0), 0.0});
      rule.weights.push_back(0.5 * w[i]);
    }
    return rule;
  }
  // The Duffy factor (1 - u) raises the degree in u by one.
  gauss_legendre((order + 3) / 2, x, w);
  for (std::size_t i = 0; i < x.size(); ++i)
  {
    const double u = 0.5 * (x[i] + 1.0);
    for (std::size_t j = 0; j < x.size(); ++j)
    {
      const double v = 0.5 * (x[j] + 1.0);
      rule.points.push_back({u, (1.0 - u) * v});
      rule.weights.push_back(0.25 * w[i] * w[j] * (1.0 - u));
    }
  }
  return rule;
}

namespace
{

constexpr std::array<Vec2, 3> ref_vertices{Vec2{0.0, 0.0}, Vec2{1.0, 0.0}, Vec2{0.0, 1.0}};

}  // namespace

Vec2 local_edge_point(int k, double s)
{
  const Vec2 a = ref_vertices[k];
  const Vec2 b = ref_vertices[(k + 1) % 3];
  return a + s * (b - a);
}

Vec2 ElementShape::map(Vec2 r) const
{
  if (kind == MappingKind::Affine)
  {
    return control[0] + r.x * (control[1] - control[0]) + r.y * (control[2] - control[0]);
  }
  const double l0 = 1.0 - r.x - r.y, l1 = r.x, l2 = r.y;
  const std::array<double, 6> n{l0 * (2 * l0 - 1), l1 * (2 * l1 - 1), l2 * (2 * l2 - 1),
                                4 * l0 * l1,       4 * l1 * l2,       4 * l2 * l0};
  Vec2 x;
  for (int i = 0; i < 6; ++i)
  {
    x = x + n[i] * control[i];
  }
  return x;
}

std::array<double, 4> ElementShape::jacobian(Vec2 r) const
{
  if (kind == MappingKind::Affine)
  {
    const Vec2 a = control[1] - control[0];
    const Vec2 b = control[2] - control[0];
    return {a.x, b.x, a.y, b.y};
  }
  const double l0 = 1.0 - r.x - r.y, l1 = r.x, l2 = r.y;
  // d/dxi and d/deta of the six quadratic shape functions (dl0 = -1, -1).
  const std::array<double, 6> dx{-(4 * l0 - 1), 4 * l1 - 1, 0.0,
                                 4 * (l0 - l1), 4 * l2,     -4 * l2};
  const std::array<double, 6> dy{-(4 * l0 - 1), 0.0,    4 * l2 - 1,
                                 -4 * l1,       4 * l1, 4 * (l0 - l2)};
  std::array<double, 4> j{0.0, 0.0, 0.0, 0.0};
  for (int i = 0; i < 6; ++i)
  {
    j[0] += dx[i] * control[i].x;
    j[1] += dy[i] * control[i].x;
    j[2] += dx[i] * control[i].y;
    j[3] += dy[i] * control[i].y;
  }
  return j;
}

CurvedEdges::CurvedEdges(int num_edges, const std::vector<CurvedEdgeMap> &maps)
    : slot_(num_edges, -1), maps_(maps)
{
  for (std::size_t i = 0; i < maps_.size(); ++i)
  {
    if (maps_[i].edge < 0 || maps_[i].edge >= num_edges)
    {
      fail(ErrorKind::Argument, "curved edge map references edge out of range");
    }
    slot_[maps_[i].edge] = static_cast<int>(i);
  }
}

const CurvedEdgeMap *CurvedEdges::find(int edge) const
{
  if (slot_.empty() || slot_[edge] < 0)
  {
    return nullptr;
  }
  return &maps_[slot_[edge]];
}

ElementShape element_shape(const Mesh &mesh, const Skeleton &skeleton,
                           const CurvedEdges &curved, int element)
{
  ElementShape shape;
  const auto &t = mesh.triangles[element];
  for (int k = 0; k < 3; ++k)
  {
    shape.control[k] = mesh.nodes[t[k]];
  }
  for (int k = 0; k < 3; ++k)
  {
    const auto [i, j] = local_edge_vertices(k);
    shape.control[3 + k] = 0.5 * (shape.control[i] + shape.control[j]);
    if (const auto *map = curved.find(skeleton.element_edges[element][k]))
    {
      shape.control[3 + k] = map->control[1];
      shape.kind = MappingKind::Curved;
    }
  }
  return shape;
}

ElementGeometry geometric_map(const Mesh &mesh, const Skeleton &skeleton,
                              const CurvedEdges &curved, int element,
                              const QuadratureRule &tri_rule, const QuadratureRule &edge_rule)
{
  if (element < 0 || element >= mesh.num_elements())
  {
    fail(ErrorKind::Argument, "geometric_map: element out of range");
  }
  const ElementShape shape = element_shape(mesh, skeleton, curved, element);
  ElementGeometry g;
  g.element = element;
  g.kind = shape.kind;
  const std::size_t nq = tri_rule.points.size();
  g.points.resize(nq);
  g.det_jacobian.resize(nq);
  g.inverse.resize(nq);
  g.weights.resize(nq);
  for (std::size_t q = 0; q < nq; ++q)
  {
    const Vec2 r = tri_rule.points[q];
    g.points[q] = shape.map(r);
    const auto j = shape.jacobian(r);
    const double det = j[0] * j[3] - j[1] * j[2];
    if (!(det > 0.0))
    {
      fail(ErrorKind::Numerical,
           "geometric_map: nonpositive Jacobian in element " + std::to_string(element));
    }
    g.det_jacobian[q] = det;
    g.inverse[q] = {j[3] / det, -j[1] / det, -j[2] / det, j[0] / det};
    g.weights[q] = tri_rule.weights[q] * det;
  }
  for (int k = 0; k < 3; ++k)
  {
    auto &ed = g.edges[k];
    const Vec2 dr = ref_vertices[(k + 1) % 3] - ref_vertices[k];
    for (std::size_t q = 0; q < edge_rule.points.size(); ++q)
    {
      const Vec2 r = local_edge_point(k, edge_rule.points[q].x);
      const auto j = shape.jacobian(r);
      const Vec2 t{j[0] * dr.x + j[1] * dr.y, j[2] * dr.x + j[3] * dr.y};
      const double len = norm(t);
      ed.points.push_back(shape.map(r));
      ed.normals.push_back({t.y / len, -t.x / len});
      ed.weights.push_back(edge_rule.weights[q] * len);
    }
  }
  return g;
}

bool inverse_map(const ElementShape &shape, Vec2 x, Vec2 &ref, double tol)
{
  ref = {1.0 / 3.0, 1.0 / 3.0};
  const int max_iter = shape.kind == MappingKind::Affine ? 2 : 30;
  for (int it = 0; it < max_iter; ++it)
  {
    const Vec2 res = shape.map(ref) - x;
    const auto j = shape.jacobian(ref);
    const double det = j[0] * j[3] - j[1] * j[2];
    const Vec2 step{(j[3] * res.x - j[1] * res.y) / det, (-j[2] * res.x + j[0] * res.y) / det};
    ref = ref - step;
    if (norm(step) < 1e-15)
    {
      break;
    }
  }
  const double slack = 1e-10;
  const bool inside = ref.x >= -slack && ref.y >= -slack && ref.x + ref.y <= 1.0 + slack;
  const Vec2 back = shape.map(ref);
  const double scale = norm(shape.control[1] - shape.control[0]) + norm(shape.control[2] - shape.control[0]);
  return inside && norm(back - x) <= tol * std::max(scale, 1e-300) + 1e-300;
}

ReferenceElement::ReferenceElement(int deg, int quad_order)
    : degree(deg),
      basis(deg),
      edge_basis(deg),
      tri_rule(make_quadrature(quad_order > 0 ? quad_order : 2 * deg + 2,
                               QuadratureDomain::Triangle)),
      edge_rule(make_quadrature(quad_order > 0 ? quad_order : 2 * deg + 2, QuadratureDomain::Edge))
{
  basis.evaluate(tri_rule.points, values, &dxi, &deta);
  const std::size_t ne = edge_rule.points.size();
  for (int k = 0; k < 3; ++k)
  {
    std::vector<Vec2> pts;
    for (const auto &p : edge_rule.points)
    {
      pts.push_back(local_edge_point(k, p.x));
    }
    basis.evaluate(pts, edge_values[k]);
  }
  for (int dir = 0; dir < 2; ++dir)
  {
    trace_values[dir].resize(static_cast<Eigen::Index>(ne), edge_basis.size());
    for (std::size_t q = 0; q < ne; ++q)
    {
      const double s = dir == 0 ? edge_rule.points[q].x : 1.0 - edge_rule.points[q].x;
      for (int i = 0; i < edge_basis.size(); ++i)
      {
        trace_values[dir](static_cast<Eigen::Index>(q), i) = edge_basis.value(i, s);
      }
    }
  }
}

}  // namespace hdgnl
