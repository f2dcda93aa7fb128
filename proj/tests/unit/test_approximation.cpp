#include <cmath>
#include <random>

#include "doctest.h"
#include "hdgnl/approximation.hpp"

using namespace hdgnl;

namespace
{

double factorial(int n) { return n <= 1 ? 1.0 : n * factorial(n - 1); }

// Integral of x^a y^b over the reference triangle: a! b! / (a + b + 2)!.
double monomial_integral(int a, int b) { return factorial(a) * factorial(b) / factorial(a + b + 2); }

std::vector<Vec2> random_points(int n, unsigned seed)
{
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> p;
  while (static_cast<int>(p.size()) < n)
  {
    const double x = u(rng), y = u(rng);
    if (x + y <= 1.0)
    {
      p.push_back({x, y});
    }
  }
  return p;
}

}  // namespace

TEST_CASE("P1 basis at the centroid")
{
  TriangleBasis b(1);
  std::vector<Vec2> c{{1.0 / 3.0, 1.0 / 3.0}};
  RealMatrix v;
  b.evaluate(c, v);
  for (int i = 0; i < 3; ++i)
  {
    CHECK(v(0, i) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  }
}

TEST_CASE("nodal property, partition of unity and dimensions")
{
  for (int p = 1; p <= max_degree; ++p)
  {
    TriangleBasis b(p);
    CHECK(b.size() == (p + 1) * (p + 2) / 2);
    RealMatrix v, dx, dy;
    b.evaluate(b.nodes(), v);
    CHECK((v - RealMatrix::Identity(b.size(), b.size())).cwiseAbs().maxCoeff() < 1e-12);

    const auto pts = random_points(25, 3 + p);
    b.evaluate(pts, v, &dx, &dy);
    for (int q = 0; q < static_cast<int>(pts.size()); ++q)
    {
      CHECK(std::abs(v.row(q).sum() - 1.0) < 1e-12);
      CHECK(std::abs(dx.row(q).sum()) < 1e-11);
      CHECK(std::abs(dy.row(q).sum()) < 1e-11);
    }
    EdgeBasis eb(p);
    CHECK(eb.size() == p + 1);
    double s = 0.0;
    for (int i = 0; i <= p; ++i)
    {
      s += eb.value(i, 0.37);
      CHECK(eb.value(i, static_cast<double>(i) / p) == doctest::Approx(1.0));
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-13));
  }
  CHECK_THROWS_AS(TriangleBasis(0), Error);
  CHECK_THROWS_AS(TriangleBasis(5), Error);
}

TEST_CASE("nodal interpolation reproduces polynomials")
{
  for (int p = 1; p <= max_degree; ++p)
  {
    TriangleBasis b(p);
    auto f = [p](Vec2 x) { return std::pow(x.x, p) - 2.0 * std::pow(x.y, p - 1) * x.x + 0.5; };
    Eigen::VectorXd coef(b.size());
    for (int i = 0; i < b.size(); ++i)
    {
      coef[i] = f(b.nodes()[i]);
    }
    const auto pts = random_points(20, 17);
    RealMatrix v;
    b.evaluate(pts, v);
    const Eigen::VectorXd vals = v * coef;
    for (int q = 0; q < static_cast<int>(pts.size()); ++q)
    {
      CHECK(std::abs(vals[q] - f(pts[q])) < 1e-12);
    }
  }
}

TEST_CASE("quadrature exactness")
{
  for (int order = 1; order <= 12; ++order)
  {
    const QuadratureRule tri = make_quadrature(order, QuadratureDomain::Triangle);
    const QuadratureRule edge = make_quadrature(order, QuadratureDomain::Edge);
    double wsum = 0.0;
    for (double w : tri.weights)
    {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(std::abs(wsum - 0.5) < 1e-14);
    for (int a = 0; a <= order; ++a)
    {
      for (int b = 0; a + b <= order; ++b)
      {
        double s = 0.0;
        for (std::size_t q = 0; q < tri.points.size(); ++q)
        {
          s += tri.weights[q] * std::pow(tri.points[q].x, a) * std::pow(tri.points[q].y, b);
        }
        CHECK(std::abs(s - monomial_integral(a, b)) <= 1e-13 * monomial_integral(a, b));
      }
      double s = 0.0;
      for (std::size_t q = 0; q < edge.points.size(); ++q)
      {
        s += edge.weights[q] * std::pow(edge.points[q].x, a);
      }
      CHECK(std::abs(s - 1.0 / (a + 1)) <= 1e-13 / (a + 1));
    }
  }
  const QuadratureRule mid = make_quadrature(1, QuadratureDomain::Edge);
  REQUIRE(mid.points.size() == 1);
  CHECK(mid.points[0].x == doctest::Approx(0.5));
  CHECK(mid.weights[0] == doctest::Approx(1.0));

  const QuadratureRule r = make_quadrature(5, QuadratureDomain::Triangle);
  double s = 0.0;
  for (std::size_t q = 0; q < r.points.size(); ++q)
  {
    s += r.weights[q] * std::pow(r.points[q].x, 2) * std::pow(r.points[q].y, 3);
  }
  CHECK(std::abs(s - monomial_integral(2, 3)) < 1e-13 * monomial_integral(2, 3));
  CHECK_THROWS_AS(make_quadrature(0, QuadratureDomain::Edge), Error);
}

TEST_CASE("affine geometric maps")
{
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}, {2, 0}, {0, 2}};
  m.triangles = {{0, 1, 2}, {0, 3, 4}};
  m.domains.assign(2, Domain::FreeSpace);
  m.physical_tags.assign(2, 1);
  Skeleton s = build_skeleton(m);
  ReferenceElement ref(2);
  CurvedEdges none;
  ElementGeometry g0 = geometric_map(m, s, none, 0, ref.tri_rule, ref.edge_rule);
  ElementGeometry g1 = geometric_map(m, s, none, 1, ref.tri_rule, ref.edge_rule);
  double area = 0.0;
  for (std::size_t q = 0; q < g0.points.size(); ++q)
  {
    CHECK(g0.det_jacobian[q] == doctest::Approx(1.0));
    CHECK(g0.inverse[q][0] == doctest::Approx(1.0));
    CHECK(g0.inverse[q][1] == doctest::Approx(0.0));
    CHECK(g1.det_jacobian[q] == doctest::Approx(4.0));
    area += g1.weights[q];
  }
  CHECK(area == doctest::Approx(2.0).epsilon(1e-14));
  // Outward normal of the hypotenuse of element 1.
  CHECK(g1.edges[1].normals[0].x == doctest::Approx(std::sqrt(0.5)));
  CHECK(g1.edges[1].normals[0].y == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("curved element integrates the arc length")
{
  const double r = 2e-9;
  const double t0 = 0.2, t1 = 0.6;
  Mesh m;
  m.nodes = {{0, 0}, {r * std::cos(t0), r * std::sin(t0)}, {r * std::cos(t1), r * std::sin(t1)}};
  m.triangles = {{0, 1, 2}};
  m.domains = {Domain::Scatterer};
  m.physical_tags = {2};
  Skeleton s = build_skeleton(m);
  const int e = s.element_edges[0][1];
  std::vector<CurvedEdgeMap> maps{
      curve_edge_onto_circle(e, m.nodes[s.edges[e].nodes[0]], m.nodes[s.edges[e].nodes[1]],
                             {{0, 0}, r})};
  CurvedEdges curved(s.num_edges(), maps);
  double prev = 1.0;
  for (int order = 4; order <= 16; order += 4)
  {
    ReferenceElement ref(2, order);
    ElementGeometry g = geometric_map(m, s, curved, 0, ref.tri_rule, ref.edge_rule);
    CHECK(g.kind == MappingKind::Curved);
    double len = 0.0;
    for (double w : g.edges[1].weights)
    {
      len += w;
    }
    // The quadratic arc approximates r * dtheta to the curve's own accuracy; the
    // quadrature of the curve's length converges to the exact parametric length.
    const CurvedEdgeMap &map = maps[0];
    const QuadratureRule fine = make_quadrature(30, QuadratureDomain::Edge);
    double exact = 0.0;
    for (std::size_t i = 0; i < fine.points.size(); ++i)
    {
      exact += fine.weights[i] * norm(map.tangent(fine.points[i].x));
    }
    const double err = std::abs(len - exact) / exact;
    CHECK(err <= prev + 1e-15);
    prev = err;
    CHECK(std::abs(len - r * (t1 - t0)) / (r * (t1 - t0)) < 2e-4);
    for (double d : g.det_jacobian)
    {
      CHECK(d > 0.0);
    }
  }
  CHECK(prev < 1e-10);
}

TEST_CASE("curved edge with a short chord matches the arc length closely")
{
  // A surface edge spanning a small angle (as on the benchmark meshes).
  const double r = 2e-9, dt = 2.0 * pi / 128;
  const Vec2 a{r, 0.0}, b{r * std::cos(dt), r * std::sin(dt)};
  CurvedEdgeMap map = curve_edge_onto_circle(0, a, b, {{0, 0}, r});
  const QuadratureRule q = make_quadrature(10, QuadratureDomain::Edge);
  double len = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i)
  {
    len += q.weights[i] * norm(map.tangent(q.points[i].x));
  }
  CHECK(std::abs(len - r * dt) / (r * dt) < 1e-6);
}

TEST_CASE("inverse map")
{
  ElementShape shape;
  shape.control = {Vec2{0, 0}, Vec2{2, 0}, Vec2{0, 1}, Vec2{1, -0.1}, Vec2{1, 0.5}, Vec2{0, 0.5}};
  shape.kind = MappingKind::Curved;
  Vec2 ref;
  const Vec2 x = shape.map({0.2, 0.3});
  CHECK(inverse_map(shape, x, ref));
  CHECK(ref.x == doctest::Approx(0.2));
  CHECK(ref.y == doctest::Approx(0.3));
  CHECK_FALSE(inverse_map(shape, {3.0, 3.0}, ref));
}
