#include <cstring>

#include "doctest.h"
#include "hdgnl/postprocess.hpp"

using namespace hdgnl;

namespace
{

// Square [-s, s]^2 of free space with n x n cells, optionally with a scatterer block
// in the middle cell ring.
Mesh square(double s, int n, bool with_scatterer = false)
{
  Mesh m = structured_square(2.0 * s, n);
  for (auto &x : m.nodes)
  {
    x = x - Vec2{s, s};
  }
  for (int e = 0; e < m.num_elements(); ++e)
  {
    Vec2 c;
    for (int v : m.triangles[e])
    {
      c = c + (1.0 / 3.0) * m.nodes[v];
    }
    const bool inside = with_scatterer && std::abs(c.x) < 0.35 * s && std::abs(c.y) < 0.35 * s;
    m.domains[e] = inside ? Domain::Scatterer : Domain::FreeSpace;
    m.physical_tags[e] = inside ? 2 : 1;
  }
  return m;
}

ScaledCoefficients sodium(double w)
{
  MaterialSpec s;
  s.plasma_frequency = 8.65e15;
  s.damping = 0.01 * s.plasma_frequency;
  s.fermi_velocity = 1.07e6;
  return scale_coefficients(make_frequency_context(s, w * s.plasma_frequency), 1e-9);
}

Discretization nanowire(int degree)
{
  Mesh m = load_gmsh(std::string(HDGNL_SOURCE_DIR) + "/data/meshes/nanowire.msh",
                     {{1, Domain::FreeSpace}, {2, Domain::Scatterer}});
  const Skeleton sk = build_skeleton(m);
  const auto maps = curved_boundary_map(m, sk, {Circle{{0, 0}, 2.0}});
  DiscretizationOptions o;
  o.degree = degree;
  return make_discretization(std::move(m), maps, o);
}

}  // namespace

TEST_CASE("point location")
{
  DiscretizationOptions o;
  o.degree = 1;
  const Discretization d = make_discretization(square(1.0, 4), {}, o);
  const PointLocator loc(d);
  Vec2 ref;
  for (int e = 0; e < d.mesh.num_elements(); ++e)
  {
    Vec2 c;
    for (int v : d.mesh.triangles[e])
    {
      c = c + (1.0 / 3.0) * d.mesh.nodes[v];
    }
    CHECK(loc.locate(c, ref, 0) == e);
    CHECK(loc.locate(c, ref, d.mesh.num_elements() - 1) == e);
    CHECK(ref.x == doctest::Approx(1.0 / 3.0));
    CHECK(ref.y == doctest::Approx(1.0 / 3.0));
  }
  CHECK(loc.locate({5.0, 0.0}, ref) == -1);

  // A shared vertex resolves to the lowest id among its elements.
  const Vec2 vertex{0.0, 0.0};
  int lowest = d.mesh.num_elements();
  for (int e = 0; e < d.mesh.num_elements(); ++e)
  {
    for (int v : d.mesh.triangles[e])
    {
      if (norm(d.mesh.nodes[v] - vertex) < 1e-14)
      {
        lowest = std::min(lowest, e);
      }
    }
  }
  for (int start : {0, 7, 31})
  {
    CHECK(loc.locate(vertex, ref, start) == lowest);
  }
}

TEST_CASE("scattered field")
{
  DiscretizationOptions o;
  o.degree = 2;
  const Discretization d = make_discretization(square(5.0, 4, true), {}, o);
  const PointLocator loc(d);
  Incidence inc;
  inc.amplitude = 0.0;
  const FieldSolution zero = solve_frequency(d, {sodium(0.6), &inc, nullptr});
  const PointFields s = scattered_field(d, zero, loc, inc, {1.0, 2.0});
  CHECK(std::abs(s.h) == 0.0);

  Incidence unit;
  const FieldSolution sol = solve_frequency(d, {sodium(0.6), &unit, nullptr});
  Vec2 ref;
  const int e = loc.locate({3.1, -2.2}, ref);
  const PointFields total = evaluate_fields(d, sol, e, ref);
  const PointFields sca = scattered_field(d, sol, loc, unit, {3.1, -2.2});
  const PlaneWaveValue pw = plane_wave(unit, sol.coeffs.omega, {3.1, -2.2});
  CHECK(std::abs(sca.h - (total.h - pw.h)) < 1e-15);
  CHECK_THROWS_AS(scattered_field(d, sol, loc, unit, {6.0, 0.0}), Error);
}

TEST_CASE("contour samples cover the contour")
{
  DiscretizationOptions o;
  o.degree = 2;
  const Discretization d = make_discretization(square(5.0, 6, true), {}, o);
  const PointLocator loc(d);

  ContourSpec circle;
  circle.radius = 3.5;
  const auto cs = contour_samples(d, loc, circle);
  double length = 0.0;
  for (const ContourSample &s : cs)
  {
    length += s.weight;
    CHECK(norm(s.normal) == doctest::Approx(1.0));
    CHECK(d.mesh.domains[s.element] == Domain::FreeSpace);
  }
  CHECK(length == doctest::Approx(2.0 * pi * 3.5).epsilon(1e-13));
  CHECK(cs.size() % 6 == 0);

  ContourSpec rect;
  rect.shape = ContourShape::Rectangle;
  rect.lower = {-3.3, -2.9};
  rect.upper = {3.7, 3.1};
  double perimeter = 0.0;
  for (const ContourSample &s : contour_samples(d, loc, rect))
  {
    perimeter += s.weight;
  }
  CHECK(perimeter == doctest::Approx(2.0 * (7.0 + 6.0)).epsilon(1e-13));

  circle.density = 1;
  CHECK_THROWS_AS(contour_samples(d, loc, circle), Error);
  circle.density = 0;
  circle.radius = 0.5;  // through the scatterer block
  CHECK_THROWS_AS(contour_samples(d, loc, circle), Error);
  circle.radius = 6.0;  // leaves the mesh
  CHECK_THROWS_AS(contour_samples(d, loc, circle), Error);
}

TEST_CASE("cross sections without scatterer vanish")
{
  DiscretizationOptions o;
  o.degree = 3;
  const Discretization d = make_discretization(square(20.0, 6), {}, o);
  const PointLocator loc(d);
  Incidence inc;
  inc.direction = {0.8, -0.6};
  const FieldSolution sol = solve_frequency(d, {sodium(0.9), &inc, nullptr});
  ContourSpec c;
  c.radius = 12.0;
  const CrossSections x = cross_sections(d, sol, loc, c, inc, 4.0, 1.0);
  CHECK(std::abs(x.sigma_sca) < 1e-6);
  CHECK(std::abs(x.sigma_abs) < 1e-6);
  CHECK(std::abs(x.sigma_ext) < 1e-6);
  CHECK(scattered_contour_norm(d, sol, loc, c, inc) < 1e-6);
}

TEST_CASE("cross sections are amplitude invariant and additive")
{
  DiscretizationOptions o;
  o.degree = 2;
  const Discretization d = make_discretization(square(10.0, 10, true), {}, o);
  const PointLocator loc(d);
  ContourSpec c;
  c.radius = 6.0;
  Incidence one;
  Incidence other;
  other.amplitude = complex(0.0, 3.0);
  const FieldSolution a = solve_frequency(d, {sodium(0.7), &one, nullptr});
  const FieldSolution b = solve_frequency(d, {sodium(0.7), &other, nullptr});
  const CrossSections xa = cross_sections(d, a, loc, c, one, 4.0, 1.0);
  const CrossSections xb = cross_sections(d, b, loc, c, other, 4.0, 1.0);
  CHECK(xa.sigma_ext > 0.0);
  CHECK(xb.sigma_ext == doctest::Approx(xa.sigma_ext).epsilon(1e-10));
  CHECK(xb.sigma_sca == doctest::Approx(xa.sigma_sca).epsilon(1e-10));
  CHECK(xa.sigma_ext == xa.sigma_sca + xa.sigma_abs);
}

TEST_CASE("nanowire cross sections do not depend on the contour")
{
  const Discretization d = nanowire(1);
  const PointLocator loc(d);
  Incidence inc;
  const FieldSolution sol = solve_frequency(d, {sodium(0.69), &inc, nullptr});
  ContourSpec small, large, rect;
  small.radius = 10.0;
  large.radius = 50.0;
  rect.shape = ContourShape::Rectangle;
  rect.lower = {-15.0, -12.0};
  rect.upper = {14.0, 16.0};
  const double a = cross_sections(d, sol, loc, small, inc, 4.0, 1.0).sigma_ext;
  const double b = cross_sections(d, sol, loc, large, inc, 4.0, 1.0).sigma_ext;
  const double c = cross_sections(d, sol, loc, rect, inc, 4.0, 1.0).sigma_ext;
  CHECK(std::abs(b / a - 1.0) < 5e-3);
  CHECK(std::abs(c / a - 1.0) < 5e-3);

  ContourSpec touching;
  touching.radius = 2.05;  // through curved elements
  CHECK_THROWS_AS(contour_samples(d, loc, touching), Error);
}

TEST_CASE("l2 error is a norm")
{
  DiscretizationOptions o;
  o.degree = 2;
  const Discretization d = make_discretization(structured_square(1.0, 3), {}, o);
  FieldSolution zero;
  zero.locals.assign(d.dofs.num_locals, 0.0);
  zero.traces.assign(d.dofs.num_traces(), 0.0);

  const FieldEvaluator one = [](Vec2) {
    PointFields f;
    f.e = {1.0, 0.0};
    return f;
  };
  CHECK(l2_error(d, zero, one).e == doctest::Approx(1.0).epsilon(1e-14));

  const FieldEvaluator f = [](Vec2 x) {
    PointFields p;
    p.e = {std::sin(3 * x.x) * complex(1, 2), x.y * x.y};
    p.h = std::exp(I * x.x);
    p.j = {x.x, complex(0, x.y)};
    p.q = std::cos(x.x * x.y);
    return p;
  };
  const FieldEvaluator g = [](Vec2 x) {
    PointFields p;
    p.e = {x.x - x.y, complex(0, 1)};
    p.h = x.x * x.y;
    p.j = {1.0, std::sin(x.y)};
    p.q = x.x;
    return p;
  };
  const FieldEvaluator sum = [&](Vec2 x) {
    PointFields a = f(x), b = g(x);
    return PointFields{{a.e[0] + b.e[0], a.e[1] + b.e[1]}, a.h + b.h, {a.j[0] + b.j[0], a.j[1] + b.j[1]},
                       a.q + b.q};
  };
  const FieldEvaluator scaled = [&](Vec2 x) {
    PointFields a = f(x);
    const complex s(-2.0, 1.5);
    return PointFields{{s * a.e[0], s * a.e[1]}, s * a.h, {s * a.j[0], s * a.j[1]}, s * a.q};
  };
  const FieldErrors ef = l2_error(d, zero, f), eg = l2_error(d, zero, g), es = l2_error(d, zero, sum);
  const FieldErrors ek = l2_error(d, zero, scaled);
  CHECK(es.e <= ef.e + eg.e);
  CHECK(es.h <= ef.h + eg.h);
  CHECK(es.j <= ef.j + eg.j);
  CHECK(es.q <= ef.q + eg.q);
  CHECK(ek.e == doctest::Approx(2.5 * ef.e).epsilon(1e-13));
  CHECK(ek.h == doctest::Approx(2.5 * ef.h).epsilon(1e-13));

  FieldParts real;
  real.e = FieldPart::Real;
  FieldParts imag;
  imag.e = FieldPart::Imag;
  const double re = l2_error(d, zero, f, real).e, im = l2_error(d, zero, f, imag).e;
  CHECK(re * re + im * im == doctest::Approx(ef.e * ef.e).epsilon(1e-13));
}

TEST_CASE("l2 error of the discrete field against itself is zero")
{
  DiscretizationOptions o;
  o.degree = 3;
  const Discretization d = make_discretization(square(5.0, 4, true), {}, o);
  const PointLocator loc(d);
  Incidence inc;
  const FieldSolution sol = solve_frequency(d, {sodium(0.8), &inc, nullptr});
  const FieldEvaluator self = [&](Vec2 x) {
    Vec2 ref;
    const int e = loc.locate(x, ref);
    return evaluate_fields(d, sol, e, ref);
  };
  FieldSolution zero = sol;
  std::fill(zero.locals.begin(), zero.locals.end(), 0.0);
  const FieldErrors size = l2_error(d, zero, self);
  const FieldErrors err = l2_error(d, sol, self);
  CHECK(err.e < 1e-13 * size.e);
  CHECK(err.h < 1e-13 * size.h);
  CHECK(err.j < 1e-13 * size.j);
  CHECK(err.q < 1e-13 * size.q);
}

TEST_CASE("convergence orders")
{
  const auto two = convergence_orders({{1.0, 1.0}, {0.5, 0.25}, {0.25, 0.0625}});
  CHECK(two[0] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(two[1] == doctest::Approx(2.0).epsilon(1e-15));

  // Tabulated cavity errors for p = 3 and the first three of p = 1.
  const auto p3 = convergence_orders({{5e-8, 2.04e-11}, {2.5e-8, 1.28e-12}, {1.25e-8, 7.78e-14},
                                      {6.25e-9, 5.03e-15}});
  for (double o : p3)
  {
    CHECK(std::round(o * 10.0) / 10.0 == 4.0);
  }
  const auto p1 = convergence_orders({{5e-8, 1.67e-9}, {2.5e-8, 4.10e-10}, {1.25e-8, 9.98e-11}});
  for (double o : p1)
  {
    CHECK(std::round(o * 10.0) / 10.0 == 2.0);
  }

  CHECK_THROWS_AS(convergence_orders({{1.0, 1.0}}), Error);
  CHECK_THROWS_AS(convergence_orders({{1.0, 1.0}, {1.0, 0.5}}), Error);
}

TEST_CASE("peak finding")
{
  const std::vector<double> x{0, 1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> y{0, 3, 1, 2, 1.5, 5, 0, 1};
  const auto peaks = find_peaks(x, y);
  REQUIRE(peaks.size() == 3);
  CHECK(peaks[0].index == 1);
  CHECK(peaks[0].prominence == doctest::Approx(2.0));
  CHECK(peaks[1].index == 3);
  CHECK(peaks[1].prominence == doctest::Approx(0.5));
  CHECK(peaks[2].index == 5);
  CHECK(peaks[2].prominence == doctest::Approx(5.0));
}

TEST_CASE("vtk export structure")
{
  Mesh m;
  m.nodes = {{0, 0}, {1, 0}, {0, 1}};
  m.triangles = {{0, 1, 2}};
  m.domains = {Domain::Scatterer};
  m.physical_tags = {2};
  DiscretizationOptions o;
  o.degree = 1;
  const Discretization d = make_discretization(m, {}, o);
  FieldSolution zero;
  zero.locals.assign(d.dofs.num_locals, 0.0);
  zero.traces.assign(d.dofs.num_traces(), 0.0);
  const std::string vtk = to_vtk(d, zero, "unit");
  CHECK(vtk.find("POINTS 3 double") != std::string::npos);
  CHECK(vtk.find("CELLS 1 4") != std::string::npos);
  CHECK(vtk.find("CELL_TYPES 1") != std::string::npos);
  for (const char *name : {"Re_Ex", "Im_Ex", "Re_Ey", "Im_Ey", "Re_H", "Im_H", "Re_Jx", "Im_Jx",
                           "Re_Jy", "Im_Jy", "Re_q", "Im_q", "abs_E"})
  {
    CHECK(vtk.find(std::string("SCALARS ") + name + " double 1") != std::string::npos);
  }
  const auto data = vtk.substr(vtk.find("POINT_DATA"));
  std::istringstream in(data);
  std::string line;
  int values = 0;
  while (std::getline(in, line))
  {
    if (line.empty() || !(std::isdigit(line[0]) || line[0] == '-'))
    {
      continue;
    }
    CHECK(std::stod(line) == 0.0);
    ++values;
  }
  CHECK(values == 13 * 3);

  o.degree = 3;
  const Discretization d3 = make_discretization(m, {}, o);
  FieldSolution z3;
  z3.locals.assign(d3.dofs.num_locals, 0.0);
  const std::string v3 = to_vtk(d3, z3, "cubic");
  CHECK(v3.find("POINTS 10 double") != std::string::npos);
  CHECK(v3.find("CELLS 9 36") != std::string::npos);
}

TEST_CASE("sweep csv")
{
  const std::vector<CrossSections> one{{1.5e15, 0.1, 0.2, 0.30000000000000004}};
  const std::string s = sweep_csv(one, 1e15);
  CHECK(std::count(s.begin(), s.end(), '\n') == 2);
  CHECK(s.rfind("omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext\n", 0) == 0);

  std::vector<CrossSections> many;
  for (int i = 0; i < 20; ++i)
  {
    const double w = 1e15 * (1.0 + i / 7.0);
    many.push_back({w, std::sqrt(w) * 1e-9, 1.0 / w, std::sqrt(w) * 1e-9 + 1.0 / w});
  }
  const auto back = parse_sweep_csv(sweep_csv(many, 3e15));
  REQUIRE(back.size() == many.size());
  for (std::size_t i = 0; i < many.size(); ++i)
  {
    CHECK(std::memcmp(&back[i], &many[i], sizeof(CrossSections)) == 0);
  }

  std::swap(many[3], many[4]);
  CHECK_THROWS_AS(sweep_csv(many, 3e15), Error);
  CHECK_THROWS_AS(sweep_csv({}, 3e15), Error);
  CHECK_THROWS_AS(parse_sweep_csv("omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext\n1,2,3\n"), Error);
  CHECK_THROWS_AS(parse_sweep_csv("bad header\n"), Error);
}
