#include "hdgnl/postprocess.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace hdgnl
{

namespace
{

constexpr double inside_tol = 1e-12;

bool reference_inside(Vec2 r, double tol)
{
  return r.x >= -tol && r.y >= -tol && r.x + r.y <= 1.0 + tol;
}

Vec2 affine_reference(const ElementShape &s, Vec2 x)
{
  const Vec2 a = s.control[1] - s.control[0];
  const Vec2 b = s.control[2] - s.control[0];
  const Vec2 d = x - s.control[0];
  const double det = cross(a, b);
  return {cross(d, b) / det, cross(a, d) / det};
}

}  // namespace

PointLocator::PointLocator(const Discretization &disc) : disc_(disc)
{
  const int ne = disc.mesh.num_elements();
  shapes_.reserve(ne);
  neighbors_.assign(ne, {-1, -1, -1});
  node_elements_.resize(disc.mesh.num_nodes());
  for (int e = 0; e < ne; ++e)
  {
    shapes_.push_back(element_shape(disc.mesh, disc.skeleton, disc.curved, e));
    for (int v : disc.mesh.triangles[e])
    {
      node_elements_[v].push_back(e);
    }
  }
  for (const Edge &edge : disc.skeleton.edges)
  {
    if (edge.num_sides == 2)
    {
      neighbors_[edge.sides[0].element][edge.sides[0].local_edge] = edge.sides[1].element;
      neighbors_[edge.sides[1].element][edge.sides[1].local_edge] = edge.sides[0].element;
    }
  }
}

bool PointLocator::contains(int element, Vec2 x, Vec2 &ref) const
{
  const ElementShape &s = shapes_[element];
  if (s.kind == MappingKind::Affine)
  {
    ref = affine_reference(s, x);
    return reference_inside(ref, inside_tol);
  }
  return inverse_map(s, x, ref, 1e-12);
}

int PointLocator::walk(Vec2 x, int start) const
{
  const int ne = disc_.mesh.num_elements();
  int e = std::clamp(start, 0, ne - 1);
  for (int step = 0; step < ne; ++step)
  {
    const Vec2 r = affine_reference(shapes_[e], x);
    const double bary[3] = {1.0 - r.x - r.y, r.x, r.y};
    int worst = 0;
    for (int i = 1; i < 3; ++i)
    {
      if (bary[i] < bary[worst])
      {
        worst = i;
      }
    }
    if (bary[worst] >= -inside_tol)
    {
      return e;
    }
    // Vertex i is opposite local edge (i + 1) % 3.
    const int next = neighbors_[e][(worst + 1) % 3];
    if (next < 0)
    {
      return -1;
    }
    e = next;
  }
  return -1;
}

int PointLocator::locate(Vec2 x, Vec2 &ref, int start) const
{
  int found = walk(x, start);
  Vec2 r;
  if (found >= 0 && !contains(found, x, r))
  {
    found = -1;
  }
  if (found < 0)
  {
    for (int e = 0; e < disc_.mesh.num_elements(); ++e)
    {
      if (contains(e, x, r))
      {
        found = e;
        break;
      }
    }
  }
  if (found < 0)
  {
    return -1;
  }
  int best = found;
  Vec2 best_ref = r;
  for (int v : disc_.mesh.triangles[found])
  {
    for (int e : node_elements_[v])
    {
      Vec2 rr;
      if (e < best && contains(e, x, rr))
      {
        best = e;
        best_ref = rr;
      }
    }
  }
  ref = best_ref;
  return best;
}

PointFields scattered_field(const Discretization &disc, const FieldSolution &sol,
                            const PointLocator &locator, const Incidence &inc, Vec2 x)
{
  Vec2 ref;
  const int e = locator.locate(x, ref);
  if (e < 0)
  {
    fail(ErrorKind::Argument, "scattered_field: point outside the mesh");
  }
  PointFields f = evaluate_fields(disc, sol, e, ref);
  const PlaneWaveValue pw = plane_wave(inc, sol.coeffs.omega, x);
  f.e[0] -= pw.e[0];
  f.e[1] -= pw.e[1];
  f.h -= pw.h;
  return f;
}

namespace
{

// One smooth piece of a contour: an arc of a circle or a straight segment, in the
// parameter t in [0, 1].
struct ContourCurve
{
  bool arc = true;
  Vec2 center;
  double radius = 0.0;
  Vec2 a, b;  // segment endpoints
  Vec2 normal;  // segment outward normal

  Vec2 point(double t) const
  {
    if (arc)
    {
      const double th = 2.0 * pi * t;
      return center + radius * Vec2{std::cos(th), std::sin(th)};
    }
    return a + t * (b - a);
  }
  Vec2 outward(double t) const
  {
    if (arc)
    {
      const double th = 2.0 * pi * t;
      return {std::cos(th), std::sin(th)};
    }
    return normal;
  }
  double speed() const { return arc ? 2.0 * pi * radius : norm(b - a); }

  // Parameters where the segment [p, q] crosses the curve.
  void crossings(Vec2 p, Vec2 q, std::vector<double> &out) const
  {
    const Vec2 d = q - p;
    if (arc)
    {
      const Vec2 f = p - center;
      const double aa = dot(d, d);
      const double bb = 2.0 * dot(d, f);
      const double cc = dot(f, f) - radius * radius;
      const double disc = bb * bb - 4.0 * aa * cc;
      if (disc < 0.0 || aa == 0.0)
      {
        return;
      }
      const double sq = std::sqrt(disc);
      for (double s : {(-bb - sq) / (2.0 * aa), (-bb + sq) / (2.0 * aa)})
      {
        if (s >= 0.0 && s <= 1.0)
        {
          const Vec2 x = p + s * d - center;
          double th = std::atan2(x.y, x.x);
          if (th < 0.0)
          {
            th += 2.0 * pi;
          }
          out.push_back(th / (2.0 * pi));
        }
      }
      return;
    }
    const Vec2 e = b - a;
    const double den = cross(e, d);
    if (den == 0.0)
    {
      return;
    }
    const Vec2 w = p - a;
    const double t = cross(w, d) / den;
    const double s = cross(w, e) / den;
    if (t >= 0.0 && t <= 1.0 && s >= 0.0 && s <= 1.0)
    {
      out.push_back(t);
    }
  }
};

std::vector<ContourCurve> contour_curves(const ContourSpec &c)
{
  std::vector<ContourCurve> out;
  if (c.shape == ContourShape::Circle)
  {
    if (!(c.radius > 0.0))
    {
      fail(ErrorKind::Validation, "contour: radius must be positive");
    }
    ContourCurve k;
    k.arc = true;
    k.center = c.center;
    k.radius = c.radius;
    out.push_back(k);
    return out;
  }
  if (!(c.upper.x > c.lower.x) || !(c.upper.y > c.lower.y))
  {
    fail(ErrorKind::Validation, "contour: rectangle corners must satisfy lower < upper");
  }
  const Vec2 p0 = c.lower, p1{c.upper.x, c.lower.y}, p2 = c.upper, p3{c.lower.x, c.upper.y};
  const Vec2 corners[5] = {p0, p1, p2, p3, p0};
  const Vec2 normals[4] = {{0, -1}, {1, 0}, {0, 1}, {-1, 0}};
  for (int i = 0; i < 4; ++i)
  {
    ContourCurve k;
    k.arc = false;
    k.a = corners[i];
    k.b = corners[i + 1];
    k.normal = normals[i];
    out.push_back(k);
  }
  return out;
}

}  // namespace

std::vector<ContourSample> contour_samples(const Discretization &disc, const PointLocator &locator,
                                           const ContourSpec &contour)
{
  const int density = contour.density > 0 ? contour.density : 2 * (disc.degree() + 1);
  if (density < 2)
  {
    fail(ErrorKind::Validation, "contour: quadrature density must be at least 2");
  }
  std::vector<double> gx, gw;
  gauss_legendre(density, gx, gw);
  std::vector<ContourSample> samples;
  int hint = 0;
  for (const ContourCurve &curve : contour_curves(contour))
  {
    std::vector<double> ts{0.0, 1.0};
    for (const Edge &e : disc.skeleton.edges)
    {
      curve.crossings(disc.mesh.nodes[e.nodes[0]], disc.mesh.nodes[e.nodes[1]], ts);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-13; }),
             ts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i)
    {
      const double t0 = ts[i], t1 = ts[i + 1];
      if (t1 - t0 < 1e-13)
      {
        continue;
      }
      Vec2 ref;
      const int e = locator.locate(curve.point(0.5 * (t0 + t1)), ref, hint);
      if (e < 0)
      {
        fail(ErrorKind::Validation, "contour: leaves the computational domain");
      }
      if (disc.mesh.domains[e] == Domain::Scatterer)
      {
        fail(ErrorKind::Validation, "contour: intersects a scatterer element");
      }
      if (disc.geometry[e].kind != MappingKind::Affine)
      {
        fail(ErrorKind::Validation, "contour: crosses a curved element");
      }
      hint = e;
      for (int q = 0; q < density; ++q)
      {
        const double t = t0 + 0.5 * (t1 - t0) * (gx[q] + 1.0);
        ContourSample s;
        s.point = curve.point(t);
        s.normal = curve.outward(t);
        s.weight = 0.5 * (t1 - t0) * gw[q] * curve.speed();
        s.element = e;
        s.ref = affine_reference(element_shape(disc.mesh, disc.skeleton, disc.curved, e), s.point);
        samples.push_back(s);
      }
    }
  }
  return samples;
}

CrossSections cross_sections(const Discretization &disc, const FieldSolution &sol,
                             const PointLocator &locator, const ContourSpec &contour,
                             const Incidence &inc, double normalization_length, double omega)
{
  if (!(normalization_length > 0.0))
  {
    fail(ErrorKind::Validation, "cross_sections: normalization length must be positive");
  }
  const auto samples = contour_samples(disc, locator, contour);
  double flux_sca = 0.0, flux_tot = 0.0;
  for (const ContourSample &s : samples)
  {
    const PointFields f = evaluate_fields(disc, sol, s.element, s.ref);
    const PlaneWaveValue pw = plane_wave(inc, sol.coeffs.omega, s.point);
    const complex ex = f.e[0] - pw.e[0], ey = f.e[1] - pw.e[1], h = f.h - pw.h;
    flux_sca += s.weight * (std::conj(h) * (s.normal.x * ey - s.normal.y * ex)).real();
    flux_tot += s.weight * (std::conj(f.h) * (s.normal.x * f.e[1] - s.normal.y * f.e[0])).real();
  }
  const double scale = std::norm(inc.amplitude) * normalization_length;
  CrossSections cs;
  cs.omega = omega;
  if (scale == 0.0)
  {
    return cs;
  }
  cs.sigma_sca = flux_sca / scale;
  cs.sigma_abs = -flux_tot / scale;
  cs.sigma_ext = cs.sigma_sca + cs.sigma_abs;
  return cs;
}

double scattered_contour_norm(const Discretization &disc, const FieldSolution &sol,
                              const PointLocator &locator, const ContourSpec &contour,
                              const Incidence &inc)
{
  double sca = 0.0, ref = 0.0;
  for (const ContourSample &s : contour_samples(disc, locator, contour))
  {
    const PointFields f = evaluate_fields(disc, sol, s.element, s.ref);
    const PlaneWaveValue pw = plane_wave(inc, sol.coeffs.omega, s.point);
    sca += s.weight * (std::norm(f.e[0] - pw.e[0]) + std::norm(f.e[1] - pw.e[1]) +
                       std::norm(f.h - pw.h));
    ref += s.weight * (std::norm(pw.e[0]) + std::norm(pw.e[1]) + std::norm(pw.h));
  }
  return ref > 0.0 ? std::sqrt(sca / ref) : 0.0;
}

namespace
{

double part_norm(complex d, FieldPart p)
{
  switch (p)
  {
    case FieldPart::Real:
      return d.real() * d.real();
    case FieldPart::Imag:
      return d.imag() * d.imag();
    case FieldPart::Full:
      break;
  }
  return std::norm(d);
}

}  // namespace

FieldErrors l2_error(const Discretization &disc, const FieldSolution &sol,
                     const FieldEvaluator &analytic, const FieldParts &parts)
{
  const int nb = disc.dofs.num_basis;
  const RealMatrix &phi = disc.ref->values;
  double se = 0.0, sh = 0.0, sj = 0.0, sq = 0.0;
  for (int k = 0; k < disc.mesh.num_elements(); ++k)
  {
    const ElementGeometry &g = disc.geometry[k];
    const complex *x = sol.locals.data() + disc.dofs.local_offset[k];
    const bool cur = disc.dofs.has_current[k] != 0;
    for (std::size_t q = 0; q < g.points.size(); ++q)
    {
      complex v[6] = {};
      const int nf = cur ? 6 : 3;
      for (int f = 0; f < nf; ++f)
      {
        for (int i = 0; i < nb; ++i)
        {
          v[f] += phi(static_cast<Eigen::Index>(q), i) * x[f * nb + i];
        }
      }
      const PointFields a = analytic(g.points[q]);
      const double w = g.weights[q];
      se += w * (part_norm(a.e[0] - v[0], parts.e) + part_norm(a.e[1] - v[1], parts.e));
      sh += w * part_norm(a.h - v[2], parts.h);
      if (cur)
      {
        sj += w * (part_norm(a.j[0] - v[3], parts.j) + part_norm(a.j[1] - v[4], parts.j));
        sq += w * part_norm(a.q - v[5], parts.q);
      }
    }
  }
  return {std::sqrt(se), std::sqrt(sh), std::sqrt(sj), std::sqrt(sq)};
}

std::vector<double> convergence_orders(const std::vector<std::pair<double, double>> &errors)
{
  if (errors.size() < 2)
  {
    fail(ErrorKind::Argument, "convergence_orders: need at least two (h, error) pairs");
  }
  std::vector<double> orders;
  for (std::size_t i = 1; i < errors.size(); ++i)
  {
    const auto [h1, e1] = errors[i - 1];
    const auto [h2, e2] = errors[i];
    if (!(h2 < h1))
    {
      fail(ErrorKind::Argument, "convergence_orders: h must be strictly decreasing");
    }
    orders.push_back(std::log(e2 / e1) / std::log(h2 / h1));
  }
  return orders;
}

std::vector<Peak> find_peaks(const std::vector<double> &x, const std::vector<double> &y)
{
  if (x.size() != y.size())
  {
    fail(ErrorKind::Argument, "find_peaks: x and y differ in length");
  }
  std::vector<Peak> peaks;
  const int n = static_cast<int>(y.size());
  for (int i = 1; i + 1 < n; ++i)
  {
    if (!(y[i] > y[i - 1] && y[i] > y[i + 1]))
    {
      continue;
    }
    double left = y[i], right = y[i];
    for (int k = i - 1; k >= 0 && y[k] <= y[i]; --k)
    {
      left = std::min(left, y[k]);
    }
    for (int k = i + 1; k < n && y[k] <= y[i]; ++k)
    {
      right = std::min(right, y[k]);
    }
    peaks.push_back({i, x[i], y[i], y[i] - std::max(left, right)});
  }
  return peaks;
}

std::string to_vtk(const Discretization &disc, const FieldSolution &sol, const std::string &title)
{
  const int p = disc.degree();
  const int nb = disc.dofs.num_basis;
  const int ne = disc.mesh.num_elements();
  const auto &nodes = disc.ref->basis.nodes();
  auto lattice = [p](int i, int j) {
    int idx = 0;
    for (int jj = 0; jj < j; ++jj)
    {
      idx += p + 1 - jj;
    }
    return idx + i;
  };
  std::vector<std::array<int, 3>> sub;
  for (int j = 0; j < p; ++j)
  {
    for (int i = 0; i + j < p; ++i)
    {
      sub.push_back({lattice(i, j), lattice(i + 1, j), lattice(i, j + 1)});
      if (i + j + 1 < p)
      {
        sub.push_back({lattice(i + 1, j), lattice(i + 1, j + 1), lattice(i, j + 1)});
      }
    }
  }
  std::ostringstream out;
  out << std::setprecision(17);
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << static_cast<long>(ne) * nb << " double\n";
  for (int k = 0; k < ne; ++k)
  {
    const ElementShape shape = element_shape(disc.mesh, disc.skeleton, disc.curved, k);
    for (const Vec2 &r : nodes)
    {
      const Vec2 x = shape.map(r);
      out << x.x << " " << x.y << " 0\n";
    }
  }
  const long ncell = static_cast<long>(ne) * static_cast<long>(sub.size());
  out << "CELLS " << ncell << " " << 4 * ncell << "\n";
  for (int k = 0; k < ne; ++k)
  {
    for (const auto &t : sub)
    {
      out << "3 " << k * nb + t[0] << " " << k * nb + t[1] << " " << k * nb + t[2] << "\n";
    }
  }
  out << "CELL_TYPES " << ncell << "\n";
  for (long c = 0; c < ncell; ++c)
  {
    out << "5\n";
  }
  out << "POINT_DATA " << static_cast<long>(ne) * nb << "\n";
  // Nodal basis: the coefficient of node i is the field value there.
  auto value = [&](int k, int f, int i) -> complex {
    const int nf = disc.dofs.has_current[k] ? 6 : 3;
    if (f >= nf || sol.locals.empty())
    {
      return 0.0;
    }
    return sol.locals[disc.dofs.local_offset[k] + f * nb + i];
  };
  const char *names[6] = {"Ex", "Ey", "H", "Jx", "Jy", "q"};
  for (int f = 0; f < 6; ++f)
  {
    for (int part = 0; part < 2; ++part)
    {
      out << "SCALARS " << (part == 0 ? "Re_" : "Im_") << names[f] << " double 1\n"
          << "LOOKUP_TABLE default\n";
      for (int k = 0; k < ne; ++k)
      {
        for (int i = 0; i < nb; ++i)
        {
          const complex v = value(k, f, i);
          out << (part == 0 ? v.real() : v.imag()) << "\n";
        }
      }
    }
  }
  out << "SCALARS abs_E double 1\nLOOKUP_TABLE default\n";
  for (int k = 0; k < ne; ++k)
  {
    for (int i = 0; i < nb; ++i)
    {
      out << std::sqrt(std::norm(value(k, 0, i)) + std::norm(value(k, 1, i))) << "\n";
    }
  }
  return out.str();
}

namespace
{

void write_text(const std::string &text, const std::string &path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  }
  out << text;
  if (!out)
  {
    fail(ErrorKind::Io, "write to '" + path + "' failed");
  }
}

}  // namespace

void export_vtk(const Discretization &disc, const FieldSolution &sol, const std::string &title,
                const std::string &path)
{
  write_text(to_vtk(disc, sol, title), path);
}

std::string sweep_csv(const std::vector<CrossSections> &results, double plasma_frequency)
{
  if (results.empty())
  {
    fail(ErrorKind::Argument, "sweep_csv: no results");
  }
  std::ostringstream out;
  out << std::setprecision(17);
  out << "omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext\n";
  for (std::size_t i = 0; i < results.size(); ++i)
  {
    const CrossSections &c = results[i];
    if (i > 0 && !(c.omega > results[i - 1].omega))
    {
      fail(ErrorKind::Argument, "sweep_csv: results must be sorted by omega");
    }
    out << c.omega << "," << c.omega / plasma_frequency << "," << c.sigma_sca << ","
        << c.sigma_abs << "," << c.sigma_ext << "\n";
  }
  return out.str();
}

void export_sweep(const std::vector<CrossSections> &results, double plasma_frequency,
                  const std::string &path)
{
  write_text(sweep_csv(results, plasma_frequency), path);
}

std::vector<CrossSections> parse_sweep_csv(const std::string &text)
{
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext")
  {
    fail(ErrorKind::Parse, "sweep csv line 1: unexpected header");
  }
  std::vector<CrossSections> out;
  int lineno = 1;
  while (std::getline(in, line))
  {
    ++lineno;
    if (line.empty())
    {
      continue;
    }
    double v[5];
    const char *p = line.c_str();
    for (int k = 0; k < 5; ++k)
    {
      char *end = nullptr;
      v[k] = std::strtod(p, &end);
      if (end == p || (k < 4 && *end != ',') || (k == 4 && *end != '\0'))
      {
        fail(ErrorKind::Parse, "sweep csv line " + std::to_string(lineno) + ": malformed row");
      }
      p = end + 1;
    }
    out.push_back({v[0], v[2], v[3], v[4]});
  }
  return out;
}

}  // namespace hdgnl
