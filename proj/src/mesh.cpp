#include "hdgnl/mesh.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace hdgnl
{

bool Mesh::has_scatterer() const
{
  return std::any_of(domains.begin(), domains.end(),
                     [](Domain d) { return d == Domain::Scatterer; });
}

double Mesh::signed_area(int element) const
{
  const auto &t = triangles[element];
  return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
}

void validate_mesh(const Mesh &mesh)
{
  const int nn = mesh.num_nodes();
  if (mesh.domains.size() != mesh.triangles.size())
  {
    fail(ErrorKind::Validation, "mesh: domain list does not match triangle count");
  }
  std::set<std::array<int, 3>> seen;
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    auto t = mesh.triangles[e];
    for (int v : t)
    {
      if (v < 0 || v >= nn)
      {
        fail(ErrorKind::Validation,
             "mesh: triangle " + std::to_string(e) + " references node out of range");
      }
    }
    if (!(mesh.signed_area(e) > 0.0))
    {
      fail(ErrorKind::Validation,
           "mesh: triangle " + std::to_string(e) + " has nonpositive signed area");
    }
    std::sort(t.begin(), t.end());
    if (!seen.insert(t).second)
    {
      fail(ErrorKind::Validation, "mesh: duplicate triangle " + std::to_string(e));
    }
  }
}

namespace
{

struct LineReader
{
  std::istringstream in;
  std::string source;
  int line_no = 0;

  bool next(std::string &line)
  {
    while (std::getline(in, line))
    {
      ++line_no;
      if (!line.empty() && line.back() == '\r')
      {
        line.pop_back();
      }
      if (line.find_first_not_of(" \t") != std::string::npos)
      {
        return true;
      }
    }
    return false;
  }

  [[noreturn]] void error(const std::string &what) const
  {
    fail(ErrorKind::Parse, source + ":" + std::to_string(line_no) + ": " + what);
  }

  std::string expect_line()
  {
    std::string line;
    if (!next(line))
    {
      error("unexpected end of file");
    }
    return line;
  }

  void expect(const std::string &token)
  {
    std::string line = expect_line();
    if (line.substr(0, line.find_last_not_of(" \t") + 1) != token)
    {
      error("expected '" + token + "', found '" + line + "'");
    }
  }
};

template <typename T>
std::vector<T> parse_numbers(const LineReader &r, const std::string &line)
{
  std::istringstream ls(line);
  std::vector<T> out;
  T v;
  while (ls >> v)
  {
    out.push_back(v);
  }
  if (!ls.eof())
  {
    r.error("malformed number in '" + line + "'");
  }
  return out;
}

}  // namespace

Mesh parse_gmsh(const std::string &text, const TagTable &tags, double scale,
                const std::string &source)
{
  LineReader r{std::istringstream(text), source, 0};
  std::string line;
  bool have_format = false;
  std::unordered_map<long, int> node_index;
  Mesh mesh;

  while (r.next(line))
  {
    if (line.rfind("$MeshFormat", 0) == 0)
    {
      const auto fields = r.expect_line();
      std::istringstream fs(fields);
      std::string version;
      int file_type = -1;
      fs >> version >> file_type;
      if (version.rfind("2.", 0) != 0)
      {
        r.error("unsupported MSH version '" + version + "' (need 2.2)");
      }
      if (file_type != 0)
      {
        r.error("binary MSH files are not supported");
      }
      r.expect("$EndMeshFormat");
      have_format = true;
    }
    else if (line.rfind("$Nodes", 0) == 0)
    {
      const auto counts = parse_numbers<long>(r, r.expect_line());
      if (counts.size() != 1 || counts[0] < 0)
      {
        r.error("bad node count");
      }
      mesh.nodes.reserve(counts[0]);
      for (long i = 0; i < counts[0]; ++i)
      {
        const auto v = parse_numbers<double>(r, r.expect_line());
        if (v.size() != 4)
        {
          r.error("node line needs 4 fields");
        }
        const long id = static_cast<long>(v[0]);
        if (!node_index.emplace(id, mesh.num_nodes()).second)
        {
          r.error("duplicate node id " + std::to_string(id));
        }
        mesh.nodes.push_back({scale * v[1], scale * v[2]});
      }
      r.expect("$EndNodes");
    }
    else if (line.rfind("$Elements", 0) == 0)
    {
      const auto counts = parse_numbers<long>(r, r.expect_line());
      if (counts.size() != 1 || counts[0] < 0)
      {
        r.error("bad element count");
      }
      for (long i = 0; i < counts[0]; ++i)
      {
        const auto v = parse_numbers<long>(r, r.expect_line());
        if (v.size() < 3)
        {
          r.error("element line too short");
        }
        const long type = v[1];
        const long ntags = v[2];
        if (ntags < 0 || v.size() < static_cast<std::size_t>(3 + ntags))
        {
          r.error("element line too short for its tag count");
        }
        if (type == 15 || type == 1)
        {
          continue;
        }
        if (type != 2)
        {
          r.error("unsupported element type " + std::to_string(type));
        }
        if (v.size() != static_cast<std::size_t>(3 + ntags + 3))
        {
          r.error("triangle needs exactly 3 nodes");
        }
        if (ntags < 1)
        {
          r.error("triangle without physical tag");
        }
        const int phys = static_cast<int>(v[3]);
        const auto it = tags.find(phys);
        if (it == tags.end())
        {
          r.error("physical tag " + std::to_string(phys) + " missing from tag table");
        }
        std::array<int, 3> tri{};
        for (int k = 0; k < 3; ++k)
        {
          const auto n = node_index.find(v[3 + ntags + k]);
          if (n == node_index.end())
          {
            r.error("unknown node id " + std::to_string(v[3 + ntags + k]));
          }
          tri[k] = n->second;
        }
        mesh.triangles.push_back(tri);
        mesh.domains.push_back(it->second);
        mesh.physical_tags.push_back(phys);
      }
      r.expect("$EndElements");
    }
    else if (line.rfind("$", 0) == 0)
    {
      // Skip unknown sections such as $PhysicalNames.
      const std::string end = "$End" + line.substr(1);
      std::string inner;
      bool closed = false;
      while (r.next(inner))
      {
        if (inner.rfind(end, 0) == 0)
        {
          closed = true;
          break;
        }
      }
      if (!closed)
      {
        r.error("section " + line + " is not closed");
      }
    }
    else
    {
      r.error("unexpected content '" + line + "'");
    }
  }
  if (!have_format)
  {
    fail(ErrorKind::Parse, source + ": missing $MeshFormat section");
  }
  if (mesh.triangles.empty())
  {
    fail(ErrorKind::Parse, source + ": no triangle elements");
  }
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    if (mesh.signed_area(e) < 0.0)
    {
      std::swap(mesh.triangles[e][1], mesh.triangles[e][2]);
    }
  }
  // Geometry-only nodes (circle centers) are dropped, keeping the file order.
  std::vector<int> renumber(mesh.nodes.size(), -1);
  for (const auto &t : mesh.triangles)
  {
    for (int v : t)
    {
      renumber[v] = 0;
    }
  }
  int used = 0;
  for (std::size_t i = 0; i < renumber.size(); ++i)
  {
    if (renumber[i] == 0)
    {
      mesh.nodes[used] = mesh.nodes[i];
      renumber[i] = used++;
    }
  }
  mesh.nodes.resize(used);
  for (auto &t : mesh.triangles)
  {
    for (int &v : t)
    {
      v = renumber[v];
    }
  }
  validate_mesh(mesh);
  return mesh;
}

Mesh load_gmsh(const std::string &path, const TagTable &tags, double scale)
{
  std::ifstream in(path);
  if (!in)
  {
    fail(ErrorKind::Io, "cannot open mesh file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_gmsh(buf.str(), tags, scale, path);
}

std::string write_gmsh(const Mesh &mesh, double scale)
{
  std::ostringstream out;
  out << std::setprecision(17);
  out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n" << mesh.num_nodes() << "\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
  {
    out << i + 1 << " " << mesh.nodes[i].x / scale << " " << mesh.nodes[i].y / scale << " 0\n";
  }
  out << "$EndNodes\n$Elements\n" << mesh.num_elements() << "\n";
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    const int tag = e < static_cast<int>(mesh.physical_tags.size())
                        ? mesh.physical_tags[e]
                        : (mesh.domains[e] == Domain::Scatterer ? 2 : 1);
    const auto &t = mesh.triangles[e];
    out << e + 1 << " 2 2 " << tag << " " << tag << " " << t[0] + 1 << " " << t[1] + 1 << " "
        << t[2] + 1 << "\n";
  }
  out << "$EndElements\n";
  return out.str();
}

Mesh structured_square(double side, int n)
{
  if (n < 1 || !(side > 0.0))
  {
    fail(ErrorKind::Argument, "structured_square: need n >= 1 and side > 0");
  }
  Mesh mesh;
  const double h = side / n;
  for (int j = 0; j <= n; ++j)
  {
    for (int i = 0; i <= n; ++i)
    {
      mesh.nodes.push_back({i * h, j * h});
    }
  }
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
  {
    for (int i = 0; i < n; ++i)
    {
      // Alternate the diagonal so the mesh has no preferred direction.
      if ((i + j) % 2 == 0)
      {
        mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      }
      else
      {
        mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        mesh.triangles.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  mesh.domains.assign(mesh.triangles.size(), Domain::Scatterer);
  mesh.physical_tags.assign(mesh.triangles.size(), 2);
  return mesh;
}

const char *to_string(EdgeClass c)
{
  switch (c)
  {
    case EdgeClass::Interior:
      return "Interior";
    case EdgeClass::AbsorbingBoundary:
      return "AbsorbingBoundary";
    case EdgeClass::ScattererInterior:
      return "ScattererInterior";
    case EdgeClass::ScattererSurface:
      return "ScattererSurface";
  }
  return "?";
}

Skeleton build_skeleton(const Mesh &mesh)
{
  Skeleton sk;
  const int ne = mesh.num_elements();
  sk.element_edges.resize(ne);

  // Sort edge-sides by canonical key; equal keys are the sides of one edge.
  struct SideKey
  {
    int a, b, element, local;
  };
  std::vector<SideKey> sides;
  sides.reserve(3 * static_cast<std::size_t>(ne));
  for (int e = 0; e < ne; ++e)
  {
    const auto &t = mesh.triangles[e];
    for (int k = 0; k < 3; ++k)
    {
      const auto [i, j] = local_edge_vertices(k);
      sides.push_back({std::min(t[i], t[j]), std::max(t[i], t[j]), e, k});
    }
  }
  std::sort(sides.begin(), sides.end(), [](const SideKey &l, const SideKey &r) {
    return std::tie(l.a, l.b, l.element, l.local) < std::tie(r.a, r.b, r.element, r.local);
  });

  for (std::size_t s = 0; s < sides.size();)
  {
    std::size_t t = s;
    while (t < sides.size() && sides[t].a == sides[s].a && sides[t].b == sides[s].b)
    {
      ++t;
    }
    if (t - s > 2)
    {
      fail(ErrorKind::Validation, "skeleton: non-manifold edge (" +
                                      std::to_string(sides[s].a) + ", " +
                                      std::to_string(sides[s].b) + ") has " +
                                      std::to_string(t - s) + " incident triangles");
    }
    Edge edge;
    edge.nodes = {sides[s].a, sides[s].b};
    const int id = static_cast<int>(sk.edges.size());
    for (std::size_t u = s; u < t; ++u)
    {
      const auto &sk_side = sides[u];
      const auto [i, j] = local_edge_vertices(sk_side.local);
      const int first = mesh.triangles[sk_side.element][i];
      edge.sides[edge.num_sides++] = {sk_side.element, sk_side.local,
                                      first == edge.nodes[0] ? 1 : -1};
      sk.element_edges[sk_side.element][sk_side.local] = id;
    }
    if (edge.num_sides == 2 && edge.sides[0].sign == edge.sides[1].sign)
    {
      fail(ErrorKind::Validation, "skeleton: inconsistent orientation across edge (" +
                                      std::to_string(edge.nodes[0]) + ", " +
                                      std::to_string(edge.nodes[1]) + ")");
    }
    int scat = 0;
    for (int u = 0; u < edge.num_sides; ++u)
    {
      scat += mesh.domains[edge.sides[u].element] == Domain::Scatterer ? 1 : 0;
    }
    edge.on_boundary = edge.num_sides == 1;
    if (scat == 0)
    {
      edge.cls = edge.on_boundary ? EdgeClass::AbsorbingBoundary : EdgeClass::Interior;
    }
    else if (scat == 2)
    {
      edge.cls = EdgeClass::ScattererInterior;
    }
    else
    {
      edge.cls = EdgeClass::ScattererSurface;
    }
    sk.edges.push_back(edge);
    s = t;
  }

  sk.scatterer_edge_index.assign(sk.edges.size(), -1);
  for (int i = 0; i < sk.num_edges(); ++i)
  {
    const auto c = sk.edges[i].cls;
    if (c == EdgeClass::ScattererInterior || c == EdgeClass::ScattererSurface)
    {
      sk.scatterer_edge_index[i] = sk.num_scatterer_edges++;
    }
  }
  return sk;
}

Vec2 CurvedEdgeMap::point(double s) const
{
  const double n0 = (1.0 - s) * (1.0 - 2.0 * s);
  const double nm = 4.0 * s * (1.0 - s);
  const double n1 = s * (2.0 * s - 1.0);
  return n0 * control[0] + nm * control[1] + n1 * control[2];
}

Vec2 CurvedEdgeMap::tangent(double s) const
{
  const double d0 = 4.0 * s - 3.0;
  const double dm = 4.0 - 8.0 * s;
  const double d1 = 4.0 * s - 1.0;
  return d0 * control[0] + dm * control[1] + d1 * control[2];
}

std::array<Vec2, 3> CurvedEdgeMap::coefficients() const
{
  const auto &[x0, xm, x1] = control;
  return {x0, 4.0 * xm - 3.0 * x0 - x1, 2.0 * x0 + 2.0 * x1 - 4.0 * xm};
}

CurvedEdgeMap curve_edge_onto_circle(int edge, Vec2 a, Vec2 b, const Circle &circle, double tol)
{
  if (!(norm(b - a) > 0.0))
  {
    fail(ErrorKind::Validation, "curved map: zero-length edge " + std::to_string(edge));
  }
  for (Vec2 p : {a, b})
  {
    if (std::abs(norm(p - circle.center) - circle.radius) > tol * circle.radius)
    {
      fail(ErrorKind::Validation,
           "curved map: endpoint of edge " + std::to_string(edge) + " is not on the circle");
    }
  }
  const Vec2 chord_mid = 0.5 * (a + b);
  const Vec2 d = chord_mid - circle.center;
  const double len = norm(d);
  if (!(len > 0.0))
  {
    fail(ErrorKind::Validation, "curved map: edge " + std::to_string(edge) + " is a diameter");
  }
  const Vec2 mid = circle.center + (circle.radius / len) * d;
  return {edge, {a, mid, b}};
}

std::vector<CurvedEdgeMap> curved_boundary_map(const Mesh &mesh, const Skeleton &skeleton,
                                               const std::vector<Circle> &circles, double tol)
{
  std::vector<CurvedEdgeMap> maps;
  for (int i = 0; i < skeleton.num_edges(); ++i)
  {
    const auto &edge = skeleton.edges[i];
    if (edge.cls != EdgeClass::ScattererSurface || edge.on_boundary)
    {
      continue;
    }
    const Vec2 a = mesh.nodes[edge.nodes[0]];
    const Vec2 b = mesh.nodes[edge.nodes[1]];
    const Circle *match = nullptr;
    for (const auto &c : circles)
    {
      const bool on_a = std::abs(norm(a - c.center) - c.radius) <= tol * c.radius;
      const bool on_b = std::abs(norm(b - c.center) - c.radius) <= tol * c.radius;
      if (on_a && on_b)
      {
        match = &c;
        break;
      }
    }
    if (match == nullptr)
    {
      fail(ErrorKind::Validation, "curved map: scatterer surface edge " + std::to_string(i) +
                                      " does not lie on any configured circle");
    }
    maps.push_back(curve_edge_onto_circle(i, a, b, *match, tol));
  }
  return maps;
}

MeshStats mesh_stats(const Mesh &mesh, const Skeleton &skeleton)
{
  MeshStats s;
  s.nodes = mesh.num_nodes();
  s.elements = mesh.num_elements();
  s.edges = skeleton.num_edges();
  for (int e = 0; e < mesh.num_elements(); ++e)
  {
    s.scatterer_elements += mesh.domains[e] == Domain::Scatterer ? 1 : 0;
    s.total_area += mesh.signed_area(e);
  }
  for (const auto &edge : skeleton.edges)
  {
    switch (edge.cls)
    {
      case EdgeClass::Interior:
        ++s.interior_edges;
        break;
      case EdgeClass::AbsorbingBoundary:
        ++s.absorbing_boundary_edges;
        break;
      case EdgeClass::ScattererInterior:
        ++s.scatterer_interior_edges;
        break;
      case EdgeClass::ScattererSurface:
        ++s.scatterer_surface_edges;
        break;
    }
    s.outer_boundary_edges += edge.on_boundary ? 1 : 0;
  }
  s.scatterer_edges = skeleton.num_scatterer_edges;
  return s;
}

std::string format_mesh_stats(const MeshStats &s)
{
  std::ostringstream out;
  out << "nodes: " << s.nodes << "\n"
      << "elements: " << s.elements << "\n"
      << "scatterer_elements: " << s.scatterer_elements << "\n"
      << "edges: " << s.edges << "\n"
      << "interior_edges: " << s.interior_edges << "\n"
      << "absorbing_boundary_edges: " << s.absorbing_boundary_edges << "\n"
      << "scatterer_interior_edges: " << s.scatterer_interior_edges << "\n"
      << "scatterer_surface_edges: " << s.scatterer_surface_edges << "\n"
      << "outer_boundary_edges: " << s.outer_boundary_edges << "\n"
      << "scatterer_edges: " << s.scatterer_edges << "\n"
      << std::setprecision(17) << "total_area: " << s.total_area << "\n";
  return out.str();
}

std::uint64_t mesh_hash(const Mesh &mesh)
{
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void *data, std::size_t n) {
    const auto *p = static_cast<const unsigned char *>(data);
    for (std::size_t i = 0; i < n; ++i)
    {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto &p : mesh.nodes)
  {
    mix(&p.x, sizeof(double));
    mix(&p.y, sizeof(double));
  }
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e)
  {
    mix(mesh.triangles[e].data(), 3 * sizeof(int));
    const int d = mesh.domains[e] == Domain::Scatterer ? 1 : 0;
    mix(&d, sizeof(int));
  }
  return h;
}

}  // namespace hdgnl
