// Acceptance checks 1-9. Prints one PASS/FAIL line per criterion and exits nonzero if
// any fails. Usage: acceptance [criterion ...] [--parallelism N]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "hdgnl/approximation.hpp"
#include "hdgnl/bessel.hpp"
#include "hdgnl/scenario.hpp"
#include "hdgnl/sparse.hpp"

using namespace hdgnl;

namespace
{

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, auto... args)
{
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int width = 1;

RunConfig load(const std::string &name)
{
  return parse_config(std::string(HDGNL_SOURCE_DIR) + "/configs/" + name + ".json");
}

struct Sweep
{
  SweepReport report;
  std::vector<double> w, ext, mie;
};

Sweep sweep(const RunConfig &config)
{
  const SweepSetup setup = prepare_sweep(config, width);
  Sweep s;
  s.report = run_sweep(config, setup, width);
  for (const FrequencyRecord &r : s.report.records)
  {
    if (!r.ok)
    {
      fail(ErrorKind::Numerical, fmt("frequency %.4f failed: %s", r.omega_over_wp, r.error.c_str()));
    }
    s.w.push_back(r.omega_over_wp);
    s.ext.push_back(r.cs.sigma_ext);
    if (r.oracle)
    {
      s.mie.push_back(r.oracle->sigma_ext);
    }
  }
  return s;
}

const Sweep &cached(const std::string &name)
{
  static std::map<std::string, Sweep> cache;
  auto it = cache.find(name);
  if (it == cache.end())
  {
    it = cache.emplace(name, sweep(load(name))).first;
  }
  return it->second;
}

// Vertex of the parabola through the samples around a strict interior maximum.
std::pair<double, double> refine_peak(const std::vector<double> &x, const std::vector<double> &y, int i)
{
  const double ym = y[i - 1], y0 = y[i], yp = y[i + 1];
  const double h = x[i + 1] - x[i];
  const double curv = ym - 2.0 * y0 + yp;
  const double t = 0.5 * (ym - yp) / curv;
  return {x[i] + t * h, y0 - 0.25 * (ym - yp) * t};
}

std::vector<double> peak_locations(const std::vector<double> &x, const std::vector<double> &y)
{
  std::vector<double> out;
  for (const Peak &p : find_peaks(x, y))
  {
    out.push_back(refine_peak(x, y, p.index).first);
  }
  return out;
}

double relative_l2(const std::vector<double> &a, const std::vector<double> &b)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num / den);
}

double max_rel_diff(const std::vector<complex> &a, const std::vector<complex> &b)
{
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
  {
    num = std::max(num, std::abs(a[i] - b[i]));
    den = std::max(den, std::abs(b[i]));
  }
  return den > 0.0 ? num / den : num;
}

ScaledCoefficients sodium(double w, MaterialModel model)
{
  MaterialSpec s;
  s.model = model;
  s.plasma_frequency = 8.65e15;
  s.damping = 0.01 * s.plasma_frequency;
  s.fermi_velocity = 1.07e6;
  s.diffusion = model == MaterialModel::GNOR ? 2.04e-4 : 0.0;
  return scale_coefficients(make_frequency_context(s, w * s.plasma_frequency), 1e-9);
}

enum class Layout
{
  FreeSpace,
  Scatterer,
  Mixed
};

// 4 nm square with n x n cells; the mixed layout has a scatterer block in the middle.
Mesh layout_mesh(Layout layout, int n)
{
  Mesh m = structured_square(4.0, n);
  for (int e = 0; e < m.num_elements(); ++e)
  {
    Vec2 c;
    for (int v : m.triangles[e])
    {
      c = c + (1.0 / 3.0) * m.nodes[v];
    }
    const bool inside = std::abs(c.x - 2.0) < 1.0 && std::abs(c.y - 2.0) < 1.0;
    const bool scatterer = layout == Layout::Scatterer || (layout == Layout::Mixed && inside);
    m.domains[e] = scatterer ? Domain::Scatterer : Domain::FreeSpace;
    m.physical_tags[e] = scatterer ? 2 : 1;
  }
  return m;
}

Outcome cavity()
{
  const CavityReport r = run_cavity_convergence(load("cavity"), width);
  std::string orders;
  for (std::size_t i = 0; i + 1 < r.rows.size(); ++i)
  {
    if (r.rows[i + 1].degree != r.rows[i].degree)
    {
      orders += fmt("P%d %.3f ", r.rows[i].degree, r.rows[i].order);
    }
  }
  orders += fmt("P%d %.3f", r.rows.back().degree, r.rows.back().order);
  return {r.passed, "final-pair orders " + orders + " (need >= p+1-0.15)"};
}

Outcome condensation()
{
  double worst = 0.0;
  Incidence inc;
  inc.direction = {0.6, 0.8};
  // The oracle solve uses partial pivoting and refinement to full accuracy.
  SolverOptions strict;
  strict.pivot_threshold = 1.0;
  strict.refinement_steps = 3;
  strict.refinement_trigger = 0.0;
  for (Layout layout : {Layout::FreeSpace, Layout::Scatterer, Layout::Mixed})
  {
    for (int p = 1; p <= 3; ++p)
    {
      for (MaterialModel model : {MaterialModel::LocalDrude, MaterialModel::NHD, MaterialModel::GNOR})
      {
        DiscretizationOptions o;
        o.degree = p;
        o.hydrodynamic = model != MaterialModel::LocalDrude;
        const Discretization d = make_discretization(layout_mesh(layout, 5), {}, o);
        const FrequencyProblem problem{sodium(0.9, model), &inc, nullptr};
        const FieldSolution cond = solve_frequency(d, problem);
        const FieldSolution mono = solve_monolithic(d, problem, strict);
        worst = std::max({worst, max_rel_diff(cond.traces, mono.traces), max_rel_diff(cond.locals, mono.locals)});
      }
    }
  }
  return {worst <= 1e-10, fmt("max relative difference %.2e over 3 layouts x P1-P3 x 3 models, 50 elements (need <= 1e-10)",
                              worst)};
}

Outcome nanowire_nhd()
{
  const Sweep &s = cached("nanowire_nhd");
  const double l2 = relative_l2(s.ext, s.mie);
  const auto mie_peaks = peak_locations(s.w, s.mie);
  const auto sol_peaks = peak_locations(s.w, s.ext);
  double worst = 0.0;
  for (double wm : mie_peaks)
  {
    double best = INFINITY;
    for (double ws : sol_peaks)
    {
      best = std::min(best, std::abs(ws - wm) / wm);
    }
    worst = std::max(worst, best);
  }
  return {s.w.size() == 200 && l2 <= 0.03 && worst <= 5e-3,
          fmt("%zu points, relative L2 deviation %.3e (need <= 3e-2), %zu oracle peaks, worst location "
              "offset %.3e (need <= 5e-3)",
              s.w.size(), l2, mie_peaks.size(), worst)};
}

std::pair<int, double> above_plasma(const Sweep &s, double &max_prominence)
{
  int count = 0;
  double total = 0.0;
  max_prominence = 0.0;
  for (const Peak &p : find_peaks(s.w, s.ext))
  {
    if (p.x > 1.0)
    {
      ++count;
      total += p.prominence;
      max_prominence = std::max(max_prominence, p.prominence);
    }
  }
  return {count, total};
}

Outcome nanowire_gnor()
{
  double nhd_max = 0.0, gnor_max = 0.0;
  const auto [nhd_count, nhd_total] = above_plasma(cached("nanowire_nhd"), nhd_max);
  const auto [gnor_count, gnor_total] = above_plasma(cached("nanowire_gnor"), gnor_max);
  return {gnor_count < nhd_count && gnor_max < nhd_max && gnor_total < nhd_total,
          fmt("maxima above wp: GNOR %d vs NHD %d; largest prominence %.3e vs %.3e; total %.3e vs %.3e",
              gnor_count, nhd_count, gnor_max, nhd_max, gnor_total, nhd_total)};
}

Outcome low_order()
{
  const Sweep &p1 = cached("nanowire_p1");
  const Sweep &p4 = cached("nanowire_nhd");
  const double d1 = relative_l2(p1.ext, p1.mie);
  const double d4 = relative_l2(p4.ext, p4.mie);
  return {d1 > d4, fmt("relative L2 deviation P1 %.3e vs P4 %.3e", d1, d4)};
}

// Resonances (refined location, height) of a spectrum in frequency order.
std::vector<std::pair<double, double>> resonances(const Sweep &s)
{
  std::vector<std::pair<double, double>> out;
  for (const Peak &p : find_peaks(s.w, s.ext))
  {
    out.push_back(refine_peak(s.w, s.ext, p.index));
  }
  return out;
}

// The main resonance is the lowest-frequency (bonding dipole) peak; every mode present
// in all three spectra, matched by order, must show the same blueshift and GNOR damping.
Outcome dimer()
{
  std::map<std::string, std::vector<std::pair<double, double>>> modes;
  std::map<std::string, double> global;
  for (const char *name : {"dimer_local", "dimer_nhd", "dimer_gnor"})
  {
    const Sweep s = sweep(load(name));
    modes[name] = resonances(s);
    if (modes[name].empty())
    {
      fail(ErrorKind::Numerical, std::string(name) + ": no resonance in the sweep");
    }
    global[name] = s.w[std::max_element(s.ext.begin(), s.ext.end()) - s.ext.begin()];
  }
  const auto &l = modes["dimer_local"], &n = modes["dimer_nhd"], &g = modes["dimer_gnor"];
  const std::size_t common = std::min({l.size(), n.size(), g.size()});
  bool main_ok = l[0].first < n[0].first && l[0].first < g[0].first && g[0].second < n[0].second;
  bool all_ok = true;
  std::string shifts;
  for (std::size_t k = 0; k < common; ++k)
  {
    all_ok = all_ok && l[k].first < n[k].first && l[k].first < g[k].first && g[k].second < n[k].second;
    shifts += fmt(" mode %zu %.4f/%.4f/%.4f;", k + 1, l[k].first, n[k].first, g[k].first);
  }
  return {main_ok && all_ok,
          fmt("main resonance w/wp: local %.5f, NHD %.5f, GNOR %.5f; peak sigma_ext NHD %.4e, GNOR %.4e; "
              "resonances local/NHD/GNOR %zu/%zu/%zu,",
              l[0].first, n[0].first, g[0].first, n[0].second, g[0].second, l.size(), n.size(), g.size()) +
              shifts +
              fmt(" global maxima at %.3f/%.3f/%.3f", global["dimer_local"], global["dimer_nhd"],
                  global["dimer_gnor"])};
}

Outcome hard_wall()
{
  std::vector<double> res;
  for (const char *mesh : {"nanowire.msh", "nanowire_fine.msh"})
  {
    RunConfig c = load("nanowire_nhd");
    c.degree = 3;
    c.frequencies = {0.73, 1.1};
    c.mesh.path = std::string(HDGNL_SOURCE_DIR) + "/data/meshes/" + mesh;
    const Sweep s = sweep(c);
    double worst = 0.0;
    for (const FrequencyRecord &r : s.report.records)
    {
      worst = std::max(worst, r.hard_wall);
    }
    res.push_back(worst);
  }
  return {res[0] < 1e-3 && res[1] < res[0],
          fmt("P3 hard-wall residual %.3e on the base mesh, %.3e refined (need < 1e-3 and decreasing)", res[0],
              res[1])};
}

Outcome freespace()
{
  const RunConfig c = load("freespace");
  const SweepSetup setup = prepare_sweep(c, width);
  std::vector<int> keep(c.frequencies.size());
  std::iota(keep.begin(), keep.end(), 0);
  std::vector<FieldSolution> kept;
  const SweepReport report = run_sweep(c, setup, width, keep, &kept);
  const PointLocator locator(setup.disc);
  double sigma = 0.0, contour = 0.0;
  for (std::size_t i = 0; i < kept.size(); ++i)
  {
    if (!report.records[i].ok)
    {
      return {false, "frequency failed: " + report.records[i].error};
    }
    sigma = std::max(sigma, std::abs(report.records[i].cs.sigma_ext));
    contour = std::max(contour, scattered_contour_norm(setup.disc, kept[i], locator, setup.contour, c.incidence));
  }
  return {sigma < 1e-6 && contour < 1e-6,
          fmt("%zu frequencies: max |sigma_ext| %.3e, max scattered contour norm %.3e (need < 1e-6)", kept.size(),
              sigma, contour)};
}

Outcome invariants()
{
  std::vector<std::string> failed;
  auto check = [&](bool ok, const std::string &what) {
    if (!ok)
    {
      failed.push_back(what);
    }
  };

  // Quadrature exactness on monomials.
  double quad = 0.0;
  for (int order = 1; order <= 12; ++order)
  {
    const QuadratureRule tri = make_quadrature(order, QuadratureDomain::Triangle);
    const QuadratureRule edge = make_quadrature(order, QuadratureDomain::Edge);
    for (int a = 0; a <= order; ++a)
    {
      double s = 0.0;
      for (std::size_t q = 0; q < edge.points.size(); ++q)
      {
        s += edge.weights[q] * std::pow(edge.points[q].x, a);
      }
      quad = std::max(quad, std::abs(s * (a + 1) - 1.0));
      for (int b = 0; a + b <= order; ++b)
      {
        double t = 0.0;
        for (std::size_t q = 0; q < tri.points.size(); ++q)
        {
          t += tri.weights[q] * std::pow(tri.points[q].x, a) * std::pow(tri.points[q].y, b);
        }
        const double exact = std::tgamma(a + 1) * std::tgamma(b + 1) / std::tgamma(a + b + 3);
        quad = std::max(quad, std::abs(t / exact - 1.0));
      }
    }
  }
  check(quad <= 1e-13, fmt("quadrature %.2e", quad));

  // Partition of unity.
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec2> pts;
  for (int i = 0; i < 50; ++i)
  {
    const double x = u(rng), y = u(rng);
    pts.push_back(x + y <= 1.0 ? Vec2{x, y} : Vec2{1.0 - x, 1.0 - y});
  }
  double unity = 0.0;
  for (int p = 1; p <= max_degree; ++p)
  {
    RealMatrix v, dx, dy;
    TriangleBasis(p).evaluate(pts, v, &dx, &dy);
    for (int q = 0; q < v.rows(); ++q)
    {
      unity = std::max({unity, std::abs(v.row(q).sum() - 1.0), std::abs(dx.row(q).sum()), std::abs(dy.row(q).sum())});
    }
  }
  check(unity <= 1e-12, fmt("partition of unity %.2e", unity));

  // Schur complement of real element blocks against dense elimination.
  DiscretizationOptions o;
  o.degree = 3;
  const Discretization mixed = make_discretization(layout_mesh(Layout::Mixed, 6), {}, o);
  const ScaledCoefficients k = sodium(1.1, MaterialModel::GNOR);
  double schur = 0.0;
  for (int e = 0; e < mixed.mesh.num_elements(); e += 7)
  {
    const LocalBlocks b = assemble_local_blocks(mixed, e, k, nullptr);
    const Condensed c = condense_element(b);
    const ComplexMatrix dense = b.d - b.c * b.a.fullPivLu().solve(b.b);
    schur = std::max(schur, (c.schur - dense).norm() / dense.norm());
  }
  check(schur <= 1e-10, fmt("Schur vs dense %.2e", schur));

  // Built-in sparse LU on an assembled trace system.
  Incidence inc;
  const FrequencyProblem problem{k, &inc, nullptr};
  const GlobalSystem g = assemble_condensed(mixed, problem).global;
  SparseLU lu;
  lu.analyze(g.matrix);
  lu.factorize(g.matrix);
  std::vector<complex> x(g.rhs.size());
  lu.solve(g.rhs, x);
  const double lu_res = relative_residual(g.matrix, x, g.rhs);
  check(lu_res <= 1e-10, fmt("sparse LU residual %.2e", lu_res));

  // Bessel Wronskian.
  double wr = 0.0;
  for (double z : {0.05, 0.4, 1.0, 3.3, 10.0, 47.0, 120.0, 500.0})
  {
    const BesselJY b = bessel_jy(40, z);
    const double w = 2.0 / (pi * z);
    for (int n = 0; n <= 40; ++n)
    {
      if (std::isfinite(b.y[n]))
      {
        wr = std::max(wr, std::abs(b.j[n] * b.dy[n] - b.dj[n] * b.y[n] - w) / w);
      }
    }
  }
  check(wr <= 1e-12, fmt("Wronskian %.2e", wr));

  // Contour-shape independence and determinism on the nanowire at P2.
  RunConfig c = load("nanowire_p1");
  c.degree = 2;
  c.frequencies = {0.73, 1.08};
  const SweepSetup setup = prepare_sweep(c, width);
  std::vector<FieldSolution> kept;
  const SweepReport one = run_sweep(c, setup, 1, {0}, &kept);
  const SweepReport two = run_sweep(c, setup, std::max(2, width));
  bool same = true;
  for (std::size_t i = 0; i < one.records.size(); ++i)
  {
    same = same && one.records[i].cs.sigma_ext == two.records[i].cs.sigma_ext &&
           one.records[i].cs.sigma_sca == two.records[i].cs.sigma_sca;
  }
  check(same, "determinism across widths");

  const PointLocator locator(setup.disc);
  ContourSpec big, rect;
  big.radius = 50.0;
  rect.shape = ContourShape::Rectangle;
  rect.lower = {-15.0, -12.0};
  rect.upper = {14.0, 16.0};
  const double ref = one.records[0].cs.sigma_ext;
  double spread = 0.0;
  for (const ContourSpec &s : {big, rect})
  {
    const double v =
        cross_sections(setup.disc, kept[0], locator, s, c.incidence, setup.normalization_length, 0.0).sigma_ext;
    spread = std::max(spread, std::abs(v / ref - 1.0));
  }
  check(spread <= 5e-3, fmt("contour independence %.2e", spread));

  std::string detail = fmt("quadrature %.1e, unity %.1e, Schur %.1e, LU %.1e, Wronskian %.1e, contour %.1e, %s",
                           quad, unity, schur, lu_res, wr, spread, same ? "deterministic" : "NOT deterministic");
  for (const std::string &f : failed)
  {
    detail += "; failed: " + f;
  }
  return {failed.empty(), detail};
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Acceptance checks"};
  std::vector<int> selected;
  width = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("criteria", selected, "Criteria to run (default: all)")->check(CLI::Range(1, 9));
  app.add_option("--parallelism", width, "Worker threads")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char *, std::function<Outcome()>>> criteria{
      {"cavity convergence", cavity},
      {"condensation oracle", condensation},
      {"nanowire NHD vs Mie", nanowire_nhd},
      {"GNOR smoothing", nanowire_gnor},
      {"low-order inadequacy", low_order},
      {"dimer blueshift and broadening", dimer},
      {"hard-wall enforcement", hard_wall},
      {"free-space null test", freespace},
      {"invariant suites", invariants},
  };
  if (selected.empty())
  {
    for (int i = 1; i <= 9; ++i)
    {
      selected.push_back(i);
    }
  }

  bool all = true;
  for (int id : selected)
  {
    const auto &[name, fn] = criteria[id - 1];
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try
    {
      out = fn();
    }
    catch (const std::exception &e)
    {
      out = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d %s: %s (%s) [%.1f s]\n", id, out.pass ? "PASS" : "FAIL", name, out.detail.c_str(), secs);
    std::fflush(stdout);
    all = all && out.pass;
  }
  return all ? 0 : 1;
}
