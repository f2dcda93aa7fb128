#include "hdgnl/scenario.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "hdgnl/oracle.hpp"
#include "hdgnl/parallel.hpp"
#include "json.hpp"

namespace hdgnl
{

using nlohmann::json;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void write_file(const std::filesystem::path &path, const std::string &text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
  {
    fail(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  }
  out << text;
  if (!out)
  {
    fail(ErrorKind::Io, "write to '" + path.string() + "' failed");
  }
}

std::string hex(std::uint64_t v)
{
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << v;
  return out.str();
}

}  // namespace

CavityReport run_cavity_convergence(const RunConfig &config, int width)
{
  const auto t0 = Clock::now();
  const CavityConfig &cv = config.cavity;
  CavityParams params;
  params.wavenumber = cv.wavenumber;
  params.damping = cv.damping;
  params.plasma_frequency = cv.plasma_frequency;
  const double side = params.side();

  const int nd = static_cast<int>(cv.divisions.size());
  const int jobs = static_cast<int>(cv.degrees.size()) * nd;
  CavityReport report;
  report.rows.resize(jobs);
  parallel_for(jobs, width, [&](int job) {
    const int p = cv.degrees[job / nd];
    const int n = cv.divisions[job % nd];
    DiscretizationOptions opts;
    opts.degree = p;
    opts.hydrodynamic = true;
    opts.boundary = BoundaryKind::PEC;
    opts.stab = config.stab;
    const Discretization disc = make_discretization(structured_square(side, n), {}, opts);
    ScaledCoefficients coeffs;
    coeffs.omega = params.omega();
    coeffs.hydro = params.hydro();
    coeffs.drive = params.drive();
    coeffs.hydrodynamic = true;
    const VolumeSource source = [&params](Vec2 x, std::array<complex, 2> &ampere,
                                          std::array<complex, 2> &current) {
      const CavitySources s = cavity_sources(params, x);
      ampere = s.ampere;
      current = s.current;
    };
    const FrequencyProblem problem{coeffs, nullptr, &source};
    const FieldSolution sol = solve_frequency(disc, problem, config.solver);
    const FieldEvaluator exact = [&params](Vec2 x) {
      const CavityFields f = cavity_exact(params, x);
      return PointFields{f.e, f.h, f.j, f.q};
    };
    FieldParts parts;
    parts.e = FieldPart::Imag;
    parts.h = FieldPart::Real;
    parts.j = FieldPart::Real;
    parts.q = FieldPart::Imag;
    CavityRow &row = report.rows[job];
    row.degree = p;
    row.divisions = n;
    row.h = side / n;
    row.errors = l2_error(disc, sol, exact, parts);
    row.residual = sol.residual;
  });
  for (std::size_t d = 0; d < cv.degrees.size(); ++d)
  {
    for (int i = 1; i < nd; ++i)
    {
      CavityRow &prev = report.rows[d * nd + i - 1];
      CavityRow &row = report.rows[d * nd + i];
      row.order = convergence_orders({{prev.h, prev.errors.e}, {row.h, row.errors.e}})[0];
    }
    const CavityRow &last = report.rows[d * nd + nd - 1];
    if (!(last.order >= last.degree + 1 - 0.15))
    {
      report.passed = false;
    }
  }
  report.seconds = seconds_since(t0);
  return report;
}

std::string cavity_csv(const CavityReport &report)
{
  std::ostringstream out;
  out << std::setprecision(17);
  out << "degree,divisions,h,error_e,error_h,error_j,error_q,order_e\n";
  for (const CavityRow &r : report.rows)
  {
    out << r.degree << "," << r.divisions << "," << r.h << "," << r.errors.e << "," << r.errors.h
        << "," << r.errors.j << "," << r.errors.q << "," << r.order << "\n";
  }
  return out.str();
}

SweepSetup prepare_sweep(const RunConfig &config, int width)
{
  const auto t0 = Clock::now();
  const double to_scaled = 1.0 / config.length_unit;
  Mesh mesh = load_gmsh(config.mesh.path, config.mesh.tags, config.mesh.scale * to_scaled);
  if (config.scenario == ScenarioKind::FreespaceNull && mesh.has_scatterer())
  {
    fail(ErrorKind::Validation, "mesh: the freespace-null scenario needs a mesh without scatterer");
  }
  if (config.scenario != ScenarioKind::FreespaceNull && !mesh.has_scatterer())
  {
    fail(ErrorKind::Validation, "mesh: no scatterer elements for this scenario");
  }
  const Skeleton skeleton = build_skeleton(mesh);
  std::vector<Circle> circles;
  for (const Circle &c : config.mesh.circles)
  {
    circles.push_back({to_scaled * c.center, to_scaled * c.radius});
  }
  const std::vector<CurvedEdgeMap> maps =
      circles.empty() ? std::vector<CurvedEdgeMap>{} : curved_boundary_map(mesh, skeleton, circles);

  SweepSetup setup;
  setup.stats = mesh_stats(mesh, skeleton);
  setup.mesh_hash = mesh_hash(mesh);
  DiscretizationOptions opts;
  opts.degree = config.degree;
  opts.hydrodynamic = config.material.model != MaterialModel::LocalDrude;
  opts.boundary = BoundaryKind::SilverMuller;
  opts.stab = config.stab;
  opts.width = width;
  setup.disc = make_discretization(std::move(mesh), maps, opts);
  setup.contour = config.contour;
  setup.contour.center = to_scaled * config.contour.center;
  setup.contour.radius = to_scaled * config.contour.radius;
  setup.contour.lower = to_scaled * config.contour.lower;
  setup.contour.upper = to_scaled * config.contour.upper;
  setup.normalization_length = to_scaled * config.normalization_length;
  setup.seconds = seconds_since(t0);
  return setup;
}

SweepReport run_sweep(const RunConfig &config, const SweepSetup &setup, int width,
                      const std::vector<int> &keep, std::vector<FieldSolution> *kept)
{
  const auto t0 = Clock::now();
  const Discretization &disc = setup.disc;
  const PointLocator locator(disc);
  const int nf = static_cast<int>(config.frequencies.size());
  SweepReport report;
  report.records.resize(nf);
  if (kept)
  {
    kept->assign(keep.size(), FieldSolution{});
  }
  const bool with_oracle = config.scenario == ScenarioKind::Nanowire;
  MieParams mie;
  if (with_oracle)
  {
    mie.radius = config.mesh.circles.front().radius;
    mie.material = config.material;
  }
  const double wp = config.material.plasma_frequency;
  // Frequencies run on the outer pool; each keeps its own solver so results do not
  // depend on the width.
  parallel_for(nf, width, [&](int i) {
    const auto t1 = Clock::now();
    FrequencyRecord &rec = report.records[i];
    rec.omega_over_wp = config.frequencies[i];
    const double omega = rec.omega_over_wp * wp;
    try
    {
      const FrequencyContext ctx = make_frequency_context(config.material, omega);
      const FrequencyProblem problem{scale_coefficients(ctx, config.length_unit), &config.incidence,
                                     nullptr};
      auto solver = make_solver(config.solver);
      FieldSolution sol = solve_frequency(disc, problem, *solver, config.solver, 1);
      rec.residual = sol.residual;
      if (disc.hydrodynamic)
      {
        rec.hard_wall = hard_wall_residual(disc, sol);
      }
      rec.cs = cross_sections(disc, sol, locator, setup.contour, config.incidence,
                              setup.normalization_length, omega);
      if (!std::isfinite(rec.cs.sigma_ext))
      {
        fail(ErrorKind::Numerical, "non-finite cross section");
      }
      if (rec.cs.sigma_abs < -(1e-6 + 1e-2 * std::abs(rec.cs.sigma_ext)))
      {
        fail(ErrorKind::Numerical, "negative absorption cross section");
      }
      if (with_oracle)
      {
        rec.oracle = mie_cross_sections(mie, omega);
      }
      rec.ok = true;
      for (std::size_t k = 0; k < keep.size(); ++k)
      {
        if (kept && keep[k] == i)
        {
          (*kept)[k] = std::move(sol);
          break;
        }
      }
    }
    catch (const std::exception &e)
    {
      rec.ok = false;
      rec.error = e.what();
    }
    rec.seconds = seconds_since(t1);
  });
  double num = 0.0, den = 0.0;
  for (const FrequencyRecord &rec : report.records)
  {
    if (!rec.ok)
    {
      ++report.failures;
      continue;
    }
    if (rec.oracle)
    {
      const double d = rec.cs.sigma_ext - rec.oracle->sigma_ext;
      num += d * d;
      den += rec.oracle->sigma_ext * rec.oracle->sigma_ext;
    }
  }
  if (with_oracle && den > 0.0)
  {
    report.oracle_l2_deviation = std::sqrt(num / den);
  }
  report.seconds = seconds_since(t0);
  return report;
}

std::vector<CrossSections> sweep_results(const SweepReport &report)
{
  std::vector<CrossSections> out;
  for (const FrequencyRecord &rec : report.records)
  {
    if (rec.ok)
    {
      out.push_back(rec.cs);
    }
  }
  return out;
}

std::string oracle_csv(const SweepReport &report, double plasma_frequency)
{
  std::ostringstream out;
  out << std::setprecision(17);
  out << "omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext,solver_sigma_ext,deviation\n";
  for (const FrequencyRecord &rec : report.records)
  {
    if (!rec.ok || !rec.oracle)
    {
      continue;
    }
    const CrossSections &o = *rec.oracle;
    out << o.omega << "," << o.omega / plasma_frequency << "," << o.sigma_sca << ","
        << o.sigma_abs << "," << o.sigma_ext << "," << rec.cs.sigma_ext << ","
        << (rec.cs.sigma_ext - o.sigma_ext) / o.sigma_ext << "\n";
  }
  return out.str();
}

namespace
{

json base_summary(const RunConfig &config)
{
  json s;
  s["version"] = HDGNL_VERSION;
  s["scenario"] = to_string(config.scenario);
  s["config_hash"] = hex(config_hash(config));
  s["config"] = json::parse(config_json(config));
  s["config_text"] = config.source_text;
  return s;
}

std::string format_omega(double w)
{
  std::ostringstream out;
  out << std::fixed << std::setprecision(4) << w;
  return out.str();
}

RunOutcome run_cavity(const RunConfig &config, int width, const std::filesystem::path &dir)
{
  RunOutcome outcome;
  const CavityReport report = run_cavity_convergence(config, width);
  const auto csv = dir / "convergence.csv";
  write_file(csv, cavity_csv(report));
  outcome.files.push_back(csv.string());
  json s = base_summary(config);
  json rows = json::array();
  for (const CavityRow &r : report.rows)
  {
    rows.push_back({{"degree", r.degree},
                    {"divisions", r.divisions},
                    {"h", r.h},
                    {"error_e", r.errors.e},
                    {"error_h", r.errors.h},
                    {"error_j", r.errors.j},
                    {"error_q", r.errors.q},
                    {"order_e", r.order},
                    {"residual", r.residual}});
  }
  s["rows"] = rows;
  s["passed"] = report.passed;
  s["timings"] = {{"total_seconds", report.seconds}};
  outcome.summary_json = s.dump(2);
  if (!report.passed)
  {
    outcome.status = RunStatus::Numerical;
    outcome.message = "cavity convergence: a final-pair order is below p + 1 - 0.15";
  }
  return outcome;
}

int nearest_frequency(const std::vector<double> &grid, double w)
{
  int best = 0;
  for (int i = 1; i < static_cast<int>(grid.size()); ++i)
  {
    if (std::abs(grid[i] - w) < std::abs(grid[best] - w))
    {
      best = i;
    }
  }
  return best;
}

RunOutcome run_sweep_scenario(const RunConfig &config, int width, const std::filesystem::path &dir)
{
  RunOutcome outcome;
  const auto t0 = Clock::now();
  const SweepSetup setup = prepare_sweep(config, width);
  std::vector<int> keep;
  for (double w : config.output.vtk_frequencies)
  {
    const int i = nearest_frequency(config.frequencies, w);
    if (std::find(keep.begin(), keep.end(), i) == keep.end())
    {
      keep.push_back(i);
    }
  }
  std::vector<FieldSolution> kept;
  const SweepReport report = run_sweep(config, setup, width, keep, &kept);
  const double wp = config.material.plasma_frequency;

  const std::vector<CrossSections> results = sweep_results(report);
  if (!results.empty())
  {
    const auto csv = dir / "cross_sections.csv";
    export_sweep(results, wp, csv.string());
    outcome.files.push_back(csv.string());
  }
  if (report.oracle_l2_deviation)
  {
    const auto csv = dir / "oracle.csv";
    write_file(csv, oracle_csv(report, wp));
    outcome.files.push_back(csv.string());
  }
  for (std::size_t k = 0; k < keep.size(); ++k)
  {
    const FrequencyRecord &rec = report.records[keep[k]];
    if (!rec.ok)
    {
      continue;
    }
    const auto vtk = dir / ("fields_w" + format_omega(rec.omega_over_wp) + ".vtk");
    export_vtk(setup.disc, kept[k],
               std::string(to_string(config.scenario)) + " omega/omega_p=" + format_omega(rec.omega_over_wp),
               vtk.string());
    outcome.files.push_back(vtk.string());
  }

  json s = base_summary(config);
  const DofMap &dofs = setup.disc.dofs;
  s["mesh"] = {{"path", config.mesh.path},
               {"hash", hex(setup.mesh_hash)},
               {"nodes", setup.stats.nodes},
               {"elements", setup.stats.elements},
               {"scatterer_elements", setup.stats.scatterer_elements},
               {"edges", setup.stats.edges},
               {"scatterer_edges", setup.stats.scatterer_edges},
               {"absorbing_boundary_edges", setup.stats.absorbing_boundary_edges}};
  s["dofs"] = {{"formula", "N = (p+1) * (N_edges + N_eta_edges)"},
               {"degree", config.degree},
               {"num_edges", dofs.num_edges},
               {"num_eta_edges", dofs.num_eta_edges},
               {"traces", dofs.num_traces()},
               {"locals", dofs.num_locals}};
  json freqs = json::array();
  for (const FrequencyRecord &rec : report.records)
  {
    json f = {{"omega_over_wp", rec.omega_over_wp},
              {"status", rec.ok ? "ok" : "failed"},
              {"residual", rec.residual},
              {"seconds", rec.seconds}};
    if (setup.disc.hydrodynamic)
    {
      f["hard_wall_residual"] = rec.hard_wall;
    }
    if (rec.ok)
    {
      f["sigma_ext"] = rec.cs.sigma_ext;
      f["sigma_abs"] = rec.cs.sigma_abs;
      f["sigma_sca"] = rec.cs.sigma_sca;
    }
    else
    {
      f["error"] = rec.error;
    }
    freqs.push_back(f);
  }
  s["frequencies"] = freqs;
  s["failures"] = report.failures;
  s["normalization_length_m"] = config.normalization_length;
  if (report.oracle_l2_deviation)
  {
    s["oracle_l2_deviation"] = *report.oracle_l2_deviation;
  }
  if (config.scenario == ScenarioKind::FreespaceNull)
  {
    double max_ext = 0.0;
    for (const CrossSections &c : results)
    {
      max_ext = std::max(max_ext, std::abs(c.sigma_ext));
    }
    s["max_abs_sigma_ext"] = max_ext;
  }
  s["timings"] = {{"setup_seconds", setup.seconds},
                  {"sweep_seconds", report.seconds},
                  {"total_seconds", seconds_since(t0)}};
  s["parallelism"] = width;
  outcome.summary_json = s.dump(2);
  if (report.failures > 0)
  {
    outcome.status = RunStatus::Numerical;
    outcome.message = std::to_string(report.failures) + " of " +
                      std::to_string(report.records.size()) + " frequencies failed";
  }
  return outcome;
}

RunStatus status_of(ErrorKind kind)
{
  return kind == ErrorKind::Numerical ? RunStatus::Numerical : RunStatus::Validation;
}

}  // namespace

RunOutcome run(const RunConfig &config, const RunOptions &options)
{
  RunOutcome outcome;
  try
  {
    validate(config);
    const int width = options.parallelism > 0 ? options.parallelism : config.parallelism;
    const std::filesystem::path dir =
        options.output_dir.empty() ? config.output.directory : options.output_dir;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
      fail(ErrorKind::Io, "cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    outcome = config.scenario == ScenarioKind::Cavity ? run_cavity(config, width, dir)
                                                      : run_sweep_scenario(config, width, dir);
    const auto summary = dir / "summary.json";
    write_file(summary, outcome.summary_json + "\n");
    outcome.files.push_back(summary.string());
  }
  catch (const Error &e)
  {
    outcome.status = status_of(e.kind());
    outcome.message = e.what();
  }
  catch (const std::exception &e)
  {
    outcome.status = RunStatus::Numerical;
    outcome.message = e.what();
  }
  return outcome;
}

}  // namespace hdgnl
