#include "hdgnl/config.hpp"

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace hdgnl
{

using nlohmann::json;

const char *to_string(ScenarioKind k)
{
  switch (k)
  {
    case ScenarioKind::Cavity:
      return "cavity";
    case ScenarioKind::Nanowire:
      return "nanowire";
    case ScenarioKind::Dimer:
      return "dimer";
    case ScenarioKind::FreespaceNull:
      return "freespace-null";
  }
  return "?";
}

ScenarioKind scenario_from_string(const std::string &s)
{
  for (ScenarioKind k : {ScenarioKind::Cavity, ScenarioKind::Nanowire, ScenarioKind::Dimer,
                         ScenarioKind::FreespaceNull})
  {
    if (s == to_string(k))
    {
      return k;
    }
  }
  fail(ErrorKind::Validation, "scenario: unknown scenario '" + s + "'");
}

namespace
{

const char *ordering_name(Ordering o) { return o == Ordering::Natural ? "natural" : "min_degree"; }

void check_keys(const json &obj, const std::string &path, std::initializer_list<const char *> allowed)
{
  if (!obj.is_object())
  {
    fail(ErrorKind::Validation, (path.empty() ? std::string("config") : path) + ": expected an object");
  }
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto &item : obj.items())
  {
    if (!keys.count(item.key()))
    {
      fail(ErrorKind::Validation,
           (path.empty() ? "" : path + ".") + item.key() + ": unknown key");
    }
  }
}

std::string join(const std::string &path, const std::string &key)
{
  return path.empty() ? key : path + "." + key;
}

double get_number(const json &obj, const std::string &path, const char *key)
{
  const json &v = obj.at(key);
  if (!v.is_number())
  {
    fail(ErrorKind::Validation, join(path, key) + ": expected a number");
  }
  return v.get<double>();
}

double get_number(const json &obj, const std::string &path, const char *key, double fallback)
{
  return obj.contains(key) ? get_number(obj, path, key) : fallback;
}

int get_int(const json &obj, const std::string &path, const char *key, int fallback)
{
  if (!obj.contains(key))
  {
    return fallback;
  }
  const json &v = obj.at(key);
  if (!v.is_number_integer())
  {
    fail(ErrorKind::Validation, join(path, key) + ": expected an integer");
  }
  return v.get<int>();
}

std::string get_string(const json &obj, const std::string &path, const char *key,
                       const std::string &fallback)
{
  if (!obj.contains(key))
  {
    return fallback;
  }
  const json &v = obj.at(key);
  if (!v.is_string())
  {
    fail(ErrorKind::Validation, join(path, key) + ": expected a string");
  }
  return v.get<std::string>();
}

const json &require(const json &obj, const std::string &path, const char *key)
{
  if (!obj.contains(key))
  {
    fail(ErrorKind::Validation, join(path, key) + ": missing");
  }
  return obj.at(key);
}

double require_number(const json &obj, const std::string &path, const char *key)
{
  require(obj, path, key);
  return get_number(obj, path, key);
}

Vec2 get_vec2(const json &v, const std::string &path)
{
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
  {
    fail(ErrorKind::Validation, path + ": expected [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

std::vector<double> get_numbers(const json &v, const std::string &path)
{
  if (!v.is_array())
  {
    fail(ErrorKind::Validation, path + ": expected an array of numbers");
  }
  std::vector<double> out;
  for (const json &x : v)
  {
    if (!x.is_number())
    {
      fail(ErrorKind::Validation, path + ": expected an array of numbers");
    }
    out.push_back(x.get<double>());
  }
  return out;
}

std::vector<int> get_ints(const json &v, const std::string &path)
{
  if (!v.is_array())
  {
    fail(ErrorKind::Validation, path + ": expected an array of integers");
  }
  std::vector<int> out;
  for (const json &x : v)
  {
    if (!x.is_number_integer())
    {
      fail(ErrorKind::Validation, path + ": expected an array of integers");
    }
    out.push_back(x.get<int>());
  }
  return out;
}

void parse_mesh(const json &m, const std::string &base_dir, MeshConfig &out)
{
  check_keys(m, "mesh", {"path", "scale", "free_space_tags", "scatterer_tags", "circles"});
  const std::string path = get_string(m, "mesh", "path", "");
  if (path.empty())
  {
    fail(ErrorKind::Validation, "mesh.path: missing");
  }
  const std::filesystem::path p(path);
  out.path = p.is_absolute() ? path : (std::filesystem::path(base_dir) / p).lexically_normal().string();
  out.scale = get_number(m, "mesh", "scale", out.scale);
  out.tags.clear();
  const std::vector<int> free_tags =
      m.contains("free_space_tags") ? get_ints(m["free_space_tags"], "mesh.free_space_tags")
                                    : std::vector<int>{1};
  const std::vector<int> sca_tags =
      m.contains("scatterer_tags") ? get_ints(m["scatterer_tags"], "mesh.scatterer_tags")
                                   : std::vector<int>{2};
  for (int t : free_tags)
  {
    out.tags[t] = Domain::FreeSpace;
  }
  for (int t : sca_tags)
  {
    if (out.tags.count(t))
    {
      fail(ErrorKind::Validation, "mesh.scatterer_tags: tag " + std::to_string(t) +
                                      " is also listed as free space");
    }
    out.tags[t] = Domain::Scatterer;
  }
  out.circles.clear();
  if (m.contains("circles"))
  {
    const json &cs = m["circles"];
    if (!cs.is_array())
    {
      fail(ErrorKind::Validation, "mesh.circles: expected an array");
    }
    for (std::size_t i = 0; i < cs.size(); ++i)
    {
      const std::string where = "mesh.circles[" + std::to_string(i) + "]";
      check_keys(cs[i], where, {"center", "radius"});
      Circle c;
      c.center = get_vec2(require(cs[i], where, "center"), where + ".center");
      c.radius = require_number(cs[i], where, "radius");
      out.circles.push_back(c);
    }
  }
}

void parse_material(const json &m, MaterialSpec &out)
{
  check_keys(m, "material", {"model", "plasma_frequency", "damping", "fermi_velocity", "diffusion",
                             "epsilon_infinity", "epsilon_interband"});
  out.model = material_model_from_string(get_string(m, "material", "model", "NHD"));
  out.plasma_frequency = require_number(m, "material", "plasma_frequency");
  out.damping = get_number(m, "material", "damping", 0.0);
  out.fermi_velocity = require_number(m, "material", "fermi_velocity");
  out.diffusion = get_number(m, "material", "diffusion", 0.0);
  if (get_number(m, "material", "epsilon_infinity", 1.0) != 1.0)
  {
    fail(ErrorKind::Validation, "material.epsilon_infinity: only 1 is supported");
  }
  if (get_number(m, "material", "epsilon_interband", 0.0) != 0.0)
  {
    fail(ErrorKind::Validation, "material.epsilon_interband: only 0 is supported");
  }
}

std::vector<double> parse_frequencies(const json &f)
{
  check_keys(f, "frequencies", {"omega_over_wp", "start", "stop", "count"});
  if (f.contains("omega_over_wp"))
  {
    if (f.contains("start") || f.contains("stop") || f.contains("count"))
    {
      fail(ErrorKind::Validation, "frequencies: give either omega_over_wp or start/stop/count");
    }
    return get_numbers(f["omega_over_wp"], "frequencies.omega_over_wp");
  }
  const double start = require_number(f, "frequencies", "start");
  const int count = get_int(f, "frequencies", "count", 1);
  if (count < 1)
  {
    fail(ErrorKind::Validation, "frequencies.count: must be at least 1");
  }
  if (count == 1)
  {
    return {start};
  }
  const double stop = require_number(f, "frequencies", "stop");
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i)
  {
    out[i] = start + (stop - start) * i / (count - 1);
  }
  return out;
}

void parse_contour(const json &c, ContourSpec &out)
{
  const std::string shape = get_string(c, "contour", "shape", "circle");
  if (shape == "circle")
  {
    check_keys(c, "contour", {"shape", "center", "radius", "density"});
    out.shape = ContourShape::Circle;
    out.center = c.contains("center") ? get_vec2(c["center"], "contour.center") : Vec2{};
    out.radius = require_number(c, "contour", "radius");
  }
  else if (shape == "rectangle")
  {
    check_keys(c, "contour", {"shape", "lower", "upper", "density"});
    out.shape = ContourShape::Rectangle;
    out.lower = get_vec2(require(c, "contour", "lower"), "contour.lower");
    out.upper = get_vec2(require(c, "contour", "upper"), "contour.upper");
  }
  else
  {
    fail(ErrorKind::Validation, "contour.shape: expected 'circle' or 'rectangle'");
  }
  out.density = get_int(c, "contour", "density", 0);
}

void parse_cavity(const json &c, CavityConfig &out)
{
  check_keys(c, "cavity", {"wavenumber", "damping", "plasma_frequency", "degrees", "divisions"});
  out.wavenumber = get_number(c, "cavity", "wavenumber", out.wavenumber);
  out.damping = get_number(c, "cavity", "damping", out.damping);
  out.plasma_frequency = get_number(c, "cavity", "plasma_frequency", out.plasma_frequency);
  if (c.contains("degrees"))
  {
    out.degrees = get_ints(c["degrees"], "cavity.degrees");
  }
  if (c.contains("divisions"))
  {
    out.divisions = get_ints(c["divisions"], "cavity.divisions");
  }
}

void parse_solver(const json &s, SolverOptions &out)
{
  check_keys(s, "solver", {"engine", "ordering", "pivot_threshold", "refinement_steps",
                           "refinement_trigger"});
  out.engine = solver_engine_from_string(get_string(s, "solver", "engine", to_string(out.engine)));
  out.ordering = ordering_from_string(get_string(s, "solver", "ordering", ordering_name(out.ordering)));
  out.pivot_threshold = get_number(s, "solver", "pivot_threshold", out.pivot_threshold);
  out.refinement_steps = get_int(s, "solver", "refinement_steps", out.refinement_steps);
  out.refinement_trigger = get_number(s, "solver", "refinement_trigger", out.refinement_trigger);
}

bool is_sweep(ScenarioKind k) { return k != ScenarioKind::Cavity; }

}  // namespace

void validate(const RunConfig &c)
{
  if (c.degree < 1 || c.degree > 4)
  {
    fail(ErrorKind::Validation, "degree: must be in 1..4, got " + std::to_string(c.degree));
  }
  if (!(c.stab.tau_lambda > 0.0))
  {
    fail(ErrorKind::Validation, "stabilization.tau_lambda: must be positive");
  }
  if (!(c.stab.tau_eta > 0.0))
  {
    fail(ErrorKind::Validation, "stabilization.tau_eta: must be positive");
  }
  if (!(c.length_unit > 0.0))
  {
    fail(ErrorKind::Validation, "length_unit: must be positive");
  }
  if (c.parallelism < 1)
  {
    fail(ErrorKind::Validation, "parallelism: must be at least 1");
  }
  if (!(c.solver.pivot_threshold > 0.0) || c.solver.pivot_threshold > 1.0)
  {
    fail(ErrorKind::Validation, "solver.pivot_threshold: must be in (0, 1]");
  }
  if (c.solver.refinement_steps < 0)
  {
    fail(ErrorKind::Validation, "solver.refinement_steps: must be nonnegative");
  }
  if (c.output.directory.empty())
  {
    fail(ErrorKind::Validation, "output.directory: must not be empty");
  }
  if (c.scenario == ScenarioKind::Cavity)
  {
    const CavityConfig &cv = c.cavity;
    if (!(cv.wavenumber > 0.0) || !(cv.plasma_frequency > 0.0) || cv.damping < 0.0)
    {
      fail(ErrorKind::Validation, "cavity: wavenumber and plasma_frequency must be positive, damping nonnegative");
    }
    if (cv.divisions.size() < 2)
    {
      fail(ErrorKind::Validation, "cavity.divisions: need at least 2 meshes");
    }
    for (std::size_t i = 0; i < cv.divisions.size(); ++i)
    {
      if (cv.divisions[i] < 1 || (i > 0 && cv.divisions[i] <= cv.divisions[i - 1]))
      {
        fail(ErrorKind::Validation, "cavity.divisions: must be positive and strictly increasing");
      }
    }
    if (cv.degrees.empty())
    {
      fail(ErrorKind::Validation, "cavity.degrees: must not be empty");
    }
    for (int p : cv.degrees)
    {
      if (p < 1 || p > 4)
      {
        fail(ErrorKind::Validation, "cavity.degrees: must be in 1..4, got " + std::to_string(p));
      }
    }
    return;
  }
  validate(c.material);
  if (c.frequencies.empty())
  {
    fail(ErrorKind::Validation, "frequencies: must not be empty");
  }
  for (std::size_t i = 0; i < c.frequencies.size(); ++i)
  {
    if (!(c.frequencies[i] > 0.0))
    {
      fail(ErrorKind::Validation, "frequencies: must be positive");
    }
    if (i > 0 && !(c.frequencies[i] > c.frequencies[i - 1]))
    {
      fail(ErrorKind::Validation, "frequencies: must be strictly increasing");
    }
  }
  if (std::abs(norm(c.incidence.direction) - 1.0) > 1e-12)
  {
    fail(ErrorKind::Validation, "incidence.direction: must be a unit vector");
  }
  if (c.mesh.path.empty())
  {
    fail(ErrorKind::Validation, "mesh.path: missing");
  }
  if (!std::filesystem::exists(c.mesh.path))
  {
    fail(ErrorKind::Validation, "mesh.path: file '" + c.mesh.path + "' does not exist");
  }
  if (!(c.mesh.scale > 0.0))
  {
    fail(ErrorKind::Validation, "mesh.scale: must be positive");
  }
  for (const Circle &circle : c.mesh.circles)
  {
    if (!(circle.radius > 0.0))
    {
      fail(ErrorKind::Validation, "mesh.circles: radius must be positive");
    }
  }
  if (c.scenario == ScenarioKind::Nanowire && c.mesh.circles.size() != 1)
  {
    fail(ErrorKind::Validation, "mesh.circles: the nanowire scenario needs exactly one circle");
  }
  if (c.scenario == ScenarioKind::Dimer && c.mesh.circles.size() != 2)
  {
    fail(ErrorKind::Validation, "mesh.circles: the dimer scenario needs exactly two circles");
  }
  if (c.scenario == ScenarioKind::FreespaceNull && !c.mesh.circles.empty())
  {
    fail(ErrorKind::Validation, "mesh.circles: the freespace-null scenario has no scatterer");
  }
  if (c.contour.shape == ContourShape::Circle && !(c.contour.radius > 0.0))
  {
    fail(ErrorKind::Validation, "contour.radius: must be positive");
  }
  if (c.contour.shape == ContourShape::Rectangle &&
      (!(c.contour.upper.x > c.contour.lower.x) || !(c.contour.upper.y > c.contour.lower.y)))
  {
    fail(ErrorKind::Validation, "contour: rectangle corners must satisfy lower < upper");
  }
  if (c.contour.density != 0 && c.contour.density < 2)
  {
    fail(ErrorKind::Validation, "contour.density: must be at least 2 (or 0 for 2(p+1))");
  }
  if (!(c.normalization_length > 0.0))
  {
    fail(ErrorKind::Validation, "normalization_length: must be positive");
  }
  for (double w : c.output.vtk_frequencies)
  {
    if (!(w > 0.0))
    {
      fail(ErrorKind::Validation, "output.vtk_frequencies: must be positive");
    }
  }
}

RunConfig parse_config_text(const std::string &text, const std::string &base_dir)
{
  json j;
  try
  {
    j = json::parse(text);
  }
  catch (const json::parse_error &e)
  {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i)
    {
      if (text[i] == '\n')
      {
        ++line;
        col = 1;
      }
      else
      {
        ++col;
      }
    }
    fail(ErrorKind::Parse, "config syntax error at line " + std::to_string(line) + ", column " +
                               std::to_string(col) + ": " + e.what());
  }
  try
  {
    check_keys(j, "", {"scenario", "degree", "stabilization", "length_unit", "mesh", "material",
                       "frequencies", "incidence", "contour", "normalization_length", "output",
                       "solver", "parallelism", "cavity"});
    RunConfig c;
    c.source_text = text;
    c.scenario = scenario_from_string(get_string(j, "", "scenario", ""));
    c.degree = get_int(j, "", "degree", c.degree);
    if (j.contains("stabilization"))
    {
      const json &s = j["stabilization"];
      check_keys(s, "stabilization", {"tau_lambda", "tau_eta"});
      c.stab.tau_lambda = get_number(s, "stabilization", "tau_lambda", 1.0);
      c.stab.tau_eta = get_number(s, "stabilization", "tau_eta", 1.0);
    }
    c.length_unit = get_number(j, "", "length_unit", c.length_unit);
    if (j.contains("solver"))
    {
      parse_solver(j["solver"], c.solver);
    }
    c.parallelism = get_int(j, "", "parallelism", c.parallelism);
    if (j.contains("output"))
    {
      const json &o = j["output"];
      check_keys(o, "output", {"directory", "vtk_frequencies"});
      c.output.directory = get_string(o, "output", "directory", c.output.directory);
      if (o.contains("vtk_frequencies"))
      {
        c.output.vtk_frequencies = get_numbers(o["vtk_frequencies"], "output.vtk_frequencies");
      }
    }
    if (c.scenario == ScenarioKind::Cavity)
    {
      for (const char *key : {"mesh", "material", "frequencies", "incidence", "contour",
                              "normalization_length"})
      {
        if (j.contains(key))
        {
          fail(ErrorKind::Validation, std::string(key) + ": not used by the cavity scenario");
        }
      }
      if (j.contains("cavity"))
      {
        parse_cavity(j["cavity"], c.cavity);
      }
      validate(c);
      return c;
    }
    if (j.contains("cavity"))
    {
      fail(ErrorKind::Validation, "cavity: only used by the cavity scenario");
    }
    parse_mesh(require(j, "", "mesh"), base_dir, c.mesh);
    parse_material(require(j, "", "material"), c.material);
    c.frequencies = parse_frequencies(require(j, "", "frequencies"));
    if (j.contains("incidence"))
    {
      const json &in = j["incidence"];
      check_keys(in, "incidence", {"direction", "amplitude", "polarization"});
      if (in.contains("direction"))
      {
        c.incidence.direction = get_vec2(in["direction"], "incidence.direction");
      }
      if (in.contains("amplitude"))
      {
        const json &a = in["amplitude"];
        if (a.is_number())
        {
          c.incidence.amplitude = a.get<double>();
        }
        else
        {
          const Vec2 v = get_vec2(a, "incidence.amplitude");
          c.incidence.amplitude = complex(v.x, v.y);
        }
      }
      if (get_string(in, "incidence", "polarization", "TM") != "TM")
      {
        fail(ErrorKind::Validation, "incidence.polarization: only 'TM' is supported");
      }
    }
    parse_contour(require(j, "", "contour"), c.contour);
    if (j.contains("normalization_length"))
    {
      c.normalization_length = get_number(j, "", "normalization_length");
    }
    else if (!c.mesh.circles.empty())
    {
      c.normalization_length = 2.0 * c.mesh.circles.front().radius;
    }
    validate(c);
    return c;
  }
  catch (const json::exception &e)
  {
    fail(ErrorKind::Validation, std::string("config: ") + e.what());
  }
}

RunConfig parse_config(const std::string &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
  {
    fail(ErrorKind::Io, "cannot open config '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::filesystem::path p(path);
  return parse_config_text(buf.str(), p.has_parent_path() ? p.parent_path().string() : ".");
}

std::string config_json(const RunConfig &c)
{
  json j;
  j["scenario"] = to_string(c.scenario);
  j["degree"] = c.degree;
  j["stabilization"] = {{"tau_lambda", c.stab.tau_lambda}, {"tau_eta", c.stab.tau_eta}};
  j["length_unit"] = c.length_unit;
  j["parallelism"] = c.parallelism;
  j["solver"] = {{"engine", to_string(c.solver.engine)},
                 {"ordering", ordering_name(c.solver.ordering)},
                 {"pivot_threshold", c.solver.pivot_threshold},
                 {"refinement_steps", c.solver.refinement_steps},
                 {"refinement_trigger", c.solver.refinement_trigger}};
  j["output"] = {{"directory", c.output.directory}, {"vtk_frequencies", c.output.vtk_frequencies}};
  if (c.scenario == ScenarioKind::Cavity)
  {
    j["cavity"] = {{"wavenumber", c.cavity.wavenumber},
                   {"damping", c.cavity.damping},
                   {"plasma_frequency", c.cavity.plasma_frequency},
                   {"degrees", c.cavity.degrees},
                   {"divisions", c.cavity.divisions}};
    return j.dump();
  }
  json circles = json::array();
  for (const Circle &ci : c.mesh.circles)
  {
    circles.push_back({{"center", {ci.center.x, ci.center.y}}, {"radius", ci.radius}});
  }
  std::vector<int> free_tags, sca_tags;
  for (const auto &[tag, dom] : c.mesh.tags)
  {
    (dom == Domain::Scatterer ? sca_tags : free_tags).push_back(tag);
  }
  j["mesh"] = {{"path", c.mesh.path},
               {"scale", c.mesh.scale},
               {"free_space_tags", free_tags},
               {"scatterer_tags", sca_tags},
               {"circles", circles}};
  j["material"] = {{"model", to_string(c.material.model)},
                   {"plasma_frequency", c.material.plasma_frequency},
                   {"damping", c.material.damping},
                   {"fermi_velocity", c.material.fermi_velocity},
                   {"diffusion", c.material.diffusion}};
  j["frequencies"] = {{"omega_over_wp", c.frequencies}};
  j["incidence"] = {{"direction", {c.incidence.direction.x, c.incidence.direction.y}},
                    {"amplitude", {c.incidence.amplitude.real(), c.incidence.amplitude.imag()}},
                    {"polarization", "TM"}};
  if (c.contour.shape == ContourShape::Circle)
  {
    j["contour"] = {{"shape", "circle"},
                    {"center", {c.contour.center.x, c.contour.center.y}},
                    {"radius", c.contour.radius},
                    {"density", c.contour.density}};
  }
  else
  {
    j["contour"] = {{"shape", "rectangle"},
                    {"lower", {c.contour.lower.x, c.contour.lower.y}},
                    {"upper", {c.contour.upper.x, c.contour.upper.y}},
                    {"density", c.contour.density}};
  }
  j["normalization_length"] = c.normalization_length;
  return j.dump();
}

std::uint64_t config_hash(const RunConfig &config)
{
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : config_json(config))
  {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace hdgnl
