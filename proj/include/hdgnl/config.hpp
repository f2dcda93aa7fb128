#ifndef HDGNL_CONFIG_HPP
#define HDGNL_CONFIG_HPP

#include <string>
#include <vector>

#include "hdgnl/hdg.hpp"
#include "hdgnl/materials.hpp"
#include "hdgnl/mesh.hpp"
#include "hdgnl/postprocess.hpp"
#include "hdgnl/sparse.hpp"

namespace hdgnl
{

enum class ScenarioKind
{
  Cavity,
  Nanowire,
  Dimer,
  FreespaceNull
};

const char *to_string(ScenarioKind k);
ScenarioKind scenario_from_string(const std::string &s);

struct MeshConfig
{
  std::string path;           // resolved against the config file directory
  double scale = 1e-9;        // file units -> meters
  TagTable tags;              // physical tag -> domain
  std::vector<Circle> circles;  // analytic scatterer boundaries, meters
};

struct CavityConfig
{
  double wavenumber = 1.0;  // scaled units
  double damping = 0.1;
  double plasma_frequency = 1.0;
  std::vector<int> degrees{1, 2, 3};
  std::vector<int> divisions{2, 4, 8, 16};  // squares per side of each mesh
};

struct OutputConfig
{
  std::string directory = "output";
  std::vector<double> vtk_frequencies;  // omega / omega_p, matched to the nearest grid point
};

// One run. Lengths are in meters and frequencies in units of the plasma frequency.
struct RunConfig
{
  ScenarioKind scenario = ScenarioKind::Nanowire;
  int degree = 4;
  Stabilization stab;
  double length_unit = 1e-9;
  MeshConfig mesh;
  MaterialSpec material;
  std::vector<double> frequencies;  // omega / omega_p, strictly increasing
  Incidence incidence;
  ContourSpec contour;              // meters
  double normalization_length = 0.0;  // meters
  OutputConfig output;
  SolverOptions solver;
  int parallelism = 1;
  CavityConfig cavity;
  std::string source_text;  // the file as read, echoed in the run summary
};

// Strict JSON reader: unknown keys, wrong types and out-of-range values raise
// Error(Parse) or Error(Validation) naming the offending field. `base_dir` resolves a
// relative mesh path.
RunConfig parse_config_text(const std::string &text, const std::string &base_dir = ".");
RunConfig parse_config(const std::string &path);

// Re-checks the invariants of a config built in code; throws Error(Validation).
void validate(const RunConfig &config);

// The config as canonical JSON (sorted keys), used for hashing and the run summary.
std::string config_json(const RunConfig &config);
std::uint64_t config_hash(const RunConfig &config);

}  // namespace hdgnl

#endif  // HDGNL_CONFIG_HPP
