#ifndef HDGNL_SCENARIO_HPP
#define HDGNL_SCENARIO_HPP

#include <optional>
#include <string>
#include <vector>

#include "hdgnl/config.hpp"
#include "hdgnl/cross_sections.hpp"
#include "hdgnl/hdg.hpp"
#include "hdgnl/postprocess.hpp"

namespace hdgnl
{

// Exit codes shared by the C API and the CLI.
enum class RunStatus
{
  Ok = 0,
  Validation = 1,
  Numerical = 2
};

struct CavityRow
{
  int degree = 1;
  int divisions = 1;
  double h = 0.0;
  FieldErrors errors;  // Im E, Re H, Re J, Im q
  double order = 0.0;  // of the E error against the previous row (0 for the first)
  double residual = 0.0;
};

struct CavityReport
{
  std::vector<CavityRow> rows;  // by degree, then by refinement
  bool passed = true;           // every final-pair order >= p + 1 - 0.15
  double seconds = 0.0;
};

// Solves the manufactured cavity problem on structured squares for every configured
// degree and refinement; `width` solves run concurrently.
CavityReport run_cavity_convergence(const RunConfig &config, int width);
std::string cavity_csv(const CavityReport &report);

// Mesh and discretization of a sweep scenario, in scaled length units.
struct SweepSetup
{
  Discretization disc;
  MeshStats stats;
  std::uint64_t mesh_hash = 0;
  ContourSpec contour;             // scaled
  double normalization_length = 0;  // scaled
  double seconds = 0.0;
};

SweepSetup prepare_sweep(const RunConfig &config, int width = 1);

struct FrequencyRecord
{
  double omega_over_wp = 0.0;
  bool ok = false;
  std::string error;
  CrossSections cs;
  double residual = 0.0;
  double hard_wall = 0.0;  // hydrodynamic runs only
  std::optional<CrossSections> oracle;
  double seconds = 0.0;
};

struct SweepReport
{
  std::vector<FrequencyRecord> records;  // in frequency order
  int failures = 0;
  std::optional<double> oracle_l2_deviation;  // ||ext - ext_mie|| / ||ext_mie|| over ok records
  double seconds = 0.0;
};

// Per-frequency pipeline: coefficients, condensed solve, recovery, cross sections and
// (single wire) the Mie oracle. Frequencies run on `width` workers; a failing
// frequency is recorded and the sweep continues. A solution with sigma_abs below
// -(1e-6 + 1e-2 |sigma_ext|) counts as failed. `keep` receives the solutions at the
// listed record indices (for field export).
SweepReport run_sweep(const RunConfig &config, const SweepSetup &setup, int width,
                      const std::vector<int> &keep = {},
                      std::vector<FieldSolution> *kept = nullptr);

// Cross sections of the ok records in frequency order.
std::vector<CrossSections> sweep_results(const SweepReport &report);
// omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext,solver_sigma_ext,deviation
std::string oracle_csv(const SweepReport &report, double plasma_frequency);

struct RunOptions
{
  std::string output_dir;  // overrides the config when nonempty
  int parallelism = 0;     // overrides the config when positive
};

struct RunOutcome
{
  RunStatus status = RunStatus::Ok;
  std::string message;
  std::string summary_json;
  std::vector<std::string> files;
};

// Runs a validated config end to end and writes every output plus summary.json into
// the output directory. Errors are reported through the outcome, not thrown.
RunOutcome run(const RunConfig &config, const RunOptions &options = {});

}  // namespace hdgnl

#endif  // HDGNL_SCENARIO_HPP
