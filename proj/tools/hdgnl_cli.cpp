#include <cstdio>
#include <cstdlib>
#include <string>

#include "CLI11.hpp"
#include "hdgnl/hdgnl.h"

namespace
{

int report_failure(hdgnl_status status)
{
  std::fprintf(stderr, "error: %s\n", hdgnl_last_error());
  return hdgnl_exit_code(status);
}

int cmd_run(const std::string &path, std::string output_dir, int parallelism)
{
  if (output_dir.empty())
  {
    if (const char *env = std::getenv("HDGNL_OUTPUT_DIR"))
    {
      output_dir = env;
    }
  }
  hdgnl_config *config = nullptr;
  hdgnl_status status = hdgnl_config_load(path.c_str(), &config);
  if (status != HDGNL_OK)
  {
    return report_failure(status);
  }
  hdgnl_result *result = nullptr;
  status = hdgnl_run(config, output_dir.empty() ? nullptr : output_dir.c_str(), parallelism, &result);
  if (result)
  {
    for (size_t i = 0; i < hdgnl_result_file_count(result); ++i)
    {
      std::printf("wrote %s\n", hdgnl_result_file(result, i));
    }
  }
  if (status != HDGNL_OK)
  {
    std::fprintf(stderr, "error: %s\n", result ? hdgnl_result_message(result) : hdgnl_last_error());
  }
  hdgnl_result_free(result);
  hdgnl_config_free(config);
  return hdgnl_exit_code(status);
}

int cmd_check(const std::string &path)
{
  hdgnl_config *config = nullptr;
  const hdgnl_status status = hdgnl_config_load(path.c_str(), &config);
  if (status != HDGNL_OK)
  {
    return report_failure(status);
  }
  std::printf("%s: valid %s config\n%s\n", path.c_str(), hdgnl_config_scenario(config),
              hdgnl_config_json(config));
  hdgnl_config_free(config);
  return 0;
}

int cmd_mesh_info(const std::string &path)
{
  const int free_space[] = {1};
  const int scatterer[] = {2};
  hdgnl_mesh *mesh = nullptr;
  const hdgnl_status status = hdgnl_mesh_load(path.c_str(), free_space, 1, scatterer, 1, 1.0, &mesh);
  if (status != HDGNL_OK)
  {
    return report_failure(status);
  }
  std::printf("%s", hdgnl_mesh_stats(mesh));
  hdgnl_mesh_free(mesh);
  return 0;
}

}  // namespace

int main(int argc, char **argv)
{
  CLI::App app{"HDG solver for nonlocal plasmonics (2D TM)"};
  app.set_version_flag("--version", std::string(hdgnl_version()));
  app.require_subcommand(1);

  std::string run_path, output_dir;
  int parallelism = 0;
  auto *run = app.add_subcommand("run", "run the scenario described by a config file");
  run->add_option("config", run_path, "run configuration (JSON)")->required();
  run->add_option("--output-dir", output_dir,
                  "output directory (overrides the config and HDGNL_OUTPUT_DIR)");
  run->add_option("--parallelism", parallelism, "worker count (overrides the config)")
      ->check(CLI::PositiveNumber);

  std::string check_path;
  auto *check = app.add_subcommand("check", "validate a config file without running it");
  check->add_option("config", check_path, "run configuration (JSON)")->required();

  std::string mesh_path;
  auto *info = app.add_subcommand("mesh-info",
                                  "print mesh statistics (physical tag 1 free space, 2 scatterer)");
  info->add_option("mesh", mesh_path, "Gmsh MSH 2.2 file")->required();

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  if (*run)
  {
    return cmd_run(run_path, output_dir, parallelism);
  }
  if (*check)
  {
    return cmd_check(check_path);
  }
  return cmd_mesh_info(mesh_path);
}
