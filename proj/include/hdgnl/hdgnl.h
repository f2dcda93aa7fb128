#ifndef HDGNL_H
#define HDGNL_H

#include <stddef.h>

#if defined(_WIN32)
#define HDGNL_API __declspec(dllexport)
#else
#define HDGNL_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

// Status codes. hdgnl_exit_code maps them onto the CLI exit codes
// (0 success, 1 validation, 2 numerical failure).
typedef enum hdgnl_status
{
  HDGNL_OK = 0,
  HDGNL_ERR_VALIDATION = 1,
  HDGNL_ERR_NUMERICAL = 2,
  HDGNL_ERR_IO = 3,
  HDGNL_ERR_PARSE = 4,
  HDGNL_ERR_ARGUMENT = 5,
  HDGNL_ERR_INTERNAL = 6
} hdgnl_status;

typedef enum hdgnl_model
{
  HDGNL_MODEL_LOCAL_DRUDE = 0,
  HDGNL_MODEL_NHD = 1,
  HDGNL_MODEL_GNOR = 2
} hdgnl_model;

typedef struct hdgnl_config hdgnl_config;
typedef struct hdgnl_mesh hdgnl_mesh;
typedef struct hdgnl_result hdgnl_result;

HDGNL_API const char *hdgnl_version(void);

// Message of the last failed call on this thread ("" if none).
HDGNL_API const char *hdgnl_last_error(void);

HDGNL_API int hdgnl_exit_code(hdgnl_status status);

// Run configuration (strict JSON). Relative mesh paths resolve against the config
// file's directory, or `base_dir` for in-memory text (NULL means ".").
HDGNL_API hdgnl_status hdgnl_config_load(const char *path, hdgnl_config **out);
HDGNL_API hdgnl_status hdgnl_config_parse(const char *text, const char *base_dir,
                                          hdgnl_config **out);
HDGNL_API void hdgnl_config_free(hdgnl_config *config);
// Canonical JSON of the parsed config; owned by the handle.
HDGNL_API const char *hdgnl_config_json(const hdgnl_config *config);
HDGNL_API const char *hdgnl_config_scenario(const hdgnl_config *config);

// Runs the configured scenario and writes its outputs. `output_dir` (may be NULL)
// and a positive `parallelism` override the config. The returned status is the run
// status; the result handle is produced even for a failed run when `out` is set.
HDGNL_API hdgnl_status hdgnl_run(const hdgnl_config *config, const char *output_dir,
                                 int parallelism, hdgnl_result **out);
HDGNL_API void hdgnl_result_free(hdgnl_result *result);
HDGNL_API const char *hdgnl_result_message(const hdgnl_result *result);
HDGNL_API const char *hdgnl_result_summary(const hdgnl_result *result);
HDGNL_API size_t hdgnl_result_file_count(const hdgnl_result *result);
HDGNL_API const char *hdgnl_result_file(const hdgnl_result *result, size_t index);

// Gmsh MSH 2.2 mesh with the given physical tags; coordinates are multiplied by
// `scale` to obtain meters.
HDGNL_API hdgnl_status hdgnl_mesh_load(const char *path, const int *free_space_tags,
                                       size_t num_free_space, const int *scatterer_tags,
                                       size_t num_scatterer, double scale, hdgnl_mesh **out);
HDGNL_API void hdgnl_mesh_free(hdgnl_mesh *mesh);
// "key: value" lines with node, element and per-class edge counts; owned by the handle.
HDGNL_API const char *hdgnl_mesh_stats(const hdgnl_mesh *mesh);

// Drude permittivity 1 - wp^2 / (w^2 + i gamma w) as (re, im).
HDGNL_API hdgnl_status hdgnl_drude_permittivity(double plasma_frequency, double damping,
                                                double omega, double out[2]);

// Nonlocal Mie cross sections of a cylinder normalized by 2r: out = {sca, abs, ext}.
HDGNL_API hdgnl_status hdgnl_mie_cross_sections(hdgnl_model model, double plasma_frequency,
                                                double damping, double fermi_velocity,
                                                double diffusion, double radius, double omega,
                                                double out[3]);

#ifdef __cplusplus
}
#endif

#endif  // HDGNL_H
