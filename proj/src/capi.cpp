#include "hdgnl/hdgnl.h"

#include <memory>
#include <string>
#include <vector>

#include "hdgnl/config.hpp"
#include "hdgnl/materials.hpp"
#include "hdgnl/mesh.hpp"
#include "hdgnl/oracle.hpp"
#include "hdgnl/scenario.hpp"

struct hdgnl_config
{
  hdgnl::RunConfig config;
  std::string json;
};

struct hdgnl_mesh
{
  hdgnl::Mesh mesh;
  std::string stats;
};

struct hdgnl_result
{
  hdgnl::RunOutcome outcome;
};

namespace
{

thread_local std::string last_error;

hdgnl_status status_of(hdgnl::ErrorKind kind)
{
  switch (kind)
  {
    case hdgnl::ErrorKind::Validation:
      return HDGNL_ERR_VALIDATION;
    case hdgnl::ErrorKind::Numerical:
      return HDGNL_ERR_NUMERICAL;
    case hdgnl::ErrorKind::Io:
      return HDGNL_ERR_IO;
    case hdgnl::ErrorKind::Parse:
      return HDGNL_ERR_PARSE;
    case hdgnl::ErrorKind::Argument:
      return HDGNL_ERR_ARGUMENT;
  }
  return HDGNL_ERR_INTERNAL;
}

// Runs fn, translating exceptions into status codes and the thread-local message.
template <class Fn>
hdgnl_status guarded(Fn &&fn)
{
  try
  {
    last_error.clear();
    fn();
    return HDGNL_OK;
  }
  catch (const hdgnl::Error &e)
  {
    last_error = e.what();
    return status_of(e.kind());
  }
  catch (const std::bad_alloc &)
  {
    last_error = "out of memory";
    return HDGNL_ERR_INTERNAL;
  }
  catch (const std::exception &e)
  {
    last_error = e.what();
    return HDGNL_ERR_INTERNAL;
  }
}

hdgnl_status null_argument(const char *what)
{
  last_error = std::string(what) + " must not be NULL";
  return HDGNL_ERR_ARGUMENT;
}

}  // namespace

extern "C" {

const char *hdgnl_version(void) { return HDGNL_VERSION; }

const char *hdgnl_last_error(void) { return last_error.c_str(); }

int hdgnl_exit_code(hdgnl_status status)
{
  switch (status)
  {
    case HDGNL_OK:
      return 0;
    case HDGNL_ERR_NUMERICAL:
    case HDGNL_ERR_INTERNAL:
      return 2;
    default:
      return 1;
  }
}

hdgnl_status hdgnl_config_load(const char *path, hdgnl_config **out)
{
  if (!path || !out)
  {
    return null_argument("path and out");
  }
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<hdgnl_config>(hdgnl_config{hdgnl::parse_config(path), {}});
    c->json = hdgnl::config_json(c->config);
    *out = c.release();
  });
}

hdgnl_status hdgnl_config_parse(const char *text, const char *base_dir, hdgnl_config **out)
{
  if (!text || !out)
  {
    return null_argument("text and out");
  }
  *out = nullptr;
  return guarded([&] {
    auto c = std::make_unique<hdgnl_config>(
        hdgnl_config{hdgnl::parse_config_text(text, base_dir ? base_dir : "."), {}});
    c->json = hdgnl::config_json(c->config);
    *out = c.release();
  });
}

void hdgnl_config_free(hdgnl_config *config) { delete config; }

const char *hdgnl_config_json(const hdgnl_config *config)
{
  return config ? config->json.c_str() : "";
}

const char *hdgnl_config_scenario(const hdgnl_config *config)
{
  return config ? hdgnl::to_string(config->config.scenario) : "";
}

hdgnl_status hdgnl_run(const hdgnl_config *config, const char *output_dir, int parallelism,
                       hdgnl_result **out)
{
  if (!config)
  {
    return null_argument("config");
  }
  if (out)
  {
    *out = nullptr;
  }
  hdgnl_status status = HDGNL_OK;
  const hdgnl_status guard = guarded([&] {
    hdgnl::RunOptions options;
    options.output_dir = output_dir ? output_dir : "";
    options.parallelism = parallelism;
    auto result = std::make_unique<hdgnl_result>();
    result->outcome = hdgnl::run(config->config, options);
    switch (result->outcome.status)
    {
      case hdgnl::RunStatus::Ok:
        status = HDGNL_OK;
        break;
      case hdgnl::RunStatus::Validation:
        status = HDGNL_ERR_VALIDATION;
        break;
      case hdgnl::RunStatus::Numerical:
        status = HDGNL_ERR_NUMERICAL;
        break;
    }
    last_error = result->outcome.message;
    if (out)
    {
      *out = result.release();
    }
  });
  return guard != HDGNL_OK ? guard : status;
}

void hdgnl_result_free(hdgnl_result *result) { delete result; }

const char *hdgnl_result_message(const hdgnl_result *result)
{
  return result ? result->outcome.message.c_str() : "";
}

const char *hdgnl_result_summary(const hdgnl_result *result)
{
  return result ? result->outcome.summary_json.c_str() : "";
}

size_t hdgnl_result_file_count(const hdgnl_result *result)
{
  return result ? result->outcome.files.size() : 0;
}

const char *hdgnl_result_file(const hdgnl_result *result, size_t index)
{
  if (!result || index >= result->outcome.files.size())
  {
    return nullptr;
  }
  return result->outcome.files[index].c_str();
}

hdgnl_status hdgnl_mesh_load(const char *path, const int *free_space_tags, size_t num_free_space,
                             const int *scatterer_tags, size_t num_scatterer, double scale,
                             hdgnl_mesh **out)
{
  if (!path || !out || (num_free_space && !free_space_tags) || (num_scatterer && !scatterer_tags))
  {
    return null_argument("path, out and nonempty tag arrays");
  }
  *out = nullptr;
  return guarded([&] {
    hdgnl::TagTable tags;
    for (size_t i = 0; i < num_free_space; ++i)
    {
      tags[free_space_tags[i]] = hdgnl::Domain::FreeSpace;
    }
    for (size_t i = 0; i < num_scatterer; ++i)
    {
      tags[scatterer_tags[i]] = hdgnl::Domain::Scatterer;
    }
    if (!(scale > 0.0))
    {
      hdgnl::fail(hdgnl::ErrorKind::Argument, "scale must be positive");
    }
    auto m = std::make_unique<hdgnl_mesh>();
    m->mesh = hdgnl::load_gmsh(path, tags, scale);
    m->stats = hdgnl::format_mesh_stats(hdgnl::mesh_stats(m->mesh, hdgnl::build_skeleton(m->mesh)));
    *out = m.release();
  });
}

void hdgnl_mesh_free(hdgnl_mesh *mesh) { delete mesh; }

const char *hdgnl_mesh_stats(const hdgnl_mesh *mesh) { return mesh ? mesh->stats.c_str() : ""; }

hdgnl_status hdgnl_drude_permittivity(double plasma_frequency, double damping, double omega,
                                      double out[2])
{
  if (!out)
  {
    return null_argument("out");
  }
  return guarded([&] {
    hdgnl::MaterialSpec spec;
    spec.model = hdgnl::MaterialModel::LocalDrude;
    spec.plasma_frequency = plasma_frequency;
    spec.damping = damping;
    const hdgnl::complex eps = hdgnl::drude_permittivity(spec, omega);
    out[0] = eps.real();
    out[1] = eps.imag();
  });
}

hdgnl_status hdgnl_mie_cross_sections(hdgnl_model model, double plasma_frequency, double damping,
                                      double fermi_velocity, double diffusion, double radius,
                                      double omega, double out[3])
{
  if (!out)
  {
    return null_argument("out");
  }
  return guarded([&] {
    hdgnl::MieParams p;
    switch (model)
    {
      case HDGNL_MODEL_LOCAL_DRUDE:
        p.material.model = hdgnl::MaterialModel::LocalDrude;
        break;
      case HDGNL_MODEL_NHD:
        p.material.model = hdgnl::MaterialModel::NHD;
        break;
      case HDGNL_MODEL_GNOR:
        p.material.model = hdgnl::MaterialModel::GNOR;
        break;
      default:
        hdgnl::fail(hdgnl::ErrorKind::Argument, "unknown material model");
    }
    p.material.plasma_frequency = plasma_frequency;
    p.material.damping = damping;
    p.material.fermi_velocity = fermi_velocity;
    p.material.diffusion = diffusion;
    p.radius = radius;
    hdgnl::validate(p.material);
    if (!(radius > 0.0))
    {
      hdgnl::fail(hdgnl::ErrorKind::Validation, "radius must be positive");
    }
    const hdgnl::CrossSections cs = hdgnl::mie_cross_sections(p, omega);
    out[0] = cs.sigma_sca;
    out[1] = cs.sigma_abs;
    out[2] = cs.sigma_ext;
  });
}

}  // extern "C"
