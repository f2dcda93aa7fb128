#include "hdgnl/materials.hpp"

namespace hdgnl
{

double impedance0() { return std::sqrt(constants::mu0 / constants::eps0); }

const char *to_string(MaterialModel m)
{
  switch (m)
  {
    case MaterialModel::LocalDrude:
      return "LocalDrude";
    case MaterialModel::NHD:
      return "NHD";
    case MaterialModel::GNOR:
      return "GNOR";
  }
  return "?";
}

MaterialModel material_model_from_string(const std::string &s)
{
  if (s == "LocalDrude" || s == "local")
  {
    return MaterialModel::LocalDrude;
  }
  if (s == "NHD")
  {
    return MaterialModel::NHD;
  }
  if (s == "GNOR")
  {
    return MaterialModel::GNOR;
  }
  fail(ErrorKind::Validation, "material.model: unknown model '" + s + "'");
}

void validate(const MaterialSpec &spec)
{
  if (!(spec.plasma_frequency > 0.0))
  {
    fail(ErrorKind::Validation, "material.plasma_frequency must be > 0");
  }
  if (!(spec.damping >= 0.0))
  {
    fail(ErrorKind::Validation, "material.damping must be >= 0");
  }
  if (!(spec.fermi_velocity > 0.0))
  {
    fail(ErrorKind::Validation, "material.fermi_velocity must be > 0");
  }
  if (!(spec.diffusion >= 0.0))
  {
    fail(ErrorKind::Validation, "material.diffusion must be >= 0");
  }
  if (spec.model != MaterialModel::GNOR && spec.diffusion != 0.0)
  {
    fail(ErrorKind::Validation, "material.diffusion is only used by the GNOR model");
  }
}

complex drude_permittivity(const MaterialSpec &spec, double omega)
{
  if (!(omega > 0.0))
  {
    fail(ErrorKind::Argument, "drude_permittivity: omega must be > 0");
  }
  const double wp2 = spec.plasma_frequency * spec.plasma_frequency;
  // Im(eps) = wp^2 gamma omega / |omega^2 + i gamma omega|^2 >= 0 for gamma >= 0.
  return 1.0 - wp2 / complex(omega * omega, spec.damping * omega);
}

FrequencyContext make_frequency_context(const MaterialSpec &spec, double omega)
{
  if (!(omega > 0.0))
  {
    fail(ErrorKind::Argument, "frequency context: omega must be > 0");
  }
  FrequencyContext ctx;
  ctx.model = spec.model;
  ctx.omega = omega;
  ctx.wavenumber = omega / constants::c0;
  ctx.local_permittivity = drude_permittivity(spec, omega);
  ctx.hydrodynamic = spec.model != MaterialModel::LocalDrude;
  complex beta_sq = spec.beta_sq();
  if (spec.model == MaterialModel::GNOR)
  {
    beta_sq += spec.diffusion * complex(spec.damping, -omega);
  }
  ctx.effective_beta_sq = beta_sq;
  ctx.hydro_coeff = complex(spec.damping, -omega) / beta_sq;
  ctx.drive_coeff = spec.plasma_frequency * spec.plasma_frequency * constants::eps0 / beta_sq;
  return ctx;
}

ScaledCoefficients scale_coefficients(const FrequencyContext &ctx, double length_unit)
{
  ScaledCoefficients s;
  s.omega = ctx.omega * length_unit / constants::c0;
  s.hydrodynamic = ctx.hydrodynamic;
  if (ctx.hydrodynamic)
  {
    s.hydro = ctx.hydro_coeff * (length_unit * constants::c0);
    s.drive = ctx.drive_coeff * (length_unit * length_unit / constants::eps0);
  }
  else
  {
    s.epsilon = ctx.local_permittivity;
  }
  return s;
}

}  // namespace hdgnl
