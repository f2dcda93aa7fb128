#ifndef HDGNL_MATERIALS_HPP
#define HDGNL_MATERIALS_HPP

#include <string>

#include "hdgnl/common.hpp"

namespace hdgnl
{

// SI constants (CODATA 2018).
namespace constants
{
inline constexpr double eps0 = 8.8541878128e-12;
inline constexpr double mu0 = 1.25663706212e-6;
inline constexpr double c0 = 299792458.0;
}  // namespace constants

// Free-space impedance sqrt(mu0 / eps0).
double impedance0();

enum class MaterialModel
{
  LocalDrude,
  NHD,
  GNOR
};

const char *to_string(MaterialModel m);
MaterialModel material_model_from_string(const std::string &s);

// Free-electron metal. Units: rad/s, rad/s, m/s, m^2/s. Time convention exp(-i omega t).
struct MaterialSpec
{
  MaterialModel model = MaterialModel::NHD;
  double plasma_frequency = 0.0;
  double damping = 0.0;
  double fermi_velocity = 0.0;
  double diffusion = 0.0;

  // beta^2 = (3/5) v_F^2
  double beta_sq() const { return 0.6 * fermi_velocity * fermi_velocity; }
};

// Throws Error(Validation) naming the offending field.
void validate(const MaterialSpec &spec);

// Per-frequency coefficients in SI units.
struct FrequencyContext
{
  MaterialModel model = MaterialModel::NHD;
  double omega = 0.0;
  double wavenumber = 0.0;     // k = omega / c
  complex effective_beta_sq;   // beta^2 (+ D (gamma - i omega) for GNOR)
  complex hydro_coeff;         // (gamma - i omega) / beta_eff^2
  complex drive_coeff;         // omega_p^2 eps0 / beta_eff^2
  complex local_permittivity;  // 1 - omega_p^2 / (omega^2 + i gamma omega)
  bool hydrodynamic = true;    // false for LocalDrude: hydro/drive coefficients unused
};

FrequencyContext make_frequency_context(const MaterialSpec &spec, double omega);

complex drude_permittivity(const MaterialSpec &spec, double omega);

// Dimensionless coefficients of the discrete system. Lengths are measured in units of
// `length_unit` (meters) and time in length_unit / c; the magnetic field is scaled by
// Z0, the current by length_unit * Z0 and the charge variable by length_unit * c * Z0.
// Under this scaling eps0 = mu0 = c = 1 and every physical parameter is replaced by its
// dimensionless counterpart below.
struct ScaledCoefficients
{
  double omega = 0.0;  // omega * L / c (= k L)
  complex epsilon{1.0, 0.0};
  complex hydro{0.0, 0.0};  // (gamma' - i omega') / beta'^2
  complex drive{0.0, 0.0};  // omega_p'^2 / beta'^2
  bool hydrodynamic = true;
};

ScaledCoefficients scale_coefficients(const FrequencyContext &ctx, double length_unit);

}  // namespace hdgnl

#endif  // HDGNL_MATERIALS_HPP
