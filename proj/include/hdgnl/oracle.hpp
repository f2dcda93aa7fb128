#ifndef HDGNL_ORACLE_HPP
#define HDGNL_ORACLE_HPP

#include <array>
#include <vector>

#include "hdgnl/common.hpp"
#include "hdgnl/cross_sections.hpp"
#include "hdgnl/materials.hpp"

namespace hdgnl
{

// Manufactured cavity solution in scaled units (c = 1, beta = 1, omega = k) on the
// square [0, L]^2 with L = sqrt(2) pi / k.
struct CavityParams
{
  double wavenumber = 1.0;
  double damping = 0.1;           // gamma
  double plasma_frequency = 1.0;  // omega_p
  double side() const { return std::sqrt(2.0) * pi / wavenumber; }
  double omega() const { return wavenumber; }
  complex hydro() const { return complex(damping, -omega()); }
  complex drive() const { return plasma_frequency * plasma_frequency; }
};

struct CavityFields
{
  std::array<complex, 2> e{};
  complex h;
  std::array<complex, 2> j{};
  complex q;
};

// Throws Error(Argument) for a point outside the square (relative slack 1e-9).
CavityFields cavity_exact(const CavityParams &params, Vec2 x);

// Volume sources of the manufactured problem: the Ampere rows see -J^a, the current
// rows (gamma J^a - drive E^a).
struct CavitySources
{
  std::array<complex, 2> ampere{};
  std::array<complex, 2> current{};
};

CavitySources cavity_sources(const CavityParams &params, Vec2 x);

// Nonlocal Mie series for a cylinder of radius r under TM incidence (H along the
// axis) with the hard-wall additional boundary condition. GNOR enters through the
// complex effective beta^2; LocalDrude drops the longitudinal wave.
struct MieParams
{
  double radius = 0.0;  // m
  MaterialSpec material;
  int max_order = 40;
  double tolerance = 1e-12;
};

// Scattering coefficients b_n, n = 0..N, of the scattered field
// H_sca = sum_n i^n b_n H_n(k0 r) e^{i n theta} (b_{-n} = b_n), truncated once the
// terms fall below the tolerance.
std::vector<complex> mie_coefficients(const MieParams &params, double omega);

// Cross sections normalized by 2r. Throws Error(Numerical) if the series has not
// converged at max_order.
CrossSections mie_cross_sections(const MieParams &params, double omega);

}  // namespace hdgnl

#endif  // HDGNL_ORACLE_HPP
