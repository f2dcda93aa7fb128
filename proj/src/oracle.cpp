#include "hdgnl/oracle.hpp"

#include "hdgnl/bessel.hpp"

namespace hdgnl
{

CavityFields cavity_exact(const CavityParams &params, Vec2 x)
{
  const double l = params.side();
  const double slack = 1e-9 * l;
  if (x.x < -slack || x.y < -slack || x.x > l + slack || x.y > l + slack)
  {
    fail(ErrorKind::Argument, "cavity_exact: point outside the cavity");
  }
  const double a = params.wavenumber / std::sqrt(2.0);
  const double cx = std::cos(a * x.x), sx = std::sin(a * x.x);
  const double cy = std::cos(a * x.y), sy = std::sin(a * x.y);
  const double s2 = std::sqrt(2.0) / 2.0;
  CavityFields f;
  f.e = {s2 * I * (-cx * sy), s2 * I * (sx * cy)};
  f.h = cx * cy;
  f.j = {-s2 * sx * cy, -s2 * cx * sy};
  // q = div J / (i omega) = -k cos cos / (i k).
  f.q = I * cx * cy;
  return f;
}

CavitySources cavity_sources(const CavityParams &params, Vec2 x)
{
  const CavityFields f = cavity_exact(params, x);
  CavitySources s;
  const complex d = params.drive();
  for (int c = 0; c < 2; ++c)
  {
    s.ampere[c] = -f.j[c];
    s.current[c] = params.damping * f.j[c] - d * f.e[c];
  }
  return s;
}

std::vector<complex> mie_coefficients(const MieParams &params, double omega)
{
  validate(params.material);
  if (!(params.radius > 0.0))
  {
    fail(ErrorKind::Argument, "mie: radius must be positive");
  }
  const FrequencyContext ctx = make_frequency_context(params.material, omega);
  const double a = params.radius;
  const double k0 = ctx.wavenumber;
  const complex eps_t = ctx.local_permittivity;
  const complex k_t = k0 * std::sqrt(eps_t);
  const bool nonlocal = ctx.hydrodynamic;
  const double wp = params.material.plasma_frequency;
  const complex k_l =
      nonlocal ? std::sqrt((omega * complex(omega, params.material.damping) - wp * wp) /
                           ctx.effective_beta_sq)
               : complex(0.0);

  const int nmax = params.max_order;
  const BesselJY out = bessel_jy(nmax, k0 * a);
  const ScaledBesselJ in_t = bessel_j(nmax, k_t * a);
  ScaledBesselJ in_l;
  if (nonlocal)
  {
    in_l = bessel_j(nmax, k_l * a);
  }

  std::vector<complex> b;
  double largest = 0.0;
  int small_run = 0;
  for (int n = 0; n <= nmax; ++n)
  {
    complex r = (k_t / eps_t) * in_t.derivative[n] / in_t.value[n];
    if (nonlocal && n > 0)
    {
      r += (eps_t - 1.0) * static_cast<double>(n * n) * in_l.value[n] /
           (eps_t * a * a * k_l * in_l.derivative[n]);
    }
    const complex h(out.j[n], out.y[n]);
    const complex dh(out.dj[n], out.dy[n]);
    const complex bn = (r * out.j[n] - k0 * out.dj[n]) / (k0 * dh - r * h);
    if (!std::isfinite(bn.real()) || !std::isfinite(bn.imag()))
    {
      fail(ErrorKind::Numerical, "mie: non-finite coefficient at order " + std::to_string(n));
    }
    b.push_back(bn);
    largest = std::max(largest, std::abs(bn));
    small_run = std::abs(bn) <= params.tolerance * largest ? small_run + 1 : 0;
    if (small_run >= 2)
    {
      return b;
    }
  }
  fail(ErrorKind::Numerical, "mie: series not converged at order " + std::to_string(nmax));
}

CrossSections mie_cross_sections(const MieParams &params, double omega)
{
  const std::vector<complex> b = mie_coefficients(params, omega);
  const double k0 = omega / constants::c0;
  double sca = 0.0, ext = 0.0;
  for (std::size_t n = 0; n < b.size(); ++n)
  {
    const double w = n == 0 ? 1.0 : 2.0;
    sca += w * std::norm(b[n]);
    ext -= w * b[n].real();
  }
  CrossSections cs;
  cs.omega = omega;
  const double scale = 4.0 / k0 / (2.0 * params.radius);
  cs.sigma_sca = scale * sca;
  cs.sigma_abs = scale * (ext - sca);
  cs.sigma_ext = cs.sigma_sca + cs.sigma_abs;
  return cs;
}

}  // namespace hdgnl
