#include "hdgnl/bessel.hpp"

#include <cmath>
#include <limits>

namespace hdgnl
{

namespace
{

// The Hankel expansion is accurate to rounding once |z| well exceeds n^2 / 4; below
// that the backward recurrence is used.
double asymptotic_threshold(int nmax) { return 100.0 + 0.5 * (nmax + 1.0) * (nmax + 1.0); }

void miller(int nmax, complex z, std::vector<complex> &out)
{
  const double az = std::abs(z);
  const int start = std::max(nmax, static_cast<int>(az)) + 60 +
                    static_cast<int>(std::ceil(std::pow(az, 0.4)));
  const int top = start + (start % 2);
  // Weight of J_k in the normalization sum e^{-iz} = J_0 + 2 sum (-i)^k J_k
  // (Im z >= 0) or e^{iz} = J_0 + 2 sum i^k J_k (Im z < 0). Both sums have
  // nonnegative terms for purely imaginary z, avoiding cancellation.
  const complex c = z.imag() >= 0.0 ? complex(0.0, -1.0) : complex(0.0, 1.0);
  std::vector<complex> powc(4);
  powc[0] = 1.0;
  for (int k = 1; k < 4; ++k)
  {
    powc[k] = powc[k - 1] * c;
  }

  out.assign(nmax + 1, 0.0);
  complex fnext = 0.0;
  complex f = 1e-30;
  complex sum = 0.0;
  for (int k = top; k >= 1; --k)
  {
    if (k <= nmax)
    {
      out[k] = f;
    }
    sum += 2.0 * powc[k % 4] * f;
    const complex fprev = (2.0 * k / z) * f - fnext;
    fnext = f;
    f = fprev;
    if (std::abs(f) > 1e250)
    {
      const double s = 1e-250;
      f *= s;
      fnext *= s;
      sum *= s;
      for (int m = k; m <= nmax; ++m)
      {
        out[m] *= s;
      }
    }
  }
  out[0] = f;
  sum += f;
  // Scaled J: e^{-|Im z|} e^{-+ i z} = e^{-+ i Re z}.
  const complex phase = std::exp(c * z.real());
  const complex norm = phase / sum;
  for (auto &v : out)
  {
    v *= norm;
  }
}

// Hankel amplitudes P and Q of order n: J_n = sqrt(2/(pi z)) (P cos chi - Q sin chi),
// Y_n = sqrt(2/(pi z)) (P sin chi + Q cos chi), chi = z - (n/2 + 1/4) pi.
void hankel_pq(int n, complex w, complex &p, complex &q)
{
  const double mu = 4.0 * n * n;
  p = 0.0;
  q = 0.0;
  complex term = 1.0;
  double last = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 200; ++k)
  {
    if (k > 0)
    {
      term *= (mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * w);
    }
    const double size = std::abs(term);
    // Stop at convergence or at the smallest term of the asymptotic series.
    if (size > last)
    {
      break;
    }
    last = size;
    const double sgn = (k / 2) % 2 == 0 ? 1.0 : -1.0;
    if (k % 2 == 0)
    {
      p += sgn * term;
    }
    else
    {
      q += sgn * term;
    }
    if (size < 1e-18)
    {
      break;
    }
  }
}

void hankel_asymptotic(int nmax, complex z, std::vector<complex> &out)
{
  // J_n(-z) = (-1)^n J_n(z) keeps the expansion in the right half-plane.
  const bool flip = z.real() < 0.0;
  const complex w = flip ? -z : z;
  out.assign(nmax + 1, 0.0);
  const complex pre = std::sqrt(2.0 / (pi * w));
  const double ay = std::abs(w.imag());
  for (int n = 0; n <= nmax; ++n)
  {
    complex p, q;
    hankel_pq(n, w, p, q);
    const complex chi = w - (0.5 * n + 0.25) * pi;
    const complex ep = std::exp(I * chi - ay);
    const complex em = std::exp(-I * chi - ay);
    complex v = 0.5 * pre * (ep * (p + I * q) + em * (p - I * q));
    if (flip && n % 2 == 1)
    {
      v = -v;
    }
    out[n] = v;
  }
}

double neumann_start(int n, double x)
{
  if (x <= 30.0)
  {
    return std::cyl_neumann(static_cast<double>(n), x);
  }
  complex p, q;
  hankel_pq(n, complex(x, 0.0), p, q);
  const double chi = x - (0.5 * n + 0.25) * pi;
  return std::sqrt(2.0 / (pi * x)) * (p.real() * std::sin(chi) + q.real() * std::cos(chi));
}

}  // namespace

ScaledBesselJ bessel_j(int nmax, complex z)
{
  if (nmax < 0 || nmax > 200)
  {
    fail(ErrorKind::Argument, "bessel_j: order range 0.." + std::to_string(nmax) +
                                  " not supported");
  }
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
  {
    fail(ErrorKind::Numerical, "bessel_j: non-finite argument");
  }
  ScaledBesselJ r;
  std::vector<complex> v;
  if (std::abs(z) == 0.0)
  {
    v.assign(nmax + 2, 0.0);
    v[0] = 1.0;
    r.value.assign(v.begin(), v.begin() + nmax + 1);
    r.derivative.assign(nmax + 1, 0.0);
    if (nmax >= 1)
    {
      r.derivative[1] = 0.5;
    }
    return r;
  }
  if (std::abs(z) > asymptotic_threshold(nmax + 1))
  {
    hankel_asymptotic(nmax + 1, z, v);
  }
  else
  {
    miller(nmax + 1, z, v);
    if (std::abs(z) > 30.0)
    {
      // The normalization sum loses digits at large |z|; refit the level to the
      // asymptotic J_0 and J_1.
      std::vector<complex> a;
      hankel_asymptotic(1, z, a);
      const complex s = (a[0] * std::conj(v[0]) + a[1] * std::conj(v[1])) /
                        (std::norm(v[0]) + std::norm(v[1]));
      for (auto &x : v)
      {
        x *= s;
      }
    }
  }
  r.value.assign(v.begin(), v.begin() + nmax + 1);
  r.derivative.resize(nmax + 1);
  r.derivative[0] = -v[1];
  for (int n = 1; n <= nmax; ++n)
  {
    r.derivative[n] = v[n - 1] - (static_cast<double>(n) / z) * v[n];
  }
  return r;
}

BesselJY bessel_jy(int nmax, double x)
{
  if (!(x > 0.0))
  {
    fail(ErrorKind::Argument, "bessel_jy: argument must be positive");
  }
  const ScaledBesselJ jc = bessel_j(nmax + 1, complex(x, 0.0));
  BesselJY r;
  r.j.resize(nmax + 1);
  r.dj.resize(nmax + 1);
  for (int n = 0; n <= nmax; ++n)
  {
    r.j[n] = jc.value[n].real();
    r.dj[n] = jc.derivative[n].real();
  }
  std::vector<double> y(nmax + 2);
  y[0] = neumann_start(0, x);
  y[1] = neumann_start(1, x);
  for (int n = 1; n <= nmax; ++n)
  {
    y[n + 1] = (2.0 * n / x) * y[n] - y[n - 1];
  }
  r.y.assign(y.begin(), y.begin() + nmax + 1);
  r.dy.resize(nmax + 1);
  r.dy[0] = -y[1];
  for (int n = 1; n <= nmax; ++n)
  {
    r.dy[n] = y[n - 1] - (n / x) * y[n];
  }
  return r;
}

}  // namespace hdgnl
