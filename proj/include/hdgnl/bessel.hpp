#ifndef HDGNL_BESSEL_HPP
#define HDGNL_BESSEL_HPP

#include <vector>

#include "hdgnl/common.hpp"

namespace hdgnl
{

// Exponentially scaled Bessel functions of the first kind, J_n(z) e^{-|Im z|}, and
// their derivatives for n = 0..nmax.
struct ScaledBesselJ
{
  std::vector<complex> value;
  std::vector<complex> derivative;
};

// Backward (Miller) recurrence normalized by the Jacobi-Anger sum for moderate |z|,
// Hankel asymptotic expansion for |z| large compared with nmax^2. Throws
// Error(Argument) for nmax < 0 or nmax > 200.
ScaledBesselJ bessel_j(int nmax, complex z);

struct BesselJY
{
  std::vector<double> j, dj, y, dy;
};

// J_n, Y_n and derivatives for real x > 0 and n = 0..nmax. Y is built by upward
// recurrence from Y_0 and Y_1 (standard library below x = 30, Hankel expansion above).
BesselJY bessel_jy(int nmax, double x);

}  // namespace hdgnl

#endif  // HDGNL_BESSEL_HPP
