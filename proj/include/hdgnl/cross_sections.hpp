#ifndef HDGNL_CROSS_SECTIONS_HPP
#define HDGNL_CROSS_SECTIONS_HPP

namespace hdgnl
{

// Per-unit-length cross sections divided by the normalization length (2r for a
// single wire). sigma_ext is always formed as sigma_sca + sigma_abs.
struct CrossSections
{
  double omega = 0.0;
  double sigma_sca = 0.0;
  double sigma_abs = 0.0;
  double sigma_ext = 0.0;
};

}  // namespace hdgnl

#endif  // HDGNL_CROSS_SECTIONS_HPP
