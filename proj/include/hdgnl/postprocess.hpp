#ifndef HDGNL_POSTPROCESS_HPP
#define HDGNL_POSTPROCESS_HPP

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "hdgnl/cross_sections.hpp"
#include "hdgnl/hdg.hpp"

namespace hdgnl
{

// Point location by walking through element adjacency from a start element, with a
// brute-force scan as fallback. Points on shared edges or vertices resolve to the
// lowest element id containing them.
class PointLocator
{
public:
  explicit PointLocator(const Discretization &disc);

  // Returns the element containing x and its reference coordinates, or -1.
  int locate(Vec2 x, Vec2 &ref, int start = 0) const;

private:
  bool contains(int element, Vec2 x, Vec2 &ref) const;
  int walk(Vec2 x, int start) const;

  const Discretization &disc_;
  std::vector<ElementShape> shapes_;
  std::vector<std::array<int, 3>> neighbors_;  // across local edge k, or -1
  std::vector<std::vector<int>> node_elements_;
};

// Scattered fields E_sca = E - E_inc, H_sca = H - H_inc at a point (J and q are left
// at their total values). Throws Error(Argument) for a point outside the mesh.
PointFields scattered_field(const Discretization &disc, const FieldSolution &sol,
                            const PointLocator &locator, const Incidence &inc, Vec2 x);

enum class ContourShape
{
  Circle,
  Rectangle
};

struct ContourSpec
{
  ContourShape shape = ContourShape::Circle;
  Vec2 center;         // circle
  double radius = 0.0;  // circle
  Vec2 lower, upper;    // rectangle corners
  int density = 0;      // Gauss points per segment; 0 selects 2(p+1)
};

// Sample points of a contour: the contour is split where it crosses mesh edges and
// every piece gets `density` Gauss points.
struct ContourSample
{
  Vec2 point;
  Vec2 normal;    // unit outward
  double weight;  // arc-length weight
  int element;
  Vec2 ref;
};

// Throws Error(Validation) if the contour leaves the mesh, crosses a scatterer or
// curved element, or the density is below 2.
std::vector<ContourSample> contour_samples(const Discretization &disc, const PointLocator &locator,
                                           const ContourSpec &contour);

// sigma_sca = Re oint (E_sca x conj H_sca) . n / (|A|^2 N) and
// sigma_abs = -Re oint (E x conj H) . n / (|A|^2 N) with N the normalization length
// (scaled units); sigma_ext is their sum. `omega` is stored as given.
CrossSections cross_sections(const Discretization &disc, const FieldSolution &sol,
                             const PointLocator &locator, const ContourSpec &contour,
                             const Incidence &inc, double normalization_length, double omega);

// sqrt(oint |H_sca|^2 + |E_sca|^2) / sqrt(oint |H_inc|^2 + |E_inc|^2) along the contour.
double scattered_contour_norm(const Discretization &disc, const FieldSolution &sol,
                              const PointLocator &locator, const ContourSpec &contour,
                              const Incidence &inc);

enum class FieldPart
{
  Full,
  Real,
  Imag
};

struct FieldParts
{
  FieldPart e = FieldPart::Full;
  FieldPart h = FieldPart::Full;
  FieldPart j = FieldPart::Full;
  FieldPart q = FieldPart::Full;
};

struct FieldErrors
{
  double e = 0.0;
  double h = 0.0;
  double j = 0.0;  // 0 for solutions without current
  double q = 0.0;
};

using FieldEvaluator = std::function<PointFields(Vec2)>;

// L2 norms of analytic - discrete over all elements (the selected part of each
// difference), quadrature order 2p+2.
FieldErrors l2_error(const Discretization &disc, const FieldSolution &sol,
                     const FieldEvaluator &analytic, const FieldParts &parts = {});

// log(e2/e1)/log(h2/h1) per consecutive pair. Throws Error(Argument) for fewer than two
// entries or h not strictly decreasing.
std::vector<double> convergence_orders(const std::vector<std::pair<double, double>> &errors);

// Strict local maxima of a sampled curve (interior samples only) with their topographic
// prominence: height above the higher of the two lowest points separating the peak
// from a taller sample (or the curve end) on each side.
struct Peak
{
  int index = 0;
  double x = 0.0;
  double value = 0.0;
  double prominence = 0.0;
};

std::vector<Peak> find_peaks(const std::vector<double> &x, const std::vector<double> &y);

// Legacy ASCII VTK unstructured grid: every element is split into p^2 triangles on its
// nodal lattice (points are per element, so discontinuities show). Point data: real
// and imaginary parts of Ex, Ey, H, Jx, Jy, q and |E|.
std::string to_vtk(const Discretization &disc, const FieldSolution &sol, const std::string &title);
void export_vtk(const Discretization &disc, const FieldSolution &sol, const std::string &title,
                const std::string &path);

// CSV with header omega,omega_over_wp,sigma_sca,sigma_abs,sigma_ext and 17 significant
// digits. Throws Error(Argument) for empty or unsorted results.
std::string sweep_csv(const std::vector<CrossSections> &results, double plasma_frequency);
void export_sweep(const std::vector<CrossSections> &results, double plasma_frequency,
                  const std::string &path);
// Inverse of sweep_csv; throws Error(Parse) naming the line.
std::vector<CrossSections> parse_sweep_csv(const std::string &text);

}  // namespace hdgnl

#endif  // HDGNL_POSTPROCESS_HPP
