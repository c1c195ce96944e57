#pragma once

#include <complex>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace kencl {

using ComplexPoint = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace kencl

namespace kencl::geometry {

/// Constants (a, b) of a relative bound ||T f||^2 <= a ||f||^2 + b ||S f||^2.
class RelBound {
 public:
  /// Largest accepted b; values at or above it are rejected.
  static constexpr double kMaxB = 1.0 - 1e-12;

  RelBound(double a, double b);

  double a() const { return a_; }
  double b() const { return b_; }

 private:
  double a_;
  double b_;
};

struct Interval {
  double lo;
  double hi;
};

/// A closed subset of the real line: finitely many intervals plus isolated points.
/// Always stored normalized (sorted, overlaps merged, points inside intervals dropped).
class SpectrumModel {
 public:
  SpectrumModel() = default;
  SpectrumModel(std::vector<Interval> intervals, std::vector<double> points);

  static SpectrumModel interval(double lo, double hi);
  static SpectrumModel real_line();
  static SpectrumModel from_points(std::vector<double> points);

  const std::vector<Interval>& intervals() const { return intervals_; }
  const std::vector<double>& points() const { return points_; }

  bool empty() const { return intervals_.empty() && points_.empty(); }
  bool bounded() const;
  bool contains(double x) const;
  bool contains(ComplexPoint z) const { return z.imag() == 0.0 && contains(z.real()); }
  /// True when the set is invariant under x -> -x.
  bool symmetric() const;
  double lower() const;
  double upper() const;

 private:
  std::vector<Interval> intervals_;
  std::vector<double> points_;
};

/// Union of closed disks B_r(t), t in centers, r(t)^2 = radius_scale * (a + b t^2).
class DiskFamilyRegion {
 public:
  DiskFamilyRegion(RelBound bound, SpectrumModel centers, double radius_scale = 1.0);

  const RelBound& bound() const { return bound_; }
  const SpectrumModel& centers() const { return centers_; }
  double radius_scale() const { return scale_; }
  double radius(double t) const;

 private:
  RelBound bound_;
  SpectrumModel centers_;
  double scale_;
};

enum class PhiBranch { b_zero, re_nonzero, re_zero_min, re_zero_max, constant };

std::string to_string(PhiBranch branch);

/// Critical points of phi_lambda(t) = (a + b t^2) / |t - lambda|^2 over the real line.
struct PhiProfile {
  std::optional<double> m_lambda;
  std::optional<double> t_max;
  std::optional<double> t_min;
  double sup_over_reals = 0.0;
  PhiBranch branch = PhiBranch::b_zero;
};

struct Membership {
  bool inside = false;
  /// min over centers of |lambda - t| - r(t); <= 0 exactly when inside.
  double margin = 0.0;
};

/// Closed rectangle |Re| <= re_half_width, |Im| <= im_half_height.
struct SLBox {
  double im_half_height = 0.0;
  double re_half_width = 0.0;

  bool contains(ComplexPoint z, double slack = 0.0) const;
  /// Signed distance-like margin: max(|Re| - w, |Im| - h); <= 0 inside.
  double margin(ComplexPoint z) const;
};

double phi(const RelBound& bound, ComplexPoint lambda, double t);

PhiProfile phi_extrema(const RelBound& bound, ComplexPoint lambda);

/// sup over t in the spectrum of sqrt(a + b t^2) / |t - lambda|, in closed form.
double sup_resolvent_factor_bound(const RelBound& bound, const SpectrumModel& spectrum,
                                  ComplexPoint lambda);

Membership disk_region_membership(const DiskFamilyRegion& region, ComplexPoint lambda);

/// Decision only, without the margin minimization.
bool disk_region_contains(const DiskFamilyRegion& region, ComplexPoint lambda);

/// (Im lambda)^2 <= a + b/(1-b) (Re lambda)^2.
bool hull_membership(const RelBound& bound, ComplexPoint lambda);

/// The older, coarser hull (Im lambda)^2 <= (a + b (Re lambda)^2) / (1 - b).
bool coarse_hull_membership(const RelBound& bound, ComplexPoint lambda);

/// Upper boundary height of the hull at abscissa x.
double hull_height(const RelBound& bound, double x);
double coarse_hull_height(const RelBound& bound, double x);

/// Abscissa where the disk centered at t0 touches the hull boundary.
double hull_tangency(const RelBound& bound, double t0);

/// Modulus beyond which ||T (S - lambda)^{-1}||^2 <= b for spectra bounded by gamma.
double factor_norm_threshold(const RelBound& bound, double gamma);

struct PerturbationRegions {
  double gamma = 0.0;
  DiskFamilyRegion worse;
  std::optional<DiskFamilyRegion> better;
};

/// Regions outside of which A0 + V is J-non-negative; requires v < 0 and tau >= 1.
PerturbationRegions perturbation_regions(double a, double b, double tau, double v);

/// Largest y with x + iy in the region, or nullopt when the vertical line misses it.
std::optional<double> section_height(const DiskFamilyRegion& region, double x);

/// Real extent [xmin, xmax] of a region with bounded centers.
Interval real_extent(const DiskFamilyRegion& region);

/// Area of a region with bounded centers.
double region_area(const DiskFamilyRegion& region);

/// Upper-half boundary samples. For disk families the height at each abscissa is found
/// by bisection on the margin. `window` sets the abscissa range for unbounded regions.
std::vector<ComplexPoint> boundary_polyline(const DiskFamilyRegion& region, int resolution,
                                            std::optional<Interval> window = std::nullopt);
std::vector<ComplexPoint> boundary_polyline(const SLBox& box, int resolution);
std::vector<ComplexPoint> hull_boundary_polyline(const RelBound& bound, int resolution,
                                                 Interval window);
std::vector<ComplexPoint> coarse_hull_boundary_polyline(const RelBound& bound, int resolution,
                                                        Interval window);

}  // namespace kencl::geometry
