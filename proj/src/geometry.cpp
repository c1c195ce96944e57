#include "kencl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

namespace kencl::geometry {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be finite");
}

// Real roots of c2 t^2 + c1 t + c0 = 0, computed without cancellation.
std::vector<double> real_roots(double c2, double c1, double c0) {
  std::vector<double> roots;
  if (c2 == 0.0) {
    if (c1 != 0.0) roots.push_back(-c0 / c1);
    return roots;
  }
  double disc = c1 * c1 - 4.0 * c2 * c0;
  if (disc < 0.0) return roots;
  double q = -0.5 * (c1 + std::copysign(std::sqrt(disc), c1));
  if (q != 0.0) {
    roots.push_back(q / c2);
    roots.push_back(c0 / q);
  } else {
    roots.push_back(0.0);
  }
  return roots;
}

// |lambda - t|^2 - s (a + b t^2), written to keep the distance term accurate.
double g_value(const DiskFamilyRegion& r, ComplexPoint lambda, double t) {
  double dx = t - lambda.real();
  double y = lambda.imag();
  return dx * dx + y * y - r.radius_scale() * (r.bound().a() + r.bound().b() * t * t);
}

double h_value(const DiskFamilyRegion& r, ComplexPoint lambda, double t) {
  return std::hypot(t - lambda.real(), lambda.imag()) - r.radius(t);
}

// Minimizer of g on [lo, hi] (finite or not) and the minimum value.
std::pair<double, double> g_min_on(const DiskFamilyRegion& r, ComplexPoint lambda, double lo,
                                   double hi) {
  double kappa = 1.0 - r.radius_scale() * r.bound().b();
  if (kappa > 0.0) {
    double t = std::clamp(lambda.real() / kappa, lo, hi);
    return {t, g_value(r, lambda, t)};
  }
  // concave or linear: the minimum sits at an endpoint (intervals are bounded here)
  double glo = g_value(r, lambda, lo);
  double ghi = g_value(r, lambda, hi);
  return glo <= ghi ? std::pair{lo, glo} : std::pair{hi, ghi};
}

template <class F>
double minimize_on(F f, double lo, double hi, std::vector<double> seeds) {
  constexpr int kSamples = 64;
  std::vector<double> ts;
  ts.reserve(kSamples + 1 + seeds.size());
  for (int i = 0; i <= kSamples; ++i) ts.push_back(lo + (hi - lo) * i / kSamples);
  for (double s : seeds)
    if (s >= lo && s <= hi) ts.push_back(s);
  std::sort(ts.begin(), ts.end());
  ts.erase(std::unique(ts.begin(), ts.end()), ts.end());
  std::size_t best = 0;
  double fbest = f(ts[0]);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    double v = f(ts[i]);
    if (v < fbest) {
      fbest = v;
      best = i;
    }
  }
  double a = ts[best > 0 ? best - 1 : 0];
  double b = ts[std::min(best + 1, ts.size() - 1)];
  if (b > a) {
    boost::uintmax_t iters = 200;
    auto [t, v] = boost::math::tools::brent_find_minima(f, a, b, 52, iters);
    (void)t;
    fbest = std::min(fbest, v);
  }
  return fbest;
}

}  // namespace

RelBound::RelBound(double a, double b) : a_(a), b_(b) {
  require_finite(a, "a");
  require_finite(b, "b");
  if (a < 0.0) throw std::invalid_argument("relative bound requires a >= 0");
  if (b < 0.0) throw std::invalid_argument("relative bound requires b >= 0");
  if (b >= kMaxB) throw std::invalid_argument("relative bound requires b < 1");
}

SpectrumModel::SpectrumModel(std::vector<Interval> intervals, std::vector<double> points) {
  std::vector<Interval> ivs;
  for (const auto& iv : intervals) {
    if (std::isnan(iv.lo) || std::isnan(iv.hi)) throw std::invalid_argument("NaN interval endpoint");
    if (iv.lo > iv.hi) throw std::invalid_argument("interval with lo > hi");
    if (iv.lo == iv.hi) {
      if (!std::isfinite(iv.lo)) throw std::invalid_argument("infinite point");
      points.push_back(iv.lo);
    } else {
      ivs.push_back(iv);
    }
  }
  std::sort(ivs.begin(), ivs.end(), [](const Interval& x, const Interval& y) { return x.lo < y.lo; });
  for (const auto& iv : ivs) {
    if (!intervals_.empty() && iv.lo <= intervals_.back().hi)
      intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
    else
      intervals_.push_back(iv);
  }
  for (double p : points) require_finite(p, "spectral point");
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  for (double p : points) {
    bool covered = std::any_of(intervals_.begin(), intervals_.end(),
                               [p](const Interval& iv) { return iv.lo <= p && p <= iv.hi; });
    if (!covered) points_.push_back(p);
  }
}

SpectrumModel SpectrumModel::interval(double lo, double hi) { return SpectrumModel({{lo, hi}}, {}); }

SpectrumModel SpectrumModel::real_line() { return interval(-kInf, kInf); }

SpectrumModel SpectrumModel::from_points(std::vector<double> points) {
  return SpectrumModel({}, std::move(points));
}

bool SpectrumModel::bounded() const {
  return std::all_of(intervals_.begin(), intervals_.end(), [](const Interval& iv) {
    return std::isfinite(iv.lo) && std::isfinite(iv.hi);
  });
}

bool SpectrumModel::contains(double x) const {
  for (const auto& iv : intervals_)
    if (iv.lo <= x && x <= iv.hi) return true;
  return std::binary_search(points_.begin(), points_.end(), x);
}

bool SpectrumModel::symmetric() const {
  std::vector<Interval> mirrored;
  for (auto it = intervals_.rbegin(); it != intervals_.rend(); ++it) mirrored.push_back({-it->hi, -it->lo});
  std::vector<double> mp;
  for (auto it = points_.rbegin(); it != points_.rend(); ++it) mp.push_back(-*it);
  if (mp != points_ || mirrored.size() != intervals_.size()) return false;
  for (std::size_t i = 0; i < mirrored.size(); ++i)
    if (mirrored[i].lo != intervals_[i].lo || mirrored[i].hi != intervals_[i].hi) return false;
  return true;
}

double SpectrumModel::lower() const {
  if (empty()) throw std::domain_error("empty spectrum has no lower bound");
  double v = kInf;
  if (!intervals_.empty()) v = intervals_.front().lo;
  if (!points_.empty()) v = std::min(v, points_.front());
  return v;
}

double SpectrumModel::upper() const {
  if (empty()) throw std::domain_error("empty spectrum has no upper bound");
  double v = -kInf;
  if (!intervals_.empty()) v = intervals_.back().hi;
  if (!points_.empty()) v = std::max(v, points_.back());
  return v;
}

DiskFamilyRegion::DiskFamilyRegion(RelBound bound, SpectrumModel centers, double radius_scale)
    : bound_(bound), centers_(std::move(centers)), scale_(radius_scale) {
  if (!(radius_scale > 0.0) || !std::isfinite(radius_scale))
    throw std::invalid_argument("radius scale must be positive and finite");
  if (!centers_.bounded() && radius_scale * bound_.b() >= 1.0)
    throw std::invalid_argument("radius_scale * b must be < 1 for unbounded centers");
}

double DiskFamilyRegion::radius(double t) const {
  return std::sqrt(scale_ * (bound_.a() + bound_.b() * t * t));
}

std::string to_string(PhiBranch branch) {
  switch (branch) {
    case PhiBranch::b_zero: return "b-zero";
    case PhiBranch::re_nonzero: return "re-nonzero";
    case PhiBranch::re_zero_min: return "re-zero-min";
    case PhiBranch::re_zero_max: return "re-zero-max";
    case PhiBranch::constant: return "constant";
  }
  return "unknown";
}

bool SLBox::contains(ComplexPoint z, double slack) const {
  return std::abs(z.real()) <= re_half_width + slack && std::abs(z.imag()) <= im_half_height + slack;
}

double SLBox::margin(ComplexPoint z) const {
  return std::max(std::abs(z.real()) - re_half_width, std::abs(z.imag()) - im_half_height);
}

double phi(const RelBound& bound, ComplexPoint lambda, double t) {
  double dx = t - lambda.real();
  double den = dx * dx + lambda.imag() * lambda.imag();
  if (den == 0.0) throw std::domain_error("phi: t coincides with lambda");
  return (bound.a() + bound.b() * t * t) / den;
}

PhiProfile phi_extrema(const RelBound& bound, ComplexPoint lambda) {
  const double a = bound.a(), b = bound.b();
  const double x = lambda.real(), y = lambda.imag();
  if (y == 0.0) throw std::domain_error("phi_extrema requires Im lambda != 0");
  PhiProfile p;
  if (b == 0.0) {
    p.branch = PhiBranch::b_zero;
    p.t_max = x;
    p.sup_over_reals = a / (y * y);
    return p;
  }
  if (x != 0.0) {
    p.branch = PhiBranch::re_nonzero;
    double m = (b * std::norm(lambda) - a) / (2.0 * b * x);
    double root = std::sqrt(a / b + m * m);
    double sgn = x > 0.0 ? 1.0 : -1.0;
    double tmax, tmin;
    if (m == 0.0) {
      tmax = sgn * root;
      tmin = -sgn * root;
    } else {
      // larger-magnitude root directly, the other through the product -a/b
      double big = m + std::copysign(root, m);
      double small = (-a / b) / big;
      bool big_is_max = (m > 0.0) == (x > 0.0);
      tmax = big_is_max ? big : small;
      tmin = big_is_max ? small : big;
    }
    p.m_lambda = m;
    p.t_max = tmax;
    p.t_min = tmin;
    p.sup_over_reals = phi(bound, lambda, tmax);
    return p;
  }
  double y2 = y * y, ab = a / b;
  if (y2 > ab) {
    p.branch = PhiBranch::re_zero_min;
    p.t_min = 0.0;
    p.sup_over_reals = b;
  } else if (y2 < ab) {
    p.branch = PhiBranch::re_zero_max;
    p.t_max = 0.0;
    p.sup_over_reals = a / y2;
  } else {
    p.branch = PhiBranch::constant;
    p.sup_over_reals = b;
  }
  return p;
}

double sup_resolvent_factor_bound(const RelBound& bound, const SpectrumModel& spectrum,
                                  ComplexPoint lambda) {
  if (spectrum.contains(lambda)) throw std::domain_error("lambda lies in the spectrum");
  const double a = bound.a(), b = bound.b(), x = lambda.real();
  // stationary points of phi solve b x t^2 - (b|lambda|^2 - a) t - a x = 0
  std::vector<double> crit = real_roots(b * x, -(b * std::norm(lambda) - a), -a * x);
  double sup = 0.0;
  auto consider = [&](double t) { sup = std::max(sup, phi(bound, lambda, t)); };
  for (const auto& iv : spectrum.intervals()) {
    if (std::isfinite(iv.lo)) consider(iv.lo); else sup = std::max(sup, b);
    if (std::isfinite(iv.hi)) consider(iv.hi); else sup = std::max(sup, b);
    for (double t : crit)
      if (t > iv.lo && t < iv.hi && !(lambda.imag() == 0.0 && t == x)) consider(t);
  }
  for (double t : spectrum.points()) consider(t);
  return std::sqrt(sup);
}

bool disk_region_contains(const DiskFamilyRegion& region, ComplexPoint lambda) {
  for (const auto& iv : region.centers().intervals())
    if (g_min_on(region, lambda, iv.lo, iv.hi).second <= 0.0) return true;
  for (double t : region.centers().points())
    if (g_value(region, lambda, t) <= 0.0) return true;
  return false;
}

Membership disk_region_membership(const DiskFamilyRegion& region, ComplexPoint lambda) {
  Membership m;
  m.inside = disk_region_contains(region, lambda);
  double margin = kInf;
  const double s = region.radius_scale();
  const double sa = s * region.bound().a(), sb = s * region.bound().b();
  auto h = [&](double t) { return h_value(region, lambda, t); };
  for (const auto& iv : region.centers().intervals()) {
    double tstar = g_min_on(region, lambda, iv.lo, iv.hi).first;
    double h0 = h(tstar);
    double lo = iv.lo, hi = iv.hi;
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
      // h(t) >= (1 - sqrt(sb)) |t| - |lambda| - sqrt(sa), so minima lie inside this window
      double w = (std::max(h0, 0.0) + std::abs(lambda) + std::sqrt(sa)) / (1.0 - std::sqrt(sb));
      lo = std::max(lo, -w);
      hi = std::min(hi, w);
    }
    double clamped_re = std::clamp(lambda.real(), lo, hi);
    double v = (hi > lo) ? minimize_on(h, lo, hi, {tstar, clamped_re, lo, hi}) : h(lo);
    margin = std::min({margin, v, h0});
  }
  for (double t : region.centers().points()) margin = std::min(margin, h(t));
  if (m.inside)
    margin = std::min(margin, 0.0);
  else if (margin <= 0.0)
    margin = std::nextafter(0.0, 1.0);
  m.margin = margin;
  return m;
}

bool hull_membership(const RelBound& bound, ComplexPoint lambda) {
  double y = lambda.imag(), x = lambda.real();
  return y * y <= bound.a() + bound.b() / (1.0 - bound.b()) * x * x;
}

bool coarse_hull_membership(const RelBound& bound, ComplexPoint lambda) {
  double y = lambda.imag(), x = lambda.real();
  return y * y <= (bound.a() + bound.b() * x * x) / (1.0 - bound.b());
}

double hull_height(const RelBound& bound, double x) {
  return std::sqrt(bound.a() + bound.b() / (1.0 - bound.b()) * x * x);
}

double coarse_hull_height(const RelBound& bound, double x) {
  return std::sqrt((bound.a() + bound.b() * x * x) / (1.0 - bound.b()));
}

double hull_tangency(const RelBound& bound, double t0) { return (1.0 - bound.b()) * t0; }

double factor_norm_threshold(const RelBound& bound, double gamma) {
  if (bound.b() <= 0.0) throw std::invalid_argument("threshold undefined for b = 0");
  require_finite(gamma, "gamma");
  return gamma + std::sqrt(gamma * gamma + bound.a() / bound.b());
}

PerturbationRegions perturbation_regions(double a, double b, double tau, double v) {
  if (!(tau >= 1.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be >= 1");
  if (!(v < 0.0)) throw std::invalid_argument("regions are defined only for v < 0");
  RelBound bound(a, b);
  double gamma = std::min(std::sqrt((1.0 + tau) * a / (2.0 * tau)), -(1.0 + tau) * v / 2.0);
  PerturbationRegions r{gamma, DiskFamilyRegion(bound, SpectrumModel::interval(-gamma, gamma)),
                        std::nullopt};
  if (b < (tau - 1.0) / (2.0 * tau))
    r.better.emplace(bound, SpectrumModel::interval(-gamma, gamma),
                     (1.0 + tau) / (2.0 * tau * (1.0 - b)));
  return r;
}

std::optional<double> section_height(const DiskFamilyRegion& region, double x) {
  const ComplexPoint on_axis(x, 0.0);
  double best = -kInf;
  for (const auto& iv : region.centers().intervals())
    best = std::max(best, -g_min_on(region, on_axis, iv.lo, iv.hi).second);
  for (double t : region.centers().points()) best = std::max(best, -g_value(region, on_axis, t));
  if (best < 0.0) return std::nullopt;
  return std::sqrt(best);
}

Interval real_extent(const DiskFamilyRegion& region) {
  const auto& c = region.centers();
  if (c.empty()) throw std::domain_error("empty region has no extent");
  if (!c.bounded()) return {-kInf, kInf};
  double lo = kInf, hi = -kInf;
  auto consider = [&](double t) {
    lo = std::min(lo, t - region.radius(t));
    hi = std::max(hi, t + region.radius(t));
  };
  for (const auto& iv : c.intervals()) {
    consider(iv.lo);
    consider(iv.hi);
  }
  for (double t : c.points()) consider(t);
  return {lo, hi};
}

double region_area(const DiskFamilyRegion& region) {
  if (region.centers().empty()) return 0.0;
  if (!region.centers().bounded()) return kInf;
  Interval ext = real_extent(region);
  if (!(ext.hi > ext.lo)) return 0.0;
  auto height = [&](double x) { return section_height(region, x).value_or(0.0); };
  double err = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(height, ext.lo, ext.hi,
                                                                           15, 1e-10, &err);
  return 2.0 * v;
}

std::vector<ComplexPoint> boundary_polyline(const DiskFamilyRegion& region, int resolution,
                                            std::optional<Interval> window) {
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  std::vector<ComplexPoint> out;
  if (region.centers().empty()) return out;
  Interval range;
  bool bounded = region.centers().bounded();
  if (window) {
    range = *window;
  } else if (bounded) {
    range = real_extent(region);
  } else {
    throw std::invalid_argument("unbounded region needs an abscissa window");
  }
  if (range.hi == range.lo) {
    if (disk_region_contains(region, {range.lo, 0.0})) out.emplace_back(range.lo, 0.0);
    return out;
  }
  auto top = [&](double x) -> std::optional<double> {
    if (!disk_region_contains(region, {x, 0.0})) return std::nullopt;
    double lo = 0.0, hi = 1.0 + region.radius(x);
    while (disk_region_contains(region, {x, hi})) {
      lo = hi;
      hi *= 2.0;
    }
    while (hi - lo > 1e-10 * (1.0 + std::abs(ComplexPoint(x, lo)))) {
      double mid = 0.5 * (lo + hi);
      if (disk_region_contains(region, {x, mid})) lo = mid; else hi = mid;
    }
    return lo;
  };
  for (int i = 0; i < resolution; ++i) {
    double x = range.lo + (range.hi - range.lo) * i / (resolution - 1);
    if (auto y = top(x)) out.emplace_back(x, *y);
  }
  return out;
}

std::vector<ComplexPoint> boundary_polyline(const SLBox& box, int resolution) {
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  std::vector<ComplexPoint> out;
  double w = box.re_half_width, h = box.im_half_height;
  if (w == 0.0 && h == 0.0) return {ComplexPoint(0.0, 0.0)};
  out.emplace_back(-w, 0.0);
  for (int i = 0; i < resolution; ++i) out.emplace_back(-w + 2.0 * w * i / (resolution - 1), h);
  out.emplace_back(w, 0.0);
  return out;
}

namespace {
template <class F>
std::vector<ComplexPoint> sample_curve(F height, int resolution, Interval window) {
  if (resolution < 16) throw std::invalid_argument("resolution must be >= 16");
  if (!(window.hi > window.lo)) throw std::invalid_argument("empty abscissa window");
  std::vector<ComplexPoint> out;
  for (int i = 0; i < resolution; ++i) {
    double x = window.lo + (window.hi - window.lo) * i / (resolution - 1);
    out.emplace_back(x, height(x));
  }
  return out;
}
}  // namespace

std::vector<ComplexPoint> hull_boundary_polyline(const RelBound& bound, int resolution,
                                                 Interval window) {
  return sample_curve([&](double x) { return hull_height(bound, x); }, resolution, window);
}

std::vector<ComplexPoint> coarse_hull_boundary_polyline(const RelBound& bound, int resolution,
                                                        Interval window) {
  return sample_curve([&](double x) { return coarse_hull_height(bound, x); }, resolution, window);
}

}  // namespace kencl::geometry
