#include "kencl/sturm_liouville.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "kencl/quadrature.hpp"

namespace kencl::sl {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;
constexpr double kTau = 3.0 + 2.0 * kSqrt2;

void require_p(double p) {
  if (!(p >= 2.0) || !std::isfinite(p)) throw std::invalid_argument("p must be finite and >= 2");
}

// Integral of |l|^p over [x0, x1] where l is linear with l(x0) = y0, l(x1) = y1.
double linear_power_integral(double x0, double x1, double y0, double y1, double p) {
  if (y0 * y1 < 0.0) {
    double xr = x0 + (x1 - x0) * y0 / (y0 - y1);
    return linear_power_integral(x0, xr, y0, 0.0, p) + linear_power_integral(xr, x1, 0.0, y1, p);
  }
  double u0 = std::abs(y0), u1 = std::abs(y1), len = x1 - x0;
  if (std::abs(u1 - u0) <= 1e-9 * std::max(u0, u1)) return len * std::pow(0.5 * (u0 + u1), p);
  return len * (std::pow(u1, p + 1.0) - std::pow(u0, p + 1.0)) / ((p + 1.0) * (u1 - u0));
}

std::string fmt(ComplexPoint z) {
  std::ostringstream os;
  os.precision(12);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

bool has_partner(const std::vector<ComplexPoint>& vals, ComplexPoint target, double tol) {
  return std::any_of(vals.begin(), vals.end(), [&](ComplexPoint w) { return std::abs(w - target) <= tol; });
}

}  // namespace

double f_of_s(double s) {
  if (!(s > 1.0)) throw std::invalid_argument("f(s) needs s > 1");
  double num = (17.0 + 12.0 * kSqrt2) * s + 4.0 + 3.0 * kSqrt2;
  double den = (3.0 + 2.0 * kSqrt2) * s - 1.0 - kSqrt2;
  return std::sqrt(2.0 * num / den);
}

SLConstants sl_constants(double p) {
  require_p(p);
  // s_p = alpha p + beta + sqrt(alpha^2 p^2 + g1 p + g0), coefficients written without
  // subtractive cancellation
  const double alpha = 7.0 / (5.0 + 4.0 * kSqrt2);
  const double beta = -2.0 / (4.0 + 3.0 * kSqrt2);
  const double g1 = -28.0 / (31.0 * kSqrt2 + 44.0);
  const double g0 = 14.0 / (44.0 + 31.0 * kSqrt2);
  SLConstants c;
  c.p = p;
  c.s_p = alpha * p + beta + std::sqrt(alpha * alpha * p * p + g1 * p + g0);
  c.f_sp = f_of_s(c.s_p);
  // (1 + sqrt2) sqrt(3 - 2 sqrt2) = 1
  const double base = 16.0 * kSqrt2 * kTau * kTau / (3.0 * std::pow(kPi, 4) * p) * c.s_p;
  c.c_p = std::sqrt(2.0 * p / (2.0 * p - 1.0)) * std::pow(base, 1.0 / (4.0 * p - 2.0));
  c.im_coef = c.c_p * c.f_sp;
  c.re_coef = c.c_p * (std::sqrt(2.0 * kTau) + c.f_sp);
  return c;
}

double re_bound_objective(double p, double s) {
  if (!(s > 1.0)) throw std::invalid_argument("objective needs s > 1");
  const SLConstants c = sl_constants(p);
  const double e = 1.0 / (2.0 * p - 1.0);
  const double m = 4.0 * kTau * kTau / (1.0 + kTau) * std::pow(c.s_p, -e) * c.c_p * c.c_p;
  const double a = m * std::pow(s, e);
  const double b = (kTau - 1.0) / (2.0 * kTau * s);
  const double gamma = std::sqrt((1.0 + kTau) * a / (2.0 * kTau));
  return gamma + std::sqrt((1.0 + kTau) / (2.0 * kTau * (1.0 - b)) * (a + b * gamma * gamma));
}

double improved_re_coef(double p) {
  auto obj = [p](double u) { return re_bound_objective(p, 1.0 + std::exp(u)); };
  boost::uintmax_t iters = 500;
  auto [u, v] = boost::math::tools::brent_find_minima(obj, -30.0, 30.0, 52, iters);
  (void)u;
  return v;
}

double norm_power(double q_norm, double p) {
  if (!(q_norm >= 0.0)) throw std::invalid_argument("norm must be nonnegative");
  if (std::isinf(p)) return q_norm;
  return std::pow(q_norm, 2.0 * p / (2.0 * p - 1.0));
}

geometry::SLBox sl_box(const SLConstants& c, double q_norm) {
  double k = norm_power(q_norm, c.p);
  return {c.im_coef * k, c.re_coef * k};
}

geometry::SLBox sl_box(double p, double q_norm) { return sl_box(sl_constants(p), q_norm); }

BstConstants bst_constants(double p) {
  require_p(p);
  BstConstants b;
  b.im_coef = std::pow(2.0, (2.0 * p + 1.0) / (2.0 * p - 1.0)) * 3.0 * std::sqrt(3.0);
  b.abs_coef = b.im_coef + std::pow(2.0, (3.0 - 2.0 * p) / (2.0 * p - 1.0)) * 9.0;
  return b;
}

bool BstRegion::contains(ComplexPoint z, double slack) const {
  return std::abs(z.imag()) <= im_bound + slack && std::abs(z) <= abs_bound + slack;
}

double BstRegion::margin(ComplexPoint z) const {
  return std::max(std::abs(z.imag()) - im_bound, std::abs(z) - abs_bound);
}

BstRegion bst_region(double p, double q_norm) {
  BstConstants c = bst_constants(p);
  double k = norm_power(q_norm, p);
  return {c.im_coef * k, c.abs_coef * k};
}

std::string to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::step: return "step";
    case PotentialKind::gaussian: return "gaussian";
    case PotentialKind::lorentzian: return "lorentzian";
    case PotentialKind::tabulated: return "tabulated";
  }
  return "unknown";
}

PotentialKind potential_kind_from_string(const std::string& s) {
  if (s == "step") return PotentialKind::step;
  if (s == "gaussian") return PotentialKind::gaussian;
  if (s == "lorentzian") return PotentialKind::lorentzian;
  if (s == "tabulated") return PotentialKind::tabulated;
  throw std::invalid_argument("unknown potential kind '" + s + "'");
}

Potential Potential::step(double depth, double width, double center) {
  if (!(depth >= 0.0) || !std::isfinite(depth)) throw std::invalid_argument("depth must be finite and >= 0");
  if (!(width > 0.0) || !std::isfinite(width)) throw std::invalid_argument("width must be positive");
  if (!std::isfinite(center)) throw std::invalid_argument("center must be finite");
  Potential q;
  q.kind_ = PotentialKind::step;
  q.depth_ = depth;
  q.width_ = width;
  q.center_ = center;
  return q;
}

Potential Potential::gaussian(double depth, double width, double center) {
  Potential q = step(depth, width, center);
  q.kind_ = PotentialKind::gaussian;
  return q;
}

Potential Potential::lorentzian(double depth, double width, double center) {
  Potential q = step(depth, width, center);
  q.kind_ = PotentialKind::lorentzian;
  return q;
}

Potential Potential::tabulated(std::vector<double> x, std::vector<double> v) {
  if (x.size() != v.size() || x.size() < 2) throw std::invalid_argument("table needs >= 2 (x, q) samples");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(v[i])) throw std::invalid_argument("table has non-finite samples");
    if (i > 0 && !(x[i] > x[i - 1])) throw std::invalid_argument("table abscissae must increase strictly");
  }
  Potential q;
  q.kind_ = PotentialKind::tabulated;
  q.tx_ = std::move(x);
  q.tq_ = std::move(v);
  return q;
}

Potential Potential::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open potential table '" + path + "'");
  std::vector<double> x, v;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double a, b;
    if (!(ls >> a >> b)) {
      if (x.empty() && lineno == 1) continue;  // header
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected two numbers");
    }
    x.push_back(a);
    v.push_back(b);
  }
  return tabulated(std::move(x), std::move(v));
}

double Potential::operator()(double x) const {
  const double u = (x - center_) / width_;
  switch (kind_) {
    case PotentialKind::step: return std::abs(u) <= 1.0 ? -depth_ : 0.0;
    case PotentialKind::gaussian: return -depth_ * std::exp(-u * u);
    case PotentialKind::lorentzian: return -depth_ / (1.0 + u * u);
    case PotentialKind::tabulated: {
      if (x < tx_.front() || x > tx_.back()) return 0.0;
      auto it = std::upper_bound(tx_.begin(), tx_.end(), x);
      if (it == tx_.end()) return tq_.back();
      std::size_t k = static_cast<std::size_t>(it - tx_.begin());
      double t = (x - tx_[k - 1]) / (tx_[k] - tx_[k - 1]);
      return tq_[k - 1] + t * (tq_[k] - tq_[k - 1]);
    }
  }
  return 0.0;
}

double Potential::integral(double a, double b) const {
  if (b < a) return -integral(b, a);
  const double c = center_, w = width_;
  switch (kind_) {
    case PotentialKind::step: {
      double lo = std::max(a, c - w), hi = std::min(b, c + w);
      return hi > lo ? -depth_ * (hi - lo) : 0.0;
    }
    case PotentialKind::gaussian:
      return -depth_ * w * std::sqrt(kPi) / 2.0 * (std::erf((b - c) / w) - std::erf((a - c) / w));
    case PotentialKind::lorentzian:
      return -depth_ * w * (std::atan((b - c) / w) - std::atan((a - c) / w));
    case PotentialKind::tabulated: {
      double lo = std::max(a, tx_.front()), hi = std::min(b, tx_.back());
      if (!(hi > lo)) return 0.0;
      double sum = 0.0;
      for (std::size_t k = 1; k < tx_.size(); ++k) {
        double s0 = std::max(lo, tx_[k - 1]), s1 = std::min(hi, tx_[k]);
        if (s1 > s0) sum += 0.5 * ((*this)(s0) + (*this)(s1)) * (s1 - s0);
      }
      return sum;
    }
  }
  return 0.0;
}

double Potential::cell_average(double a, double b) const {
  if (!(b > a)) throw std::invalid_argument("empty cell");
  return integral(a, b) / (b - a);
}

double Potential::sup_norm() const {
  if (kind_ != PotentialKind::tabulated) return depth_;
  double m = 0.0;
  for (double v : tq_) m = std::max(m, std::abs(v));
  return m;
}

bool Potential::nonpositive() const {
  if (kind_ != PotentialKind::tabulated) return true;
  return std::all_of(tq_.begin(), tq_.end(), [](double v) { return v <= 0.0; });
}

bool Potential::even() const {
  if (kind_ != PotentialKind::tabulated) return center_ == 0.0;
  const std::size_t n = tx_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double tol = 1e-12 * (1.0 + std::abs(tx_[i]));
    if (std::abs(tx_[i] + tx_[n - 1 - i]) > tol) return false;
    if (std::abs(tq_[i] - tq_[n - 1 - i]) > 1e-12 * (1.0 + std::abs(tq_[i]))) return false;
  }
  return true;
}

std::vector<double> Potential::breakpoints() const {
  switch (kind_) {
    case PotentialKind::step: return {center_ - width_, center_ + width_};
    case PotentialKind::gaussian:
    case PotentialKind::lorentzian: return {center_};
    case PotentialKind::tabulated: return tx_;
  }
  return {};
}

double lp_norm(const Potential& q, double p) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must be >= 1");
  if (std::isinf(p)) return q.sup_norm();
  const double c = q.depth(), w = q.width();
  switch (q.kind()) {
    case PotentialKind::step: return c * std::pow(2.0 * w, 1.0 / p);
    case PotentialKind::gaussian: return c * std::pow(w * std::sqrt(kPi / p), 1.0 / p);
    case PotentialKind::lorentzian: {
      // integral of (1 + u^2)^{-p} is sqrt(pi) Gamma(p - 1/2) / Gamma(p)
      double log_int = 0.5 * std::log(kPi) + std::lgamma(p - 0.5) - std::lgamma(p);
      return c * std::pow(w, 1.0 / p) * std::exp(log_int / p);
    }
    case PotentialKind::tabulated: {
      const auto& x = q.table_x();
      const auto& v = q.table_q();
      double sum = 0.0;
      for (std::size_t k = 1; k < x.size(); ++k) sum += linear_power_integral(x[k - 1], x[k], v[k - 1], v[k], p);
      if (!std::isfinite(sum)) throw std::domain_error("L^p norm diverges");
      return std::pow(sum, 1.0 / p);
    }
  }
  return 0.0;
}

SLDiscretization discretize(const Potential& q, double length, int n) {
  if (!(length > 0.0) || !std::isfinite(length)) throw std::invalid_argument("L must be positive");
  if (n < 16 || n % 2 != 0) throw std::invalid_argument("n must be even and >= 16");
  SLDiscretization d;
  d.length = length;
  d.n = n;
  d.h = 2.0 * length / (n + 1);
  const double h = d.h, ih2 = 1.0 / (h * h);
  const auto un = static_cast<std::size_t>(n);
  d.x.resize(un);
  d.q.resize(un);
  d.sign.resize(un);
  for (std::size_t i = 0; i < un; ++i) {
    double x = -length + static_cast<double>(i + 1) * h;
    d.x[i] = x;
    d.sign[i] = x > 0.0 ? 1 : -1;
    d.q[i] = q.kind() == PotentialKind::tabulated ? q(x) : q.cell_average(x - 0.5 * h, x + 0.5 * h);
  }
  d.t.diag.resize(un);
  d.t.lower.assign(un - 1, -ih2);
  d.t.upper.assign(un - 1, -ih2);
  d.a.diag.resize(un);
  d.a.lower.resize(un - 1);
  d.a.upper.resize(un - 1);
  for (std::size_t i = 0; i < un; ++i) {
    d.t.diag[i] = 2.0 * ih2 + d.q[i];
    d.a.diag[i] = d.sign[i] * d.t.diag[i];
    if (i + 1 < un) {
      d.a.upper[i] = d.sign[i] * d.t.upper[i];
      d.a.lower[i] = d.sign[i + 1] * d.t.lower[i];
    }
  }
  return d;
}

TridiagonalSpectrum sl_spectrum(const SLDiscretization& disc) { return tridiagonal_eigenvalues(disc.a); }

NonrealSpectrum nonreal_spectrum(const TridiagonalSpectrum& spectrum, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  NonrealSpectrum out;
  std::vector<double> err;
  for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
    ComplexPoint z = spectrum.values[i];
    if (std::abs(z.imag()) > tol * (1.0 + std::abs(z))) {
      out.values.push_back(z);
      err.push_back(i < spectrum.error_bounds.size() ? spectrum.error_bounds[i] : 0.0);
    }
  }
  std::vector<std::size_t> order(out.values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    auto a = out.values[i], b = out.values[j];
    return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
  });
  std::vector<ComplexPoint> sorted;
  std::vector<double> sorted_err;
  for (auto i : order) {
    sorted.push_back(out.values[i]);
    sorted_err.push_back(err[i]);
  }
  out.values = sorted;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    double ptol = std::max(1e-7 * (1.0 + std::abs(sorted[i])), 4.0 * sorted_err[i]);
    if (!has_partner(sorted, std::conj(sorted[i]), ptol)) out.unpaired.push_back(sorted[i]);
  }
  return out;
}

NonrealSpectrum nonreal_spectrum(const SLDiscretization& disc, double tol) {
  return nonreal_spectrum(sl_spectrum(disc), tol);
}

SLContainmentReport containment_report(const SLDiscretization& disc, const Potential& q, double p,
                                       const SLContainmentOptions& options) {
  return containment_report(disc, sl_spectrum(disc), q, p, options);
}

SLContainmentReport containment_report(const SLDiscretization& disc, const TridiagonalSpectrum& spectrum,
                                       const Potential& q, double p, const SLContainmentOptions& opt) {
  SLContainmentReport out;
  auto& rep = out.report;
  out.q_norm = lp_norm(q, p);
  out.constants = sl_constants(p);
  out.box = sl_box(out.constants, out.q_norm);
  out.bst = bst_region(p, out.q_norm);
  out.bst_applies = q.nonpositive();
  const double scale = 1.0 + out.box.re_half_width;
  out.slack = std::max(opt.slack.floor, opt.slack.c * disc.h * disc.h * q.sup_norm() +
                                            std::exp(-opt.slack.kappa * disc.length) * scale);
  rep.instance = {{"potential", to_string(q.kind())}, {"depth", q.depth()}, {"width", q.width()},
                  {"L", disc.length}, {"n", disc.n}, {"h", disc.h}};
  rep.bounds = {{"p", p},
                {"qNorm", out.q_norm},
                {"imCoef", out.constants.im_coef},
                {"reCoef", out.constants.re_coef},
                {"boxImHalfHeight", out.box.im_half_height},
                {"boxReHalfWidth", out.box.re_half_width},
                {"bstIm", out.bst.im_bound},
                {"bstAbs", out.bst.abs_bound},
                {"bstApplies", out.bst_applies},
                {"slack", out.slack}};

  const NonrealSpectrum nr = nonreal_spectrum(spectrum, opt.nonreal_tolerance);
  rep.nonreal_count = static_cast<int>(nr.values.size());
  out.conjugate_symmetric = nr.unpaired.empty();
  for (auto z : nr.unpaired) rep.fail_containment("non-real eigenvalue " + fmt(z) + " has no conjugate partner");

  double err_max = 0.0;
  for (double e : spectrum.error_bounds) err_max = std::max(err_max, e);
  if (q.even()) {
    bool ok = true;
    for (auto z : nr.values) {
      double tol = std::max(opt.symmetry_tolerance * (1.0 + std::abs(z)), 4.0 * err_max);
      if (!has_partner(nr.values, -z, tol) || !has_partner(nr.values, -std::conj(z), tol)) ok = false;
    }
    out.parity_symmetric = ok;
  }

  for (auto z : nr.values) {
    SLEigenRow row;
    row.value = z;
    row.margin_box = out.box.margin(z);
    row.margin_bst = out.bst.margin(z);
    row.in_box = out.box.contains(z, out.slack);
    row.in_bst = out.bst.contains(z, out.slack);
    out.worst_margin_box = out.worst_margin_box ? std::max(*out.worst_margin_box, row.margin_box) : row.margin_box;
    out.worst_margin_bst = out.worst_margin_bst ? std::max(*out.worst_margin_bst, row.margin_bst) : row.margin_bst;
    ++rep.containment.checked;
    rep.containment.observe(row.margin_box);
    if (!row.in_box)
      rep.fail_containment("eigenvalue " + fmt(z) + " outside the rectangle (margin " + std::to_string(row.margin_box) + ")");
    if (out.bst_applies && !row.in_bst)
      rep.fail_containment("eigenvalue " + fmt(z) + " outside the competing region (margin " +
                           std::to_string(row.margin_bst) + ")");
    EigenRecord rec;
    rec.value = z;
    rec.nonreal = true;
    rec.contained = row.in_box && (!out.bst_applies || row.in_bst);
    rec.margin = row.margin_box;
    rep.eigenvalues.push_back(rec);
    out.rows.push_back(row);
  }

  // sign type of real eigenvalues beyond the rectangle
  std::vector<double> reals;
  for (auto z : spectrum.values)
    if (std::abs(z.imag()) <= opt.nonreal_tolerance * (1.0 + std::abs(z))) reals.push_back(z.real());
  std::sort(reals.begin(), reals.end());
  for (std::size_t k = 0; opt.sign_test && k < reals.size(); ++k) {
    const double x = reals[k];
    if (std::abs(x) <= out.box.re_half_width + out.slack) continue;
    ++rep.sign.checked;
    double gap = kInf;
    if (k > 0) gap = std::min(gap, x - reals[k - 1]);
    if (k + 1 < reals.size()) gap = std::min(gap, reals[k + 1] - x);
    if (gap <= opt.cluster_tolerance * (1.0 + std::abs(x))) {
      ++rep.sign.indeterminate;
      continue;
    }
    std::vector<double> f = tridiagonal_eigenvector(disc.a, x);
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += disc.sign[i] * f[i] * f[i];
    if (std::abs(s) <= opt.sign_threshold) {
      ++rep.sign.indeterminate;
    } else if ((s > 0.0) != (x > 0.0)) {
      rep.fail_sign("real eigenvalue " + std::to_string(x) + " has (Jf,f)/|f|^2 = " + std::to_string(s));
    }
  }
  rep.extra["conjugateSymmetric"] = out.conjugate_symmetric;
  if (out.parity_symmetric) rep.extra["paritySymmetric"] = *out.parity_symmetric;
  rep.extra["iterations"] = spectrum.iterations;
  return out;
}

TestFunction TestFunction::gaussian(double amplitude, double alpha, double shift) {
  if (!(alpha > 0.0) || !std::isfinite(amplitude) || !std::isfinite(shift))
    throw std::invalid_argument("gaussian test function needs alpha > 0 and finite parameters");
  TestFunction f;
  f.amplitude_ = amplitude;
  f.alpha_ = alpha;
  f.shift_ = shift;
  return f;
}

TestFunction TestFunction::hermite(int order, double amplitude, double scale, double shift) {
  if (order < 0 || !(scale > 0.0) || !std::isfinite(amplitude) || !std::isfinite(shift))
    throw std::invalid_argument("Hermite test function needs order >= 0 and scale > 0");
  TestFunction f;
  f.hermite_ = true;
  f.order_ = order;
  f.amplitude_ = amplitude;
  f.alpha_ = 1.0 / scale;
  f.shift_ = shift;
  return f;
}

namespace {
// Normalized Hermite function psi_k(u) by the stable three-term recurrence.
double hermite_function(int k, double u) {
  double p0 = std::pow(kPi, -0.25) * std::exp(-0.5 * u * u);
  if (k == 0) return p0;
  double p1 = kSqrt2 * u * p0;
  for (int j = 1; j < k; ++j) {
    double p2 = std::sqrt(2.0 / (j + 1)) * u * p1 - std::sqrt(static_cast<double>(j) / (j + 1)) * p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}
}  // namespace

double TestFunction::operator()(double x) const {
  double u = x - shift_;
  if (!hermite_) return amplitude_ * std::exp(-alpha_ * u * u);
  return amplitude_ * hermite_function(order_, alpha_ * u);
}

double TestFunction::second_derivative(double x) const {
  double u = x - shift_;
  if (!hermite_) return amplitude_ * (4.0 * alpha_ * alpha_ * u * u - 2.0 * alpha_) * std::exp(-alpha_ * u * u);
  double v = alpha_ * u;
  return amplitude_ * alpha_ * alpha_ * (v * v - 2.0 * order_ - 1.0) * hermite_function(order_, v);
}

double TestFunction::l2_norm() const {
  if (!hermite_) return std::abs(amplitude_) * std::pow(kPi / (2.0 * alpha_), 0.25);
  return std::abs(amplitude_) / std::sqrt(alpha_);
}

double TestFunction::second_derivative_l2_norm() const {
  if (!hermite_) return std::abs(amplitude_) * std::sqrt(3.0) * alpha_ * std::pow(kPi / (2.0 * alpha_), 0.25);
  double k = order_;
  return std::abs(amplitude_) * std::sqrt(std::pow(alpha_, 3) * (6.0 * k * k + 6.0 * k + 3.0) / 4.0);
}

double TestFunction::spread() const {
  if (!hermite_) return 1.0 / std::sqrt(alpha_);
  return std::sqrt(2.0 * order_ + 1.0) / alpha_;
}

std::string TestFunction::describe() const {
  std::ostringstream os;
  if (hermite_)
    os << "hermite(k=" << order_ << ", amplitude=" << amplitude_ << ", scale=" << 1.0 / alpha_ << ", shift=" << shift_ << ")";
  else
    os << "gaussian(amplitude=" << amplitude_ << ", alpha=" << alpha_ << ", shift=" << shift_ << ")";
  return os.str();
}

LemmaCheck lemma_ls_check(const TestFunction& f, const Potential& g, double p, double r) {
  if (!(r > 0.0) || !std::isfinite(r)) throw std::invalid_argument("r must be positive");
  if (!(p >= 2.0)) throw std::invalid_argument("p must be >= 2");
  std::vector<double> cuts = g.breakpoints();
  for (int k = -8; k <= 8; ++k) cuts.push_back(f.shift() + k * f.spread());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  cuts.insert(cuts.begin(), -kInf);
  cuts.push_back(kInf);
  auto integrand = [&](double x) {
    double v = f(x) * g(x);
    return v * v;
  };
  LemmaCheck c;
  c.lhs = std::sqrt(integrate_pieces(integrand, cuts, 1e-10));
  const double gp = lp_norm(g, p);
  const double inner = std::isinf(p) ? f.l2_norm()
                                     : f.l2_norm() + f.second_derivative_l2_norm() /
                                                         (2.0 * std::sqrt(3.0) * kPi * kPi * p * r * r);
  c.rhs = (std::isinf(p) ? 1.0 : std::pow(2.0 * r, 1.0 / p)) * inner * gp;
  c.holds = c.lhs <= c.rhs * (1.0 + 1e-6);
  return c;
}

HalfLineProfile HalfLineProfile::zero() { return {}; }

HalfLineProfile HalfLineProfile::indicator(double lo, double hi, double height) {
  return {[height](double) { return height; }, lo, hi};
}

HalfLineProfile HalfLineProfile::power(double exponent, double lo, double hi, double height) {
  return {[exponent, height](double x) { return height * std::pow(x, exponent); }, lo, hi};
}

HilbertFormResult tau0_hilbert_form(const HalfLineProfile& f1, const HalfLineProfile& f2, double rel_tol) {
  std::vector<const HalfLineProfile*> active;
  for (const auto* f : {&f1, &f2}) {
    if (f->is_zero()) continue;
    if (!(f->lo > 0.0) || !(f->hi > f->lo) || !std::isfinite(f->hi))
      throw std::invalid_argument("profile support must be a finite interval in (0, inf)");
    active.push_back(f);
  }
  if (active.empty()) throw std::invalid_argument("both profiles vanish");
  std::vector<double> breaks;
  for (const auto* f : active) {
    breaks.push_back(f->lo);
    breaks.push_back(f->hi);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  const auto& rule = gauss_legendre_rule<20>();
  auto eval_profile = [](const HalfLineProfile& f, double x) {
    return (!f.is_zero() && x > f.lo && x < f.hi) ? f.value(x) : 0.0;
  };

  auto evaluate = [&](int level, int& panels) {
    std::vector<double> xs, ws;
    panels = 0;
    const double width = 0.5 / std::pow(2.0, level);
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
      double u = breaks[k], v = breaks[k + 1];
      bool logarithmic = v / u > 4.0;
      double a = logarithmic ? std::log(u) : u, b = logarithmic ? std::log(v) : v;
      double unit = logarithmic ? width : width * u;
      int count = std::max(1, static_cast<int>(std::ceil((b - a) / unit)));
      double step = (b - a) / count;
      for (int m = 0; m < count; ++m) {
        double c = a + (m + 0.5) * step, half = 0.5 * step;
        for (auto [t, w] : rule) {
          double s = c + half * t;
          double x = logarithmic ? std::exp(s) : s;
          xs.push_back(x);
          ws.push_back(w * half * (logarithmic ? x : 1.0));
        }
      }
      panels += count;
    }
    const std::size_t n = xs.size();
    std::vector<double> g1(n), g2(n);
    for (std::size_t i = 0; i < n; ++i) {
      g1[i] = eval_profile(f1, xs[i]);
      g2[i] = eval_profile(f2, xs[i]);
    }
    double norm_sq = 0.0, dint = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      norm_sq += ws[i] * (g1[i] * g1[i] + g2[i] * g2[i]);
      double row = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double s = xs[i] + xs[j];
        double term = (g1[i] * g1[j] + g2[i] * g2[j]) / s;
        if (g1[i] != 0.0 && g2[j] != 0.0) term -= 2.0 * s / (xs[i] * xs[i] + xs[j] * xs[j]) * g1[i] * g2[j];
        row += ws[j] * term;
      }
      dint += ws[i] * row;
    }
    return std::pair{norm_sq, dint};
  };

  HilbertFormResult prev;
  for (int level = 0; level <= 6; ++level) {
    int panels = 0;
    auto [ns, d] = evaluate(level, panels);
    if (!(ns > 0.0)) throw std::invalid_argument("profiles have zero norm");
    HilbertFormResult cur{(ns + 2.0 / kPi * d) / ns, ns, d, panels};
    if (level > 0 && std::abs(cur.quotient - prev.quotient) <= rel_tol * std::abs(cur.quotient)) return cur;
    prev = cur;
  }
  throw QuadratureError("Hilbert-form quadrature did not converge");
}

}  // namespace kencl::sl
