#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kencl/geometry.hpp"
#include "kencl/tridiagonal.hpp"
#include "kencl/verification_report.hpp"

namespace kencl::sl {

/// Constants of the rectangular enclosure |Im| <= im_coef ||q||^e, |Re| <= re_coef ||q||^e,
/// e = 2p/(2p-1).
struct SLConstants {
  double p = 2.0;
  double s_p = 0.0;
  double f_sp = 0.0;
  double c_p = 0.0;
  double im_coef = 0.0;
  double re_coef = 0.0;

  double half_diagonal() const { return std::hypot(im_coef, re_coef); }
};

SLConstants sl_constants(double p);

/// f(s) = sqrt(2 ((17+12 sqrt2) s + 4 + 3 sqrt2) / ((3+2 sqrt2) s - 1 - sqrt2)), s > 1.
double f_of_s(double s);

/// Bound on |Re lambda| (per unit ||q||^e) obtained from the enclosure family indexed by
/// s > 1; equals re_coef at s = s_p.
double re_bound_objective(double p, double s);

/// Minimum of `re_bound_objective` over s > 1 (Brent).
double improved_re_coef(double p);

/// Exponent 2p/(2p-1) applied to ||q||_p.
double norm_power(double q_norm, double p);

geometry::SLBox sl_box(const SLConstants& c, double q_norm);
geometry::SLBox sl_box(double p, double q_norm);

/// Competing enclosure |Im| <= im_coef ||q||^e and |lambda| <= abs_coef ||q||^e,
/// valid for non-positive potentials.
struct BstConstants {
  double im_coef = 0.0;
  double abs_coef = 0.0;
};

BstConstants bst_constants(double p);

struct BstRegion {
  double im_bound = 0.0;
  double abs_bound = 0.0;

  bool contains(ComplexPoint z, double slack = 0.0) const;
  /// max(|Im| - im_bound, |z| - abs_bound); <= 0 inside.
  double margin(ComplexPoint z) const;
};

BstRegion bst_region(double p, double q_norm);

enum class PotentialKind { step, gaussian, lorentzian, tabulated };

std::string to_string(PotentialKind kind);
PotentialKind potential_kind_from_string(const std::string& s);

/// Potential q on the real line. Closed-form kinds are -depth * shape((x - center) / width):
/// step (indicator of [-1, 1]), gaussian exp(-u^2), lorentzian 1 / (1 + u^2).
/// Tabulated potentials interpolate (x, q) samples linearly and vanish outside the table.
class Potential {
 public:
  static Potential step(double depth, double width = 1.0, double center = 0.0);
  static Potential gaussian(double depth, double width = 1.0, double center = 0.0);
  static Potential lorentzian(double depth, double width = 1.0, double center = 0.0);
  static Potential tabulated(std::vector<double> x, std::vector<double> q);
  /// Reads a two-column CSV (header optional) of x, q samples.
  static Potential load_table(const std::string& path);

  PotentialKind kind() const { return kind_; }
  double depth() const { return depth_; }
  double width() const { return width_; }
  double center() const { return center_; }
  const std::vector<double>& table_x() const { return tx_; }
  const std::vector<double>& table_q() const { return tq_; }

  double operator()(double x) const;
  /// (1/(b-a)) * integral of q over [a, b].
  double cell_average(double a, double b) const;
  /// Integral of q over [a, b].
  double integral(double a, double b) const;
  double sup_norm() const;
  bool nonpositive() const;
  bool even() const;
  /// Points where q is not smooth (or its center), for quadrature splitting.
  std::vector<double> breakpoints() const;

 private:
  Potential() = default;
  PotentialKind kind_ = PotentialKind::step;
  double depth_ = 0.0;
  double width_ = 1.0;
  double center_ = 0.0;
  std::vector<double> tx_, tq_;
};

/// ||q||_p; p = infinity gives the sup norm.
double lp_norm(const Potential& q, double p);

struct SLDiscretization {
  double length = 0.0;  // half-length L
  int n = 0;
  double h = 0.0;
  std::vector<double> x;
  /// Potential values used on the grid (cell averages for closed-form kinds).
  std::vector<double> q;
  std::vector<int> sign;
  Tridiagonal t;  // -D^2 + diag(q)
  Tridiagonal a;  // J T

  Eigen::MatrixXd dense_t() const { return t.dense(); }
  Eigen::MatrixXd dense_a() const { return a.dense(); }
};

SLDiscretization discretize(const Potential& q, double length, int n);

/// All eigenvalues of the discretized A.
TridiagonalSpectrum sl_spectrum(const SLDiscretization& disc);

struct NonrealSpectrum {
  /// Eigenvalues with |Im| > tol (1 + |lambda|), sorted by (Re, Im).
  std::vector<ComplexPoint> values;
  /// Members without a conjugate partner within tolerance.
  std::vector<ComplexPoint> unpaired;
};

NonrealSpectrum nonreal_spectrum(const TridiagonalSpectrum& spectrum, double tol = 1e-8);
NonrealSpectrum nonreal_spectrum(const SLDiscretization& disc, double tol = 1e-8);

struct SlackPolicy {
  double c = 1.0;
  double kappa = 1.0;
  double floor = 1e-6;
};

struct SLEigenRow {
  ComplexPoint value;
  bool in_box = false;
  bool in_bst = false;
  double margin_box = 0.0;
  double margin_bst = 0.0;
};

struct SLContainmentOptions {
  double nonreal_tolerance = 1e-8;
  SlackPolicy slack;
  double sign_threshold = 1e-6;
  double cluster_tolerance = 1e-6;
  /// Test the sign type of real eigenvalues beyond the rectangle (one inverse iteration each).
  bool sign_test = true;
  /// Relative tolerance of the conjugate / parity symmetry checks.
  double symmetry_tolerance = 1e-7;
};

struct SLContainmentReport {
  VerificationReport report;
  SLConstants constants;
  geometry::SLBox box;
  BstRegion bst;
  bool bst_applies = false;  // only for non-positive potentials
  double q_norm = 0.0;
  double slack = 0.0;
  std::vector<SLEigenRow> rows;
  bool conjugate_symmetric = true;
  std::optional<bool> parity_symmetric;  // set for even potentials
  /// Largest (least negative) margins over the non-real eigenvalues; absent when none.
  std::optional<double> worst_margin_box;
  std::optional<double> worst_margin_bst;
};

SLContainmentReport containment_report(const SLDiscretization& disc, const Potential& q, double p,
                                       const SLContainmentOptions& options = {});

/// Same, reusing an already computed spectrum of `disc`.
SLContainmentReport containment_report(const SLDiscretization& disc, const TridiagonalSpectrum& spectrum,
                                       const Potential& q, double p, const SLContainmentOptions& options = {});

/// Smooth square-integrable test function with known second derivative.
class TestFunction {
 public:
  /// amplitude * exp(-alpha (x - shift)^2).
  static TestFunction gaussian(double amplitude, double alpha, double shift = 0.0);
  /// amplitude * psi_k((x - shift) / scale), psi_k the normalized Hermite function.
  static TestFunction hermite(int order, double amplitude = 1.0, double scale = 1.0, double shift = 0.0);

  double operator()(double x) const;
  double second_derivative(double x) const;
  double l2_norm() const;
  double second_derivative_l2_norm() const;
  double shift() const { return shift_; }
  /// Length scale of the bulk of the function.
  double spread() const;
  std::string describe() const;

 private:
  TestFunction() = default;
  bool hermite_ = false;
  int order_ = 0;
  double amplitude_ = 1.0;
  double alpha_ = 1.0;  // gaussian exponent, or 1/scale for Hermite functions
  double shift_ = 0.0;
};

struct LemmaCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// ||f g||_2 against (2r)^{1/p} (||f||_2 + ||f''||_2 / (2 sqrt3 pi^2 p r^2)) ||g||_p.
LemmaCheck lemma_ls_check(const TestFunction& f, const Potential& g, double p, double r);

/// Real function on a finite subinterval [lo, hi] of (0, inf), zero elsewhere.
struct HalfLineProfile {
  std::function<double(double)> value;
  double lo = 1.0;
  double hi = 2.0;

  static HalfLineProfile zero();
  static HalfLineProfile indicator(double lo, double hi, double height = 1.0);
  /// height * x^exponent on [lo, hi].
  static HalfLineProfile power(double exponent, double lo, double hi, double height = 1.0);
  bool is_zero() const { return !value; }
};

struct HilbertFormResult {
  double quotient = 0.0;
  double norm_sq = 0.0;
  double double_integral = 0.0;
  int panels = 0;
};

/// Rayleigh quotient of the form (||f1||^2 + ||f2||^2 + (2/pi) D) / (||f1||^2 + ||f2||^2), with D the
/// double integral over (0, inf)^2 of (f1(x) f1(y) + f2(x) f2(y)) / (x + y)
/// - 2 (x + y) / (x^2 + y^2) f1(x) f2(y). Product Gauss-Legendre on panels that are
/// logarithmic for wide supports; refined until two levels agree to `rel_tol`.
HilbertFormResult tau0_hilbert_form(const HalfLineProfile& f1, const HalfLineProfile& f2, double rel_tol = 1e-7);

}  // namespace kencl::sl
