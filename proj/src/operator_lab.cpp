#include "kencl/operator_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "kencl/quadrature.hpp"

namespace kencl::lab {

namespace {

using geometry::DiskFamilyRegion;
using geometry::RelBound;
using geometry::SpectrumModel;

constexpr double kHermitianTol = 1e-12;
constexpr double kMembershipTol = 1e-10;
constexpr double kSpectrumTol = 1e-8;

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

Matrix hermitian_part(const Matrix& m) { return 0.5 * (m + m.adjoint()); }

std::string describe(ComplexPoint z) {
  std::ostringstream os;
  os.precision(17);
  os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "i";
  return os.str();
}

double krein_sign(const std::vector<int>& signature, const Vector& f) {
  double num = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i) num += signature[static_cast<std::size_t>(i)] * std::norm(f(i));
  return num / f.squaredNorm();
}

bool clustered(const std::vector<ComplexPoint>& values, std::size_t k, double tol) {
  for (std::size_t j = 0; j < values.size(); ++j)
    if (j != k && std::abs(values[j] - values[k]) <= tol * (1.0 + std::abs(values[k]))) return true;
  return false;
}

// Sign-type test of one real eigenvalue against an expected sign (+1, -1 or 0 for none).
void sign_test(VerificationReport& rep, EigenRecord& rec, const std::vector<int>& signature,
               const EigenSystem& es, std::size_t k, int expected, double threshold, double cluster_tol) {
  if (expected == 0) return;
  ++rep.sign.checked;
  if (clustered(es.values, k, cluster_tol)) {
    ++rep.sign.indeterminate;
    rec.sign_status = "indeterminate";
    return;
  }
  double s = krein_sign(signature, es.vectors.col(static_cast<Eigen::Index>(k)));
  rec.krein_sign = s;
  if (std::abs(s) <= threshold) {
    ++rep.sign.indeterminate;
    rec.sign_status = "indeterminate";
  } else if (s * expected > 0.0) {
    rec.sign_status = expected > 0 ? "positive" : "negative";
  } else {
    rec.sign_status = "failed";
    rep.fail_sign("eigenvalue " + describe(es.values[k]) + " expected " +
                  (expected > 0 ? "positive" : "negative") + " type, (Jf,f)/|f|^2 = " + std::to_string(s));
  }
}

std::vector<double> real_eigenvalues(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h), Eigen::EigenvaluesOnly);
  const auto& d = es.eigenvalues();
  return {d.data(), d.data() + d.size()};
}

// Largest |z_k - conj(z_j)| over the best conjugate matching (greedy).
double conjugate_asymmetry(const std::vector<ComplexPoint>& values) {
  std::vector<bool> used(values.size(), false);
  double worst = 0.0;
  for (std::size_t k = 0; k < values.size(); ++k) {
    double best = kInf;
    std::size_t arg = k;
    for (std::size_t j = 0; j < values.size(); ++j) {
      if (used[j]) continue;
      double d = std::abs(values[k] - std::conj(values[j]));
      if (d < best) {
        best = d;
        arg = j;
      }
    }
    used[arg] = true;
    worst = std::max(worst, best);
  }
  return worst;
}

}  // namespace

BlockOperator::BlockOperator(Matrix s_plus, Matrix s_minus, Matrix m)
    : s_plus_(std::move(s_plus)), s_minus_(std::move(s_minus)), m_(std::move(m)) {
  if (s_plus_.rows() != s_plus_.cols() || s_minus_.rows() != s_minus_.cols())
    throw std::invalid_argument("diagonal blocks must be square");
  if (s_plus_.rows() == 0 || s_minus_.rows() == 0) throw std::invalid_argument("empty diagonal block");
  if (m_.rows() != s_plus_.rows() || m_.cols() != s_minus_.rows())
    throw std::invalid_argument("off-diagonal block has shape mismatch");
  require_finite(s_plus_, "S+");
  require_finite(s_minus_, "S-");
  require_finite(m_, "M");
  if (!is_hermitian(s_plus_, kHermitianTol)) throw std::invalid_argument("S+ is not Hermitian");
  if (!is_hermitian(s_minus_, kHermitianTol)) throw std::invalid_argument("S- is not Hermitian");
}

std::vector<int> BlockOperator::signature() const {
  std::vector<int> s(static_cast<std::size_t>(n_plus()), 1);
  s.resize(static_cast<std::size_t>(n_plus() + n_minus()), -1);
  return s;
}

Matrix assemble_block(const BlockOperator& b) {
  const int np = b.n_plus(), nm = b.n_minus();
  Matrix s(np + nm, np + nm);
  s.topLeftCorner(np, np) = b.s_plus();
  s.topRightCorner(np, nm) = b.m();
  s.bottomLeftCorner(nm, np) = -b.m().adjoint();
  s.bottomRightCorner(nm, nm) = b.s_minus();
  return s;
}

ResolventFactor::ResolventFactor(const Matrix& t, const Matrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("S must be square");
  if (t.cols() != s.rows()) throw std::invalid_argument("T and S have incompatible shapes");
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(s));
  if (es.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  spectrum_ = es.eigenvalues();
  Matrix tu = t * es.eigenvectors();
  gram_ = tu.adjoint() * tu;
  scale_ = spectrum_.size() ? std::max(std::abs(spectrum_(0)), std::abs(spectrum_(spectrum_.size() - 1))) : 0.0;
}

double ResolventFactor::spectrum_distance(ComplexPoint lambda) const {
  double d = kInf;
  for (Eigen::Index i = 0; i < spectrum_.size(); ++i) d = std::min(d, std::abs(spectrum_(i) - lambda));
  return d;
}

double ResolventFactor::norm(ComplexPoint lambda) const {
  if (spectrum_distance(lambda) <= 1e-12 * scale_ || spectrum_distance(lambda) == 0.0)
    throw std::domain_error("lambda lies in the spectrum of S");
  const Eigen::Index n = spectrum_.size();
  Vector d(n);
  for (Eigen::Index i = 0; i < n; ++i) d(i) = 1.0 / (spectrum_(i) - lambda);
  Matrix g = d.conjugate().asDiagonal() * gram_ * d.asDiagonal();
  return std::sqrt(std::max(0.0, hermitian_max_eigenvalue(hermitian_part(g))));
}

double resolvent_factor_norm(const Matrix& t, const Matrix& s, ComplexPoint lambda) {
  return ResolventFactor(t, s).norm(lambda);
}

bool k_set_member(const ResolventFactor& f, ComplexPoint lambda) {
  if (f.spectrum_distance(lambda) <= kSpectrumTol) return true;
  return f.norm(lambda) >= 1.0 - kMembershipTol;
}

bool k_set_membership(const Matrix& t, const Matrix& s, ComplexPoint lambda) {
  return k_set_member(ResolventFactor(t, s), lambda);
}

double min_relative_bound(const Matrix& t, const Matrix& s, double b) {
  if (!(b >= 0.0 && b < 1.0)) throw std::invalid_argument("b must lie in [0, 1)");
  if (t.cols() != s.cols()) throw std::invalid_argument("T and S need equal column counts");
  Matrix h = t.adjoint() * t - b * (s.adjoint() * s);
  return std::max(0.0, hermitian_max_eigenvalue(hermitian_part(h)));
}

double resolvent_norm(const Matrix& s, ComplexPoint lambda) {
  const Eigen::Index n = s.rows();
  Matrix shifted = s - lambda * Matrix::Identity(n, n);
  Matrix r = shifted.partialPivLu().inverse();
  return std::sqrt(std::max(0.0, hermitian_max_eigenvalue(hermitian_part(r.adjoint() * r))));
}

KreinPerturbationProblem::KreinPerturbationProblem(std::vector<int> signature, Matrix a0, Matrix v)
    : signature_(std::move(signature)), a0_(std::move(a0)), v_(std::move(v)) {
  const auto n = static_cast<Eigen::Index>(signature_.size());
  if (n == 0) throw std::invalid_argument("empty signature");
  if (a0_.rows() != n || a0_.cols() != n || v_.rows() != n || v_.cols() != n)
    throw std::invalid_argument("A0 and V must be square with the signature's dimension");
  require_finite(a0_, "A0");
  require_finite(v_, "V");
  Matrix j = signature_matrix(signature_);
  Matrix p = j * a0_;
  if (!is_hermitian(p, kHermitianTol)) throw std::invalid_argument("J A0 is not Hermitian");
  double pn = spectral_norm(p);
  if (!(hermitian_min_eigenvalue(hermitian_part(p)) > 1e-10 * pn))
    throw std::invalid_argument("J A0 is not positive definite");
  if (!is_hermitian(j * v_, kHermitianTol)) throw std::invalid_argument("J V is not Hermitian");
}

double KreinPerturbationProblem::v_lower() const {
  return hermitian_min_eigenvalue(hermitian_part(j() * v_));
}

ProjectionData spectral_projections(const std::vector<int>& signature, const Matrix& a0) {
  Matrix j = signature_matrix(signature);
  Matrix p = hermitian_part(j * a0);
  auto [root, inv_root] = hpd_sqrt_and_inverse(p);
  Matrix h = hermitian_part(root * j * root);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  const auto& mu = es.eigenvalues();
  const Matrix& w = es.eigenvectors();
  const double an = spectral_norm(a0);
  const Eigen::Index n = mu.size();
  Matrix qp = Matrix::Zero(n, n), qm = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(mu(i)) <= 1e-10 * an) throw std::domain_error("A0 has an eigenvalue at zero");
    Matrix outer = w.col(i) * w.col(i).adjoint();
    if (mu(i) > 0.0) qp += outer; else qm += outer;
  }
  ProjectionData d;
  d.e_plus = inv_root * qp * root;
  d.e_minus = inv_root * qm * root;
  d.j0 = d.e_plus - d.e_minus;
  d.tau0 = spectral_norm(d.j0);
  return d;
}

ProjectionData spectral_projections(const KreinPerturbationProblem& problem) {
  return spectral_projections(problem.signature(), problem.a0());
}

Matrix j0_by_quadrature(const Matrix& a0, double horizon_factor, double tolerance) {
  const Eigen::Index n = a0.rows();
  const double s = spectral_norm(a0);
  if (!(s > 0.0)) throw std::invalid_argument("A0 must be nonzero");
  const Matrix id = Matrix::Identity(n, n);
  const std::complex<double> i1(0.0, 1.0);
  // t = s tan(theta) maps [0, horizon s] to a bounded theta-range with a smooth integrand
  auto integrand = [&](double theta) -> Matrix {
    double t = s * std::tan(theta);
    double c = std::cos(theta);
    double jac = s / (c * c);
    Matrix plus = (a0 + i1 * t * id).partialPivLu().inverse();
    Matrix minus = (a0 - i1 * t * id).partialPivLu().inverse();
    return jac * (plus + minus);
  };
  auto size_of = [](const Matrix& m) { return m.cwiseAbs().maxCoeff(); };
  Matrix integral = adaptive_gauss_kronrod(integrand, 0.0, std::atan(horizon_factor), tolerance, size_of);
  return integral / std::numbers::pi;
}

RenormCheck renorm_check(const ProjectionData& data, const std::vector<int>& signature, int trials,
                         std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  Matrix j = signature_matrix(signature);
  Matrix gram = hermitian_part(j * data.j0);
  if (!(hermitian_min_eigenvalue(gram) > 0.0))
    throw std::domain_error("J J0 is not positive definite; inconsistent projection data");
  auto [root, inv_root] = hpd_sqrt_and_inverse(gram);
  const double tau = data.tau0;
  const int n = static_cast<int>(gram.rows());
  auto norm0_sq = [&](const Vector& f) { return std::real(f.dot(gram * f)); };
  Rng rng(seed);
  RenormCheck out;
  out.trials = trials;
  auto record = [&](double lhs, double rhs) {
    double ratio = rhs > 0.0 ? lhs / rhs : (lhs > 0.0 ? kInf : 0.0);
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (lhs > rhs * (1.0 + 1e-8) + 1e-14) out.holds = false;
  };
  for (int k = 0; k < trials; ++k) {
    Vector f = random_gaussian(rng, n, 1).col(0);
    Matrix t = random_gaussian(rng, n, n);
    record(spectral_norm(root * t * inv_root), tau * spectral_norm(t));
    double nf = f.squaredNorm(), n0 = norm0_sq(f);
    record(nf / tau, n0);
    record(n0, tau * nf);
    for (const Matrix* e : {&data.e_plus, &data.e_minus}) {
      Vector ef = *e * f;
      record(norm0_sq(ef), 0.5 * (1.0 + tau) * nf);
      record(ef.squaredNorm(), 0.5 * (1.0 + tau) * n0);
    }
  }
  return out;
}

VerificationReport verify_block_theorem(const BlockOperator& b, int lambda_samples, std::uint64_t seed,
                                        const BlockCheckOptions& options) {
  VerificationReport rep;
  const Matrix s = assemble_block(b);
  const std::vector<int> sig = b.signature();
  const Matrix m_adj = b.m().adjoint();
  const double norm_s = spectral_norm(s);
  rep.instance = {{"dims", {b.n_plus(), b.n_minus()}},
                  {"seed", seed},
                  {"norms",
                   {{"Splus", spectral_norm(b.s_plus())},
                    {"Sminus", spectral_norm(b.s_minus())},
                    {"M", spectral_norm(b.m())},
                    {"S", norm_s}}}};

  // relative-bound fits on the b grid
  struct Fit {
    double b, a_minus, a_plus;
  };
  std::vector<Fit> fits;
  for (double bv : options.b_grid) {
    Fit f{bv, min_relative_bound(b.m(), b.s_minus(), bv), min_relative_bound(m_adj, b.s_plus(), bv)};
    if (!std::isfinite(f.a_minus) || !std::isfinite(f.a_plus)) continue;
    fits.push_back(f);
  }
  if (fits.empty()) {
    rep.rejected = true;
    rep.rejection_reason = "no relative bound with b < 1";
    return rep;
  }
  nlohmann::json fit_json = nlohmann::json::array();
  for (const auto& f : fits) fit_json.push_back({{"b", f.b}, {"aMinus", f.a_minus}, {"aPlus", f.a_plus}});
  rep.bounds = {{"fits", fit_json}};

  const ResolventFactor l_minus(b.m(), b.s_minus());
  const ResolventFactor l_plus(m_adj, b.s_plus());
  std::vector<double> spec_minus(l_minus.spectrum().data(), l_minus.spectrum().data() + l_minus.spectrum().size());
  std::vector<double> spec_plus(l_plus.spectrum().data(), l_plus.spectrum().data() + l_plus.spectrum().size());
  std::vector<DiskFamilyRegion> regions;
  for (const auto& f : fits) {
    regions.emplace_back(RelBound(f.a_minus, f.b), SpectrumModel::from_points(spec_minus));
    regions.emplace_back(RelBound(f.a_plus, f.b), SpectrumModel::from_points(spec_plus));
  }

  const EigenSystem es = eigen_system(s);
  const double disk_tol = 1e-9 * (1.0 + norm_s) * es.condition;
  for (std::size_t k = 0; k < es.values.size(); ++k) {
    const ComplexPoint z = es.values[k];
    EigenRecord rec;
    rec.value = z;
    rec.nonreal = std::abs(z.imag()) > options.nonreal_tolerance * (1.0 + std::abs(z)) * es.condition;
    if (rec.nonreal) {
      ++rep.nonreal_count;
      ++rep.containment.checked;
      bool in_minus = k_set_member(l_minus, z);
      bool in_plus = k_set_member(l_plus, z);
      double nm = l_minus.spectrum_distance(z) <= kSpectrumTol ? kInf : l_minus.norm(z);
      double np = l_plus.spectrum_distance(z) <= kSpectrumTol ? kInf : l_plus.norm(z);
      rec.margin = std::isfinite(std::min(nm, np)) ? 1.0 - std::min(nm, np) : 0.0;
      rec.contained = in_minus && in_plus;
      if (!rec.contained)
        rep.fail_containment("eigenvalue " + describe(z) + " outside K-set intersection (norms " +
                             std::to_string(nm) + ", " + std::to_string(np) + ")");
      double worst_disk = -kInf;
      for (std::size_t r = 0; r < regions.size(); ++r) {
        if (geometry::disk_region_contains(regions[r], z)) continue;
        double mg = geometry::disk_region_membership(regions[r], z).margin;
        worst_disk = std::max(worst_disk, mg);
        if (mg > disk_tol) {
          rec.contained = false;
          rep.fail_containment("eigenvalue " + describe(z) + " outside disk union for b = " +
                               std::to_string(fits[r / 2].b) + (r % 2 ? " (S+ side)" : " (S- side)") +
                               ", margin " + std::to_string(mg));
        }
      }
      if (worst_disk > -kInf) rep.containment.observe(worst_disk);
    } else {
      const double x = z.real();
      bool pos = l_minus.spectrum_distance(x) > kSpectrumTol && l_minus.norm(x) < 1.0 - kMembershipTol;
      bool neg = l_plus.spectrum_distance(x) > kSpectrumTol && l_plus.norm(x) < 1.0 - kMembershipTol;
      if (pos && neg) {
        rec.sign_status = "failed";
        rep.fail_sign("eigenvalue " + describe(z) + " lies in both sign-type sets");
      } else {
        sign_test(rep, rec, sig, es, k, pos ? 1 : (neg ? -1 : 0), options.sign_threshold,
                  options.cluster_tolerance);
      }
    }
    rep.eigenvalues.push_back(rec);
  }
  rep.extra["conjugateAsymmetry"] = conjugate_asymmetry(es.values);
  rep.extra["eigenCondition"] = es.condition;

  // resolvent estimate at random non-real points
  const double r = std::max({spectral_norm(b.s_plus()), spectral_norm(b.s_minus()), spectral_norm(b.m()), 1.0});
  Rng rng(derive_seed(seed, 0x5eed));
  for (int i = 0; i < lambda_samples; ++i) {
    double re = rng.uniform(-2.0 * r, 2.0 * r);
    double im = r * std::pow(10.0, rng.uniform(-3.0, 0.5)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    ComplexPoint z(re, im);
    double res = -1.0;
    for (const ResolventFactor* lf : {&l_minus, &l_plus}) {
      double x = lf->norm(z);
      if (!(x < 1.0)) continue;
      if (res < 0.0) res = resolvent_norm(s, z);
      double bound = (1.0 + x + x * x) / (std::abs(im) * (1.0 - x * x));
      ++rep.resolvent.checked;
      rep.resolvent.observe(res / bound);
      if (res > bound * (1.0 + 1e-8))
        rep.fail_resolvent("lambda " + describe(z) + ": resolvent norm " + std::to_string(res) +
                           " exceeds bound " + std::to_string(bound));
    }
  }
  return rep;
}

VerificationReport verify_tmain(const KreinPerturbationProblem& problem, const TmainOptions& options) {
  VerificationReport rep;
  if (options.tau && !(*options.tau >= 1.0)) throw std::invalid_argument("tau must be >= 1");
  if (!(options.b_step > 0.0 && options.b_step < 1.0)) throw std::invalid_argument("b step must lie in (0, 1)");
  const ProjectionData proj = spectral_projections(problem);
  const double tau = std::max(proj.tau0, options.tau.value_or(proj.tau0));
  const double v = problem.v_lower();
  const Matrix a = problem.a();
  const double norm_a = spectral_norm(a);
  const double norm_v = spectral_norm(problem.v());
  const std::vector<int>& sig = problem.signature();
  rep.instance = {{"dims", problem.dim()},
                  {"norms", {{"A0", spectral_norm(problem.a0())}, {"V", norm_v}, {"A", norm_a}}}};
  rep.bounds = {{"tau0", proj.tau0}, {"tau", tau}, {"v", v}};

  const EigenSystem es = eigen_system(a);
  rep.extra["conjugateAsymmetry"] = conjugate_asymmetry(es.values);
  rep.extra["eigenCondition"] = es.condition;

  if (v >= 0.0) {
    // A is J-non-negative: real spectrum, positive type on the right, negative on the left
    for (std::size_t k = 0; k < es.values.size(); ++k) {
      EigenRecord rec;
      rec.value = es.values[k];
      ++rep.containment.checked;
      if (std::abs(rec.value.imag()) >= 1e-8 * std::max(norm_a, 1.0)) {
        rec.nonreal = true;
        rec.contained = false;
        ++rep.nonreal_count;
        rep.fail_containment("eigenvalue " + describe(rec.value) + " is non-real although v >= 0");
      } else {
        int expected = rec.value.real() > 0.0 ? 1 : (rec.value.real() < 0.0 ? -1 : 0);
        sign_test(rep, rec, sig, es, k, expected, options.sign_threshold, options.cluster_tolerance);
      }
      rep.eigenvalues.push_back(rec);
    }
    return rep;
  }

  // fit (a, b) on the grid and keep the pair with the smallest enclosure
  const Matrix w = std::sqrt((1.0 + tau) * tau) * problem.v();
  std::vector<TmainFit> fits;
  std::vector<geometry::PerturbationRegions> regions;
  for (int k = 0;; ++k) {
    double bv = k * options.b_step;
    if (bv >= geometry::RelBound::kMaxB || (options.bounded_only && k > 0)) break;
    double av = min_relative_bound(w, problem.a0(), bv) / 2.0;
    if (!std::isfinite(av)) continue;
    auto reg = geometry::perturbation_regions(av, bv, tau, v);
    fits.push_back({av, bv, geometry::region_area(reg.worse)});
    regions.push_back(std::move(reg));
  }
  if (fits.empty()) {
    rep.rejected = true;
    rep.rejection_reason = "no admissible relative bound with b < 1";
    return rep;
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < fits.size(); ++i)
    if (fits[i].area < fits[best].area) best = i;
  const auto& chosen = regions[best];
  rep.bounds["a"] = fits[best].a;
  rep.bounds["b"] = fits[best].b;
  rep.bounds["gamma"] = chosen.gamma;
  rep.bounds["betterPresent"] = chosen.better.has_value();
  rep.bounds["worseArea"] = fits[best].area;
  if (chosen.better) rep.bounds["betterRadiusScale"] = chosen.better->radius_scale();
  nlohmann::json curve = nlohmann::json::array();
  for (const auto& f : fits) curve.push_back({{"b", f.b}, {"a", f.a}, {"area", f.area}});
  rep.extra["curve"] = curve;

  const double tol = 1e-9 * (1.0 + norm_a) * es.condition;
  for (std::size_t k = 0; k < es.values.size(); ++k) {
    const ComplexPoint z = es.values[k];
    EigenRecord rec;
    rec.value = z;
    rec.nonreal = std::abs(z.imag()) > options.nonreal_tolerance * (1.0 + std::abs(z)) * es.condition;
    if (rec.nonreal) {
      ++rep.nonreal_count;
      ++rep.containment.checked;
      rec.margin = geometry::disk_region_membership(chosen.worse, z).margin;
      if (chosen.better)
        rec.margin = std::max(rec.margin, geometry::disk_region_membership(*chosen.better, z).margin);
      double worst = -kInf;
      for (std::size_t i = 0; i < regions.size(); ++i) {
        std::vector<std::pair<const DiskFamilyRegion*, const char*>> checks{{&regions[i].worse, "worse"}};
        if (regions[i].better) checks.emplace_back(&*regions[i].better, "better");
        for (auto [reg, name] : checks) {
          if (geometry::disk_region_contains(*reg, z)) continue;
          double mg = geometry::disk_region_membership(*reg, z).margin;
          worst = std::max(worst, mg);
          if (mg > tol) {
            rec.contained = false;
            rep.fail_containment("eigenvalue " + describe(z) + " outside the " + name +
                                 " region for b = " + std::to_string(fits[i].b) + ", margin " +
                                 std::to_string(mg));
          }
        }
      }
      if (worst > -kInf) rep.containment.observe(worst);
    } else {
      const double x = z.real();
      bool outside = false;
      for (const auto& reg : regions) {
        if (!geometry::disk_region_contains(reg.worse, x) ||
            (reg.better && !geometry::disk_region_contains(*reg.better, x))) {
          outside = true;
          break;
        }
      }
      int expected = outside ? (x > 0.0 ? 1 : -1) : 0;
      sign_test(rep, rec, sig, es, k, expected, options.sign_threshold, options.cluster_tolerance);
    }
    rep.eigenvalues.push_back(rec);
  }
  return rep;
}

VerificationReport resolvent_order_check(const BlockOperator& b, double rel_b, int samples,
                                         std::uint64_t seed) {
  if (!(rel_b > 0.0 && rel_b < 1.0)) throw std::invalid_argument("relative bound b must lie in (0, 1)");
  VerificationReport rep;
  const Matrix s = assemble_block(b);
  const Matrix m_adj = b.m().adjoint();
  const double a = std::max(min_relative_bound(b.m(), b.s_minus(), rel_b),
                            min_relative_bound(m_adj, b.s_plus(), rel_b));
  const auto sp = real_eigenvalues(b.s_plus());
  const auto sm = real_eigenvalues(b.s_minus());
  const double gamma = std::max({0.0, sm.back(), -sp.front()});
  const RelBound bound(a, rel_b);
  const double threshold = geometry::factor_norm_threshold(bound, gamma);
  const DiskFamilyRegion bone(bound, SpectrumModel::interval(-gamma, gamma));
  rep.bounds = {{"a", a}, {"b", rel_b}, {"gamma", gamma}, {"threshold", threshold}};
  rep.instance = {{"dims", {b.n_plus(), b.n_minus()}}, {"seed", seed}};

  Rng rng(seed);
  double growth = 0.0;
  long growth_samples = 0;
  for (int i = 0; i < samples; ++i) {
    double theta = rng.uniform(1e-3, std::numbers::pi - 1e-3) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    if (i % 2 == 0) {
      double radius = threshold * (1.0 + 1e-6) * std::pow(10.0, rng.uniform(0.0, 1.0));
      ComplexPoint z = std::polar(radius, theta);
      double res = resolvent_norm(s, z);
      double bound_val = 3.0 / ((1.0 - rel_b) * std::abs(z.imag()));
      ++rep.resolvent.checked;
      rep.resolvent.observe(res / bound_val);
      if (res > bound_val * (1.0 + 1e-8))
        rep.fail_resolvent("lambda " + describe(z) + ": " + std::to_string(res) + " > " + std::to_string(bound_val));
    } else {
      double radius = threshold * std::pow(10.0, rng.uniform(-2.0, 0.0));
      ComplexPoint z = std::polar(radius, theta);
      if (geometry::disk_region_contains(bone, z)) continue;
      double res = resolvent_norm(s, z);
      growth = std::max(growth, res * z.imag() * z.imag() / ((1.0 + std::abs(z)) * (1.0 + std::abs(z))));
      ++growth_samples;
    }
  }
  rep.bounds["growthConstant"] = growth;
  rep.extra["growthSamples"] = growth_samples;
  return rep;
}

}  // namespace kencl::lab
