#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "kencl/instance_generator.hpp"
#include "kencl/linalg.hpp"
#include "kencl/operator_lab.hpp"

using namespace kencl;
using namespace kencl::lab;

namespace {

Matrix scalar(std::complex<double> v) {
  Matrix m(1, 1);
  m(0, 0) = v;
  return m;
}

// Largest singular value of x by power iteration on x* x.
double power_norm(const Matrix& x, Rng& rng) {
  Vector f(x.cols());
  for (int i = 0; i < f.size(); ++i) f(i) = rng.complex_normal();
  double est = 0;
  for (int it = 0; it < 5000; ++it) {
    Vector g = x.adjoint() * (x * f);
    double n = g.norm();
    if (n == 0) return 0;
    f = g / n;
    if (std::abs(n - est) <= 1e-15 * n) break;
    est = n;
  }
  return std::sqrt(est);
}

Matrix random_positive(Rng& rng, int n, double lo, double hi) {
  std::vector<double> spec(n);
  for (auto& s : spec) s = rng.uniform(lo, hi);
  return hermitian_with_spectrum(rng, spec);
}

std::vector<int> random_signature(Rng& rng, int n) {
  std::vector<int> sig(n);
  for (int i = 0; i < n; ++i) sig[i] = i == 0 ? 1 : (i == 1 ? -1 : (rng.uniform() < 0.5 ? 1 : -1));
  return sig;
}

}  // namespace

TEST_CASE("assemble_block") {
  auto two = assemble_block(BlockOperator(scalar(0), scalar(0), scalar(1)));
  CHECK(two(0, 1) == std::complex<double>(1, 0));
  CHECK(two(1, 0) == std::complex<double>(-1, 0));
  auto es = eigen_system(two);
  std::vector<double> ims;
  for (auto z : es.values) {
    ims.push_back(z.imag());
    CHECK(std::abs(z.real()) < 1e-14);
  }
  std::sort(ims.begin(), ims.end());
  CHECK(ims[0] == doctest::Approx(-1));
  CHECK(ims[1] == doctest::Approx(1));

  Rng rng(3);
  BlockOperator b(random_positive(rng, 3, -2, 2), random_positive(rng, 3, -2, 2), random_gaussian(rng, 3, 3));
  Matrix s = assemble_block(b);
  Matrix js = signature_matrix(b.signature()) * s;
  CHECK((js - js.adjoint()).norm() <= 1e-12 * s.norm());

  BlockOperator diag(random_positive(rng, 3, -2, 2), random_positive(rng, 2, -2, 2), Matrix::Zero(3, 2));
  for (auto z : eigen_system(assemble_block(diag)).values) CHECK(std::abs(z.imag()) < 1e-12);

  CHECK_THROWS(BlockOperator(scalar(0), scalar(0), Matrix::Zero(2, 1)));
}

TEST_CASE("conjugate symmetry of assembled spectra") {
  Rng rng(11);
  for (int k = 0; k < 20; ++k) {
    BlockOperator b = random_block_operator(rng);
    Matrix s = assemble_block(b);
    auto vals = eigen_system(s).values;
    double tol = 1e-8 * spectral_norm(s);
    for (auto z : vals) {
      double best = kInf;
      for (auto w : vals) best = std::min(best, std::abs(std::conj(z) - w));
      CHECK(best <= tol);
    }
  }
}

TEST_CASE("resolvent factor norm") {
  CHECK(resolvent_factor_norm(Matrix::Zero(2, 2), Matrix::Identity(2, 2), {0, 1}) == 0.0);
  CHECK(resolvent_factor_norm(scalar(3.5), scalar(1), {0, 0}) == doctest::Approx(3.5));
  CHECK_THROWS(resolvent_factor_norm(scalar(1), scalar(1), {1, 0}));

  Rng rng(8);
  for (int k = 0; k < 10; ++k) {
    Matrix s = random_positive(rng, 8, -3, 3);
    Matrix t = random_gaussian(rng, 8, 8);
    ComplexPoint lam(2, 3);
    Matrix x = t * (s - lam * Matrix::Identity(8, 8)).inverse();
    CHECK(resolvent_factor_norm(t, s, lam) == doctest::Approx(power_norm(x, rng)).epsilon(1e-8));
  }
}

TEST_CASE("K-set membership") {
  CHECK_FALSE(k_set_membership(Matrix::Zero(1, 1), scalar(0), {0.3, 0.2}));
  CHECK(k_set_membership(scalar(1), scalar(0), {0.6, 0.8}));
  CHECK(k_set_membership(scalar(1), scalar(0), {0.5, 0.1}));
  CHECK_FALSE(k_set_membership(scalar(1), scalar(0), {0.8, 0.8}));

  // membership implies the disk enclosure of the fitted bound
  Rng rng(12);
  int members = 0;
  for (int k = 0; k < 1000; ++k) {
    int n = rng.integer(2, 6);
    Matrix s = random_positive(rng, n, -5, 5);
    Matrix t = rng.uniform(0.1, 2.0) * random_gaussian(rng, n, n);
    double b = rng.uniform(0, 0.9);
    double a = min_relative_bound(t, s, b);
    Eigen::SelfAdjointEigenSolver<Matrix> es(s);
    std::vector<double> pts(es.eigenvalues().data(), es.eigenvalues().data() + n);
    geometry::DiskFamilyRegion region(geometry::RelBound(a, b), geometry::SpectrumModel::from_points(pts));
    ComplexPoint lam(rng.uniform(-8, 8), rng.uniform(-4, 4));
    bool in_k = k_set_membership(t, s, lam);
    CHECK(k_set_membership(t, s, std::conj(lam)) == in_k);
    if (in_k) {
      ++members;
      auto m = geometry::disk_region_membership(region, lam);
      CHECK(m.margin <= 1e-9 * (1 + std::abs(lam)));
    }
  }
  CHECK(members > 50);
}

TEST_CASE("min relative bound") {
  CHECK(min_relative_bound(Matrix::Zero(3, 3), Matrix::Identity(3, 3), 0.4) == 0.0);
  for (double b : {0.0, 0.3, 0.9}) CHECK(min_relative_bound(Matrix::Identity(2, 2), Matrix::Zero(2, 2), b) == doctest::Approx(1));
  Matrix t = Matrix::Zero(2, 2), s = Matrix::Zero(2, 2);
  t(0, 0) = 2;
  s(1, 1) = 3;
  CHECK(min_relative_bound(t, s, 0.25) == doctest::Approx(4));

  Rng rng(21);
  for (int k = 0; k < 20; ++k) {
    int n = rng.integer(2, 8);
    Matrix tt = random_gaussian(rng, n, n), ss = random_gaussian(rng, n, n);
    double prev = kInf;
    for (double b : {0.0, 0.2, 0.5, 0.8}) {
      double a = min_relative_bound(tt, ss, b);
      CHECK(a <= prev + 1e-12);
      prev = a;
      double oracle = 0;
      for (int i = 0; i < 10000; ++i) {
        Vector f(n);
        for (int j = 0; j < n; ++j) f(j) = rng.complex_normal();
        f.normalize();
        oracle = std::max(oracle, (tt * f).squaredNorm() - b * (ss * f).squaredNorm());
      }
      CHECK(oracle <= a + 1e-8 * (1 + a));
    }
  }
}

TEST_CASE("spectral projections") {
  std::vector<int> sig{1, -1};
  Matrix j = signature_matrix(sig);
  auto trivial = spectral_projections(sig, j);
  CHECK((trivial.j0 - j).norm() < 1e-12);
  CHECK(trivial.tau0 == doctest::Approx(1));
  CHECK(std::abs(trivial.e_plus(0, 0) - 1.0) < 1e-12);

  Matrix p(2, 2);
  p << 2, 1, 1, 1;
  Matrix a0 = j * p;
  auto d = spectral_projections(sig, a0);
  double lp = (1 + std::sqrt(5.0)) / 2, lm = (1 - std::sqrt(5.0)) / 2;
  // E+ = (A0 - lm) / (lp - lm) for a diagonalizable 2x2 matrix
  Matrix e_plus = (a0 - lm * Matrix::Identity(2, 2)) / (lp - lm);
  CHECK((d.e_plus - e_plus).norm() < 1e-12);
  CHECK((d.j0 * d.j0 - Matrix::Identity(2, 2)).norm() < 1e-12);
  CHECK(d.tau0 > 1);
  CHECK(d.tau0 == doctest::Approx(spectral_norm(2 * e_plus - Matrix::Identity(2, 2))));

  Matrix singular = Matrix::Zero(2, 2);
  singular(0, 0) = 1;
  CHECK_THROWS(spectral_projections(sig, singular));
  CHECK_THROWS(spectral_projections(sig, Matrix(-j)));

  Rng rng(31);
  for (int k = 0; k < 10; ++k) {
    int n = rng.integer(2, 12);
    auto s = random_signature(rng, n);
    Matrix a = signature_matrix(s) * random_positive(rng, n, 0.1, 10);
    auto pd = spectral_projections(s, a);
    Matrix id = Matrix::Identity(n, n);
    double tol = 1e-8 * n;
    CHECK((pd.e_plus * pd.e_plus - pd.e_plus).norm() < tol);
    CHECK((pd.e_plus * pd.e_minus).norm() < tol);
    CHECK((pd.e_plus + pd.e_minus - id).norm() < tol);
    CHECK((pd.j0 * pd.j0 - id).norm() < tol);
    CHECK(pd.tau0 >= 1 - 1e-12);
  }
}

TEST_CASE("J0 by quadrature matches the eigen construction") {
  Rng rng(41);
  for (int k = 0; k < 5; ++k) {
    int n = rng.integer(2, 8);
    auto s = random_signature(rng, n);
    Matrix a = signature_matrix(s) * random_positive(rng, n, 0.2, 5);
    Matrix q = j0_by_quadrature(a);
    auto pd = spectral_projections(s, a);
    CHECK((q - pd.j0).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("renorm inequalities") {
  std::vector<int> sig{1, -1};
  Matrix j = signature_matrix(sig);
  auto exact = renorm_check(spectral_projections(sig, j), sig, 200, 1);
  CHECK(exact.holds);
  CHECK(exact.worst_ratio == doctest::Approx(1).epsilon(1e-8));

  Matrix p(2, 2);
  p << 2, 1, 1, 1;
  CHECK(renorm_check(spectral_projections(sig, Matrix(j * p)), sig, 500, 2).holds);

  Rng rng(51);
  for (int k = 0; k < 3; ++k) {
    auto s = random_signature(rng, 20);
    Matrix a = signature_matrix(s) * random_positive(rng, 20, 0.1, 10);
    CHECK(renorm_check(spectral_projections(s, a), s, 1000, 3 + k).holds);
  }
}

TEST_CASE("block theorem checks") {
  Rng rng(61);
  BlockOperator decoupled(random_positive(rng, 3, -2, 2), random_positive(rng, 2, -2, 2), Matrix::Zero(3, 2));
  auto clean = verify_block_theorem(decoupled, 100, 1);
  CHECK(clean.verified());
  CHECK(clean.nonreal_count == 0);

  auto two = verify_block_theorem(BlockOperator(scalar(0), scalar(0), scalar(1)), 100, 2);
  CHECK(two.verified());
  CHECK(two.nonreal_count == 2);

  for (int k = 0; k < 20; ++k) {
    auto rep = verify_block_theorem(random_block_operator(rng), 200, derive_seed(61, k));
    CHECK(rep.verified());
  }
}

TEST_CASE("perturbation theorem checks") {
  Rng rng(71);
  for (int k = 0; k < 100; ++k) {
    int n = rng.integer(2, 10);
    auto s = random_signature(rng, n);
    Matrix j = signature_matrix(s);
    Matrix a0 = j * random_positive(rng, n, 0.1, 10);
    double eps = rng.uniform(0, 2);
    auto rep = verify_tmain(KreinPerturbationProblem(s, a0, eps * j));
    CHECK(rep.verified());
    CHECK(rep.nonreal_count == 0);
    CHECK(rep.bounds["v"].get<double>() == doctest::Approx(eps));
  }
  auto zero = verify_tmain(KreinPerturbationProblem({1, -1}, signature_matrix({1, -1}), Matrix::Zero(2, 2)));
  CHECK(zero.verified());
  CHECK(zero.nonreal_count == 0);

  for (int k = 0; k < 20; ++k) {
    auto rep = verify_tmain(random_perturbation_problem(rng));
    CHECK((rep.rejected || rep.verified()));
  }
}

TEST_CASE("bounded perturbation reduction") {
  Rng rng(81);
  for (int k = 0; k < 10; ++k) {
    int n = rng.integer(2, 8);
    auto s = random_signature(rng, n);
    Matrix j = signature_matrix(s);
    Matrix a0 = j * random_positive(rng, n, 0.5, 5);
    Matrix v = j * random_positive(rng, n, -1, 0.5);
    KreinPerturbationProblem prob(s, a0, v);
    double vl = prob.v_lower();
    REQUIRE(vl < 0);
    TmainOptions opt;
    opt.bounded_only = true;
    auto rep = verify_tmain(prob, opt);
    REQUIRE_FALSE(rep.rejected);
    double tau = rep.bounds["tau"].get<double>();
    double nv = spectral_norm(v);
    double a = rep.bounds["a"].get<double>();
    CHECK(rep.bounds["b"].get<double>() == 0.0);
    CHECK(std::abs(a - (1 + tau) * tau * nv * nv / 2) <= 1e-10 * (1 + a));
    double r = (1 + tau) * nv / 2, d = -(1 + tau) * vl / 2;
    CHECK(std::abs(rep.bounds["gamma"].get<double>() - std::min(r, d)) <= 1e-10 * (1 + r));
    if (tau > 1) {
      double rb = std::sqrt(rep.bounds["betterRadiusScale"].get<double>() * a);
      CHECK(std::abs(rb - r) <= 1e-10 * (1 + r));
    }
  }
}

TEST_CASE("resolvent order") {
  Matrix two(2, 2);
  two << 0, 1, -1, 0;
  ComplexPoint lam(0, 2);
  Matrix inv = (two - lam * Matrix::Identity(2, 2)).inverse();
  CHECK(resolvent_norm(two, lam) == doctest::Approx(spectral_norm(inv)).epsilon(1e-10));
  CHECK(resolvent_norm(two, lam) == doctest::Approx(1.0).epsilon(1e-10));

  Rng rng(91);
  for (int k = 0; k < 10; ++k) {
    auto rep = resolvent_order_check(random_block_operator(rng), 0.5, 300, derive_seed(91, k));
    CHECK(rep.resolvent_failures.empty());
  }
}
