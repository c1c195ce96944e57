#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "kencl/random.hpp"
#include "kencl/sturm_liouville.hpp"
#include "kencl/tridiagonal.hpp"

using namespace kencl;
using namespace kencl::sl;

namespace {

const double kSqrt2 = std::sqrt(2.0);

// Composite Simpson on [lo, hi] with an even number of intervals.
template <class F>
double simpson(F f, double lo, double hi, int intervals) {
  double h = (hi - lo) / intervals, sum = f(lo) + f(hi);
  for (int i = 1; i < intervals; ++i) sum += (i % 2 ? 4 : 2) * f(lo + i * h);
  return sum * h / 3;
}

double nearest(const std::vector<ComplexPoint>& vals, ComplexPoint z) {
  double best = kInf;
  for (auto w : vals) best = std::min(best, std::abs(w - z));
  return best;
}

// 1 + (2/pi) * int int_{[l,h]^2} dx dy / (x + y) / (h - l)
double indicator_quotient(double l, double h) {
  double d = 2 * h * std::log(2 * h) - 2 * (l + h) * std::log(l + h) + 2 * l * std::log(2 * l);
  return 1 + 2 / M_PI * d / (h - l);
}

}  // namespace

TEST_CASE("constants at p = 2") {
  long double r2 = std::sqrt(2.0L);
  long double sp = (-6 + 5 * r2) + std::sqrt(96 - 67 * r2);
  auto c = sl_constants(2);
  CHECK(c.s_p == doctest::Approx(static_cast<double>(sp)).epsilon(1e-13));
  CHECK(c.s_p == doctest::Approx(2.188068850809769).epsilon(1e-13));
  CHECK(c.s_p > 1);
  CHECK(c.im_coef == doctest::Approx(c.c_p * c.f_sp));
  CHECK(c.re_coef == doctest::Approx(c.c_p * (std::sqrt(6 + 4 * kSqrt2) + c.f_sp)));
  CHECK(c.im_coef < c.re_coef);
  CHECK(c.im_coef == doctest::Approx(5.50396273155799).epsilon(1e-12));
  CHECK(c.re_coef == doctest::Approx(10.205804888024632).epsilon(1e-12));
  CHECK_THROWS(sl_constants(1.5));
}

TEST_CASE("f at infinity") {
  CHECK(f_of_s(1e12) == doctest::Approx(2 + kSqrt2).epsilon(1e-10));
  CHECK(std::sqrt(2 * (17 + 12 * kSqrt2) / (3 + 2 * kSqrt2)) == doctest::Approx(2 + kSqrt2));
}

TEST_CASE("constant limits and monotonicity") {
  auto big = sl_constants(1e6);
  CHECK(std::abs(big.im_coef - (2 + kSqrt2)) < 1e-2);
  CHECK(std::abs(big.half_diagonal() - 7.630335) < 2e-2);
  double prev_im = kInf, prev_hd = kInf;
  for (int i = 0; i <= 200; ++i) {
    double p = 2 * std::pow(1e5, i / 200.0);
    auto c = sl_constants(p);
    CHECK(c.im_coef <= prev_im * (1 + 1e-12));
    CHECK(c.half_diagonal() <= prev_hd * (1 + 1e-12));
    prev_im = c.im_coef;
    prev_hd = c.half_diagonal();
  }
  // no loss of digits far out
  auto huge = sl_constants(1e12);
  CHECK(std::isfinite(huge.s_p));
  CHECK(huge.s_p > 1);
}

TEST_CASE("competing constants") {
  auto b2 = bst_constants(2);
  CHECK(b2.im_coef == doctest::Approx(std::pow(2.0, 5.0 / 3.0) * 3 * std::sqrt(3.0)));
  CHECK(b2.im_coef == doctest::Approx(16.49675564398323));
  auto binf = bst_constants(1e6);
  CHECK(std::abs(binf.im_coef - 6 * std::sqrt(3.0)) < 1e-2);
  CHECK(std::abs(binf.abs_coef - (6 * std::sqrt(3.0) + 4.5)) < 1e-2);
}

TEST_CASE("box strictly inside the competing region") {
  for (int i = 0; i < 200; ++i) {
    double p = 2 * std::pow(50.0, i / 199.0);
    auto c = sl_constants(p);
    auto b = bst_constants(p);
    CHECK(c.im_coef < b.im_coef);
    ComplexPoint corner(c.re_coef, c.im_coef);
    CHECK(std::abs(corner.imag()) < b.im_coef);
    CHECK(std::abs(corner) < b.abs_coef);
  }
}

TEST_CASE("box scaling") {
  auto zero = sl_box(2, 0);
  CHECK(zero.im_half_height == 0);
  CHECK(zero.re_half_width == 0);
  auto one = sl_box(2, 1);
  CHECK(one.im_half_height == doctest::Approx(sl_constants(2).im_coef));
  for (double p : {2.0, 3.5, 10.0}) {
    auto x = sl_box(p, 1.7), y = sl_box(p, 3.4);
    double factor = std::pow(2.0, 2 * p / (2 * p - 1));
    CHECK(y.im_half_height == doctest::Approx(factor * x.im_half_height));
    CHECK(y.re_half_width == doctest::Approx(factor * x.re_half_width));
  }
}

TEST_CASE("Re-bound objective") {
  for (double p : {2.0, 3.0, 10.0, 100.0}) {
    auto c = sl_constants(p);
    CHECK(re_bound_objective(p, c.s_p) == doctest::Approx(c.re_coef).epsilon(1e-12));
    double best = improved_re_coef(p);
    CHECK(best <= c.re_coef * (1 + 1e-12));
    // Brent result against a scan
    double scan = kInf;
    for (int i = 1; i < 20000; ++i) scan = std::min(scan, re_bound_objective(p, 1 + std::exp(-10 + i * 1e-3)));
    CHECK(best <= scan * (1 + 1e-9));
  }
}

TEST_CASE("potential norms") {
  for (double p : {2.0, 3.0, 7.5}) {
    CHECK(lp_norm(Potential::step(5), p) == doctest::Approx(5 * std::pow(2.0, 1 / p)).epsilon(1e-12));
    CHECK(lp_norm(Potential::gaussian(3), p) == doctest::Approx(3 * std::pow(M_PI / p, 1 / (2 * p))).epsilon(1e-10));
    double lor = std::pow(simpson([&](double u) { return std::pow(2.0 / (1 + u * u), p); }, -2000, 2000, 2000000), 1 / p);
    CHECK(lp_norm(Potential::lorentzian(2), p) == doctest::Approx(lor).epsilon(1e-6));
  }
  CHECK(lp_norm(Potential::step(5), kInf) == 5);
  CHECK(lp_norm(Potential::gaussian(3), kInf) == 3);

  auto tab = Potential::tabulated({-2, -1, 0, 0.5, 3}, {0, -2, -1, -4, 0});
  for (double p : {2.0, 4.0}) {
    double oracle = std::pow(simpson([&](double x) { return std::pow(std::abs(tab(x)), p); }, -2, 3, 500000), 1 / p);
    CHECK(lp_norm(tab, p) == doctest::Approx(oracle).epsilon(1e-8));
  }
  CHECK(lp_norm(tab, kInf) == 4);
  CHECK_THROWS(Potential::tabulated({0, 0}, {1, 1}));
  CHECK_THROWS(Potential::step(-1));
}

TEST_CASE("tabulated potentials load from CSV") {
  auto path = std::filesystem::temp_directory_path() / "kencl_tab_test.csv";
  {
    std::ofstream f(path);
    f << "x,q\n-1,0\n0,-3\n1,0\n";
  }
  auto q = Potential::load_table(path.string());
  CHECK(q(0.5) == doctest::Approx(-1.5));
  CHECK(q(2) == 0);
  auto d1 = discretize(q, 5, 64), d2 = discretize(q, 5, 64);
  auto n1 = nonreal_spectrum(d1), n2 = nonreal_spectrum(d2);
  CHECK(n1.values == n2.values);
  std::filesystem::remove(path);
}

TEST_CASE("discretization of the free operator") {
  auto d = discretize(Potential::step(0), 10, 32);
  CHECK(d.h == doctest::Approx(20.0 / 33));
  CHECK(std::none_of(d.x.begin(), d.x.end(), [](double x) { return x == 0; }));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(d.dense_t());
  for (int k = 1; k <= 32; ++k) {
    double exact = (2 - 2 * std::cos(k * M_PI / 33)) / (d.h * d.h);
    CHECK(es.eigenvalues()(k - 1) == doctest::Approx(exact).epsilon(1e-12));
  }
  auto spec = sl_spectrum(d);
  for (auto z : spec.values) CHECK(std::abs(z.imag()) < 1e-10);
  CHECK(nonreal_spectrum(d).values.empty());
  CHECK_THROWS(discretize(Potential::step(0), 10, 31));
  CHECK_THROWS(discretize(Potential::step(0), 10, 8));
}

TEST_CASE("Aberth iteration matches a dense eigensolver") {
  Rng rng(17);
  for (int trial = 0; trial < 5; ++trial) {
    Tridiagonal t;
    int n = 120;
    for (int i = 0; i < n; ++i) t.diag.push_back(rng.uniform(-3, 3));
    for (int i = 0; i + 1 < n; ++i) {
      t.lower.push_back(rng.uniform(-2, 2));
      t.upper.push_back(rng.uniform(-2, 2));
    }
    Eigen::EigenSolver<Eigen::MatrixXd> es(t.dense(), false);
    std::vector<ComplexPoint> ref(es.eigenvalues().data(), es.eigenvalues().data() + n);
    auto got = tridiagonal_eigenvalues(t);
    REQUIRE(got.values.size() == ref.size());
    for (auto z : got.values) CHECK(nearest(ref, z) < 1e-8 * (1 + std::abs(z)));
    for (auto z : ref) CHECK(nearest(got.values, z) < 1e-8 * (1 + std::abs(z)));
  }

  auto d = discretize(Potential::step(20), 8, 200);
  Eigen::EigenSolver<Eigen::MatrixXd> es(d.dense_a(), false);
  std::vector<ComplexPoint> ref(es.eigenvalues().data(), es.eigenvalues().data() + d.n);
  auto got = sl_spectrum(d);
  for (auto z : got.values) CHECK(nearest(ref, z) < 1e-7 * (1 + std::abs(z)));
}

TEST_CASE("inverse iteration eigenvector") {
  auto d = discretize(Potential::gaussian(3), 6, 100);
  auto spec = sl_spectrum(d);
  auto a = d.dense_a();
  int tested = 0;
  for (auto z : spec.values) {
    if (z.imag() != 0 || ++tested > 10) continue;
    auto v = tridiagonal_eigenvector(d.a, z.real());
    Eigen::Map<Eigen::VectorXd> f(v.data(), v.size());
    CHECK(f.norm() == doctest::Approx(1));
    CHECK((a * f - z.real() * f).norm() < 1e-7 * (1 + std::abs(z)));
  }
  CHECK(tested > 0);
}

TEST_CASE("non-real eigenvalues of a deep well are symmetric and contained") {
  auto q = Potential::step(20);
  auto d = discretize(q, 10, 600);
  auto rep = containment_report(d, q, 2);
  REQUIRE_FALSE(rep.rows.empty());
  CHECK(rep.conjugate_symmetric);
  REQUIRE(rep.parity_symmetric.has_value());
  CHECK(*rep.parity_symmetric);
  auto nr = nonreal_spectrum(d);
  CHECK(nr.unpaired.empty());
  for (auto z : nr.values) {
    double tol = 1e-7 * (1 + std::abs(z));
    CHECK(nearest(nr.values, std::conj(z)) < tol);
    CHECK(nearest(nr.values, -z) < tol);
  }
  for (const auto& r : rep.rows) {
    CHECK(r.in_box);
    CHECK(r.in_bst);
  }
  CHECK(rep.report.verified());
}

TEST_CASE("free operator containment is vacuous") {
  auto q = Potential::step(0);
  auto rep = containment_report(discretize(q, 10, 200), q, 2);
  CHECK(rep.rows.empty());
  CHECK(rep.report.verified());
  CHECK(rep.q_norm == 0);
}

TEST_CASE("refinement changes the tracked eigenvalues like h^2") {
  auto q = Potential::gaussian(15);
  auto track = [&](int n) {
    auto nr = nonreal_spectrum(discretize(q, 12, n));
    REQUIRE_FALSE(nr.values.empty());
    return *std::max_element(nr.values.begin(), nr.values.end(),
                             [](ComplexPoint x, ComplexPoint y) { return x.imag() < y.imag() || (x.imag() == y.imag() && x.real() < y.real()); });
  };
  // h roughly halves at each step
  ComplexPoint z1 = track(400), z2 = track(800), z3 = track(1600);
  double e1 = std::abs(z1 - z2), e2 = std::abs(z2 - z3);
  CHECK(e2 < e1);
  CHECK(e1 / e2 == doctest::Approx(4).epsilon(0.1));
}

TEST_CASE("lemma inequality") {
  auto f = TestFunction::gaussian(1, M_PI);
  auto zero = lemma_ls_check(f, Potential::step(0), 2, 1);
  CHECK(zero.lhs == 0);
  CHECK(zero.holds);

  // g = 1 on [0, 1] up to sign
  auto g = Potential::step(1, 0.5, 0.5);
  auto res = lemma_ls_check(f, g, 2, 1);
  double lhs = std::sqrt(std::erf(std::sqrt(2 * M_PI)) / (2 * kSqrt2));
  double fpp = std::sqrt(simpson([](double x) {
    double v = (4 * M_PI * M_PI * x * x - 2 * M_PI) * std::exp(-M_PI * x * x);
    return v * v;
  }, -10, 10, 400000));
  double rhs = kSqrt2 * (std::pow(2.0, -0.25) + fpp / (4 * std::sqrt(3.0) * M_PI * M_PI));
  CHECK(res.lhs == doctest::Approx(lhs).epsilon(1e-8));
  CHECK(res.rhs == doctest::Approx(rhs).epsilon(1e-8));
  CHECK(res.holds);
  CHECK(f.second_derivative_l2_norm() == doctest::Approx(fpp).epsilon(1e-8));

  Rng rng(23);
  for (int pair = 0; pair < 20; ++pair) {
    auto tf = pair % 2 ? TestFunction::hermite(rng.integer(0, 5), rng.uniform(0.5, 2), rng.uniform(0.3, 3), rng.uniform(-2, 2))
                       : TestFunction::gaussian(rng.uniform(0.5, 2), rng.uniform(0.1, 5), rng.uniform(-2, 2));
    double depth = rng.uniform(0.5, 10), width = rng.uniform(0.1, 3), center = rng.uniform(-2, 2);
    auto pot = pair % 3 == 0 ? Potential::step(depth, width, center)
             : pair % 3 == 1 ? Potential::gaussian(depth, width, center)
                             : Potential::lorentzian(depth, width, center);
    for (int i = 0; i < 20; ++i) {
      double r = std::pow(10.0, -2 + 4 * i / 19.0);
      CHECK(lemma_ls_check(tf, pot, 2 + pair % 3, r).holds);
    }
  }
}

TEST_CASE("Hermite functions are normalized") {
  for (int k = 0; k < 6; ++k) {
    auto h = TestFunction::hermite(k, 1, 1, 0);
    double n2 = simpson([&](double x) { return h(x) * h(x); }, -15, 15, 200000);
    CHECK(n2 == doctest::Approx(1).epsilon(1e-10));
    CHECK(h.l2_norm() == doctest::Approx(1).epsilon(1e-10));
    // second derivative by central differences
    for (double x : {-1.3, 0.2, 2.1}) {
      double fd = (h(x + 1e-4) - 2 * h(x) + h(x - 1e-4)) / 1e-8;
      CHECK(h.second_derivative(x) == doctest::Approx(fd).epsilon(1e-5));
    }
  }
}

TEST_CASE("Hilbert form quotient") {
  auto ind = tau0_hilbert_form(HalfLineProfile::indicator(1, 2), HalfLineProfile::zero());
  CHECK(std::abs(ind.quotient - (1 + 2 / M_PI * (10 * std::log(2.0) - 6 * std::log(3.0)))) < 1e-6);
  for (auto [l, h] : {std::pair{0.5, 3.0}, {2.0, 50.0}, {1e-3, 1.0}}) {
    auto r = tau0_hilbert_form(HalfLineProfile::indicator(l, h), HalfLineProfile::zero());
    CHECK(std::abs(r.quotient - indicator_quotient(l, h)) < 1e-6);
    CHECK(r.quotient <= 3 + 1e-4);
  }
  auto half = tau0_hilbert_form(HalfLineProfile::power(-0.5, 1, 1e6), HalfLineProfile::zero());
  CHECK(half.quotient <= 3 + 1e-4);

  auto ext = tau0_hilbert_form(HalfLineProfile::power(-0.5, 1, 1e6), HalfLineProfile::power(-0.5, 1, 1e6, -1));
  CHECK(ext.quotient >= 4.5);
  CHECK(ext.quotient <= 3 + 2 * kSqrt2 + 1e-4);
  CHECK(ext.quotient == doctest::Approx(5.098998044968936).epsilon(1e-7));

  auto same = tau0_hilbert_form(HalfLineProfile::indicator(1, 4), HalfLineProfile::indicator(1, 4));
  CHECK(same.quotient <= 3 + 2 * kSqrt2 + 1e-4);
}
