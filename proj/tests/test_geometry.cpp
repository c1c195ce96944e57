#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "kencl/geometry.hpp"
#include "kencl/random.hpp"

using namespace kencl;
using namespace kencl::geometry;

namespace {

// Minimum over a uniform grid of |lambda - t|^2 - s (a + b t^2), refined once around the best node.
double grid_min_g(double a, double b, double s, ComplexPoint lambda, double lo, double hi, int nodes) {
  auto g = [&](double t) { return std::norm(lambda - t) - s * (a + b * t * t); };
  double best = g(lo), best_t = lo;
  for (int i = 0; i <= nodes; ++i) {
    double t = lo + (hi - lo) * i / nodes;
    double v = g(t);
    if (v < best) best = v, best_t = t;
  }
  double step = (hi - lo) / nodes;
  for (int i = -200; i <= 200; ++i) {
    double t = std::clamp(best_t + step * i / 200.0, lo, hi);
    best = std::min(best, g(t));
  }
  return best;
}

}  // namespace

TEST_CASE("phi evaluates the quotient") {
  CHECK(phi(RelBound(3, 0.9), {0, 1}, 0.0) == doctest::Approx(3.0));
  CHECK(phi(RelBound(1, 0.5), {2, 1}, 0.75) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(phi(RelBound(0, 0.25), {0, 4}, 1e9) == doctest::Approx(0.25).epsilon(1e-9));
  CHECK_THROWS_AS(phi(RelBound(1, 0.5), {2, 0}, 2.0), std::domain_error);
}

TEST_CASE("phi approaches b at infinity") {
  Rng rng(4);
  for (int k = 0; k < 10000; ++k) {
    RelBound bd(rng.uniform(0, 20), rng.uniform(0, 0.99));
    ComplexPoint lam(rng.uniform(-30, 30), rng.uniform(0.01, 30));
    for (double t : {1e6 * (1 + std::abs(lam)), -1e6 * (1 + std::abs(lam))}) {
      // phi(t) - b = (a - b|lambda|^2 + 2 b t Re lambda) / |t - lambda|^2
      double bound = (bd.a() + bd.b() * std::norm(lam) + 2 * bd.b() * std::abs(t * lam.real())) / std::norm(t - lam);
      CHECK(std::abs(phi(bd, lam, t) - bd.b()) <= bound * (1 + 1e-9) + 1e-15);
      CHECK(std::abs(phi(bd, lam, t) - bd.b()) < 2.1e-6);
    }
  }
}

TEST_CASE("relative bound rejects b near one") {
  CHECK_THROWS_AS(RelBound(1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(RelBound(-1, 0.5), std::invalid_argument);
  CHECK_NOTHROW(RelBound(0, 0.999));
}

TEST_CASE("phi extrema branches") {
  auto p = phi_extrema(RelBound(1, 0.5), {2, 1});
  CHECK(p.branch == PhiBranch::re_nonzero);
  CHECK(*p.m_lambda == doctest::Approx(0.75));
  CHECK(*p.t_max == doctest::Approx(0.75 + std::sqrt(2.5625)));
  CHECK(*p.t_min == doctest::Approx(0.75 - std::sqrt(2.5625)));

  auto q = phi_extrema(RelBound(3, 0.25), {0, 4});
  CHECK(q.branch == PhiBranch::re_zero_min);
  CHECK(*q.t_min == 0.0);
  CHECK_FALSE(q.t_max.has_value());

  auto r = phi_extrema(RelBound(1, 0.0), {5, 2});
  CHECK(r.branch == PhiBranch::b_zero);
  CHECK(*r.t_max == 5.0);
  CHECK_FALSE(r.t_min.has_value());

  CHECK(phi_extrema(RelBound(4, 0.25), {0, 4}).branch == PhiBranch::constant);
  CHECK(phi_extrema(RelBound(4, 0.25), {0, 1}).branch == PhiBranch::re_zero_max);
  CHECK_THROWS_AS(phi_extrema(RelBound(1, 0.5), {2, 0}), std::domain_error);
}

TEST_CASE("t_max beats a dense grid and phi(m) = b") {
  Rng rng(7);
  for (int k = 0; k < 300; ++k) {
    RelBound bd(rng.uniform(0, 10), rng.uniform(0.01, 0.95));
    ComplexPoint lam(rng.uniform(-20, 20), rng.uniform(0.1, 10));
    auto p = phi_extrema(bd, lam);
    REQUIRE(p.branch == PhiBranch::re_nonzero);
    CHECK(std::abs(phi(bd, lam, *p.m_lambda) - bd.b()) <= 1e-10 * (1 + bd.b()));
    double fmax = phi(bd, lam, *p.t_max), fmin = phi(bd, lam, *p.t_min);
    double gmax = 0, gmin = kInf;
    for (int i = -20000; i <= 20000; ++i) {
      double t = i * 0.01;
      gmax = std::max(gmax, phi(bd, lam, t));
      gmin = std::min(gmin, phi(bd, lam, t));
    }
    CHECK(gmax <= fmax * (1 + 1e-8));
    CHECK(gmin >= fmin * (1 - 1e-8));
  }
}

TEST_CASE("sup of the resolvent factor bound") {
  CHECK(sup_resolvent_factor_bound(RelBound(0, 0), SpectrumModel::real_line(), {1, 1}) == 0.0);

  RelBound bd(3, 0.9);
  ComplexPoint lam(0, 10);
  double oracle = 0;
  for (int i = -1000000; i <= 1000000; ++i) oracle = std::max(oracle, phi(bd, lam, i * 0.01));
  double v = sup_resolvent_factor_bound(bd, SpectrumModel::real_line(), lam);
  CHECK(v * v >= oracle * (1 - 1e-12));
  CHECK(v * v == doctest::Approx(std::max(oracle, 0.9)).epsilon(1e-6));

  RelBound bd2(10, 0.4);
  CHECK(sup_resolvent_factor_bound(bd2, SpectrumModel::interval(-kInf, 10), {30, 0}) <=
        std::sqrt(0.4) + 1e-15);
  CHECK_THROWS_AS(sup_resolvent_factor_bound(bd2, SpectrumModel::interval(-1, 1), {0.5, 0}),
                  std::domain_error);
}

TEST_CASE("disk region membership examples") {
  DiskFamilyRegion bone(RelBound(10, 0.4), SpectrumModel::interval(-10, 10));
  auto m0 = disk_region_membership(bone, {0, 0});
  CHECK(m0.inside);
  CHECK(m0.margin == doctest::Approx(-std::sqrt(10.0)));
  CHECK_FALSE(disk_region_membership(bone, {20, 0}).inside);
  CHECK(disk_region_membership(bone, {15, 0}).inside);
}

TEST_CASE("disk membership agrees with a brute-force t-grid on random instances") {
  Rng rng(2024);
  int ambiguous = 0;
  for (int k = 0; k < 10000; ++k) {
    double a = rng.uniform(0, 20), b = rng.uniform(0, 0.9), gamma = rng.uniform(0, 15);
    double s = k % 3 == 0 ? rng.uniform(0.5, 1.0 / (b + 0.1)) : 1.0;
    DiskFamilyRegion region(RelBound(a, b), SpectrumModel::interval(-gamma, gamma), s);
    double reach = gamma + std::sqrt(s * (a + b * gamma * gamma)) + 1;
    ComplexPoint lam(rng.uniform(-reach, reach), rng.uniform(-reach, reach));
    double g = grid_min_g(a, b, s, lam, -gamma, gamma, 4000);
    auto m = disk_region_membership(region, lam);
    double scale = 1 + std::norm(lam);
    if (std::abs(g) <= 1e-9 * scale) {
      ++ambiguous;
      continue;
    }
    CHECK((g <= 0) == m.inside);
    CHECK((m.margin <= 0) == m.inside);
    CHECK(disk_region_contains(region, std::conj(lam)) == m.inside);
    CHECK(disk_region_contains(region, -lam) == m.inside);
  }
  CHECK(ambiguous < 10);
}

TEST_CASE("regions grow with a") {
  Rng rng(99);
  for (int k = 0; k < 2000; ++k) {
    double a = rng.uniform(0, 5), b = rng.uniform(0, 0.8), gamma = rng.uniform(0, 5);
    DiskFamilyRegion small(RelBound(a, b), SpectrumModel::interval(-gamma, gamma));
    DiskFamilyRegion big(RelBound(a + rng.uniform(0, 5), b), SpectrumModel::interval(-gamma, gamma));
    ComplexPoint lam(rng.uniform(-12, 12), rng.uniform(-12, 12));
    if (disk_region_contains(small, lam)) CHECK(disk_region_contains(big, lam));
  }
}

TEST_CASE("hull membership") {
  RelBound bd(3, 0.9);
  CHECK(hull_membership(bd, {0, std::sqrt(3.0) * (1 - 1e-15)}));
  CHECK_FALSE(hull_membership(RelBound(0, 0), {0, 1e-3}));
  ComplexPoint z(0, std::sqrt(30.0) * 0.999);
  CHECK_FALSE(hull_membership(bd, z));
  CHECK(coarse_hull_membership(bd, z));
}

TEST_CASE("hull tangency identities") {
  CHECK(hull_tangency(RelBound(1, 0), 7) == 7);
  CHECK(hull_tangency(RelBound(1, 0.9), 10) == doctest::Approx(1.0));
  CHECK(hull_tangency(RelBound(1, 0.5), -4) == doctest::Approx(-2.0));

  Rng rng(5);
  for (int k = 0; k < 10000; ++k) {
    double a = rng.uniform(0, 10), b = rng.uniform(0, 0.95), t0 = rng.uniform(-50, 50);
    RelBound bd(a, b);
    double t1 = hull_tangency(bd, t0);
    // disk boundary and hull boundary squared heights at t1
    double psi = a + b * t0 * t0 - (t1 - t0) * (t1 - t0);
    double hull = a + b / (1 - b) * t1 * t1;
    CHECK(std::abs(psi - hull) <= 1e-10 * (1 + std::abs(hull)));
    CHECK((t1 - t0) * (t1 - t0) <= b * t0 * t0 * (1 + 1e-12) + 1e-300);
    // the disk stays under the hull
    for (int i = 0; i <= 20; ++i) {
      double r2 = a + b * t0 * t0;
      double t = t0 + std::sqrt(r2) * (-1 + i / 10.0);
      double disk = r2 - (t - t0) * (t - t0);
      CHECK(disk <= (a + b / (1 - b) * t * t) * (1 + 1e-10) + 1e-10);
    }
  }
}

TEST_CASE("factor norm threshold") {
  CHECK(factor_norm_threshold(RelBound(0, 0.5), 0) == 0.0);
  CHECK(factor_norm_threshold(RelBound(10, 0.4), 10) == doctest::Approx(10 + std::sqrt(125.0)));
  CHECK(factor_norm_threshold(RelBound(10, 0.4), 0) == doctest::Approx(5.0));
  CHECK_THROWS(factor_norm_threshold(RelBound(1, 0), 1));
}

TEST_CASE("perturbation regions") {
  auto r0 = perturbation_regions(0, 0, 3, -1);
  CHECK(r0.gamma == 0.0);
  CHECK(disk_region_contains(r0.worse, {0, 0}));
  CHECK_FALSE(disk_region_contains(r0.worse, {1e-6, 0}));

  double tau = 3 + 2 * std::sqrt(2.0);
  auto r1 = perturbation_regions(2, 0.1, tau, -10);
  CHECK(r1.gamma == doctest::Approx(std::sqrt((1 + tau) * 2 / (2 * tau))).epsilon(1e-14));
  CHECK(r1.gamma == doctest::Approx(1.0823922002923938));
  REQUIRE(r1.better.has_value());
  CHECK(r1.better->radius_scale() == doctest::Approx((1 + tau) / (2 * tau * 0.9)));

  auto r2 = perturbation_regions(1, 0.6, 2, -0.01);
  CHECK(r2.gamma == doctest::Approx(0.015));
  CHECK_FALSE(r2.better.has_value());
  CHECK_THROWS(perturbation_regions(1, 0.1, 0.5, -1));
}

TEST_CASE("boundary polylines") {
  SLBox box{1, 2};
  auto pts = boundary_polyline(box, 16);
  for (ComplexPoint c : {ComplexPoint(-2, 1), ComplexPoint(2, 1)})
    CHECK(std::any_of(pts.begin(), pts.end(), [&](ComplexPoint z) { return std::abs(z - c) < 1e-12; }));

  auto hull = hull_boundary_polyline(RelBound(3, 0.9), 401, {-5, 5});
  auto mid = std::min_element(hull.begin(), hull.end(),
                              [](ComplexPoint x, ComplexPoint y) { return std::abs(x.real()) < std::abs(y.real()); });
  CHECK(mid->imag() == doctest::Approx(std::sqrt(3.0)));

  DiskFamilyRegion bone(RelBound(10, 0.4), SpectrumModel::interval(-10, 10));
  auto line = boundary_polyline(bone, 400);
  REQUIRE(!line.empty());
  double poly_max = 0;
  for (auto z : line) poly_max = std::max(poly_max, z.imag());
  // 2-D grid oracle
  double grid_max = 0;
  for (int i = 0; i <= 400; ++i)
    for (int j = 0; j <= 800; ++j) {
      ComplexPoint z(-20 + 0.1 * i, 0.01 * j);
      if (disk_region_contains(bone, z)) grid_max = std::max(grid_max, z.imag());
    }
  CHECK(poly_max >= grid_max - 1e-9);
  CHECK(poly_max <= grid_max + 0.011);
  CHECK(poly_max <= std::sqrt(50.0) + 1e-9);
}

TEST_CASE("region area and extent") {
  // a single disk of radius 2
  DiskFamilyRegion disk(RelBound(4, 0.5), SpectrumModel::from_points({0}));
  CHECK(region_area(disk) == doctest::Approx(4 * M_PI).epsilon(1e-8));
  auto ext = real_extent(disk);
  CHECK(ext.lo == doctest::Approx(-2));
  CHECK(ext.hi == doctest::Approx(2));
}
