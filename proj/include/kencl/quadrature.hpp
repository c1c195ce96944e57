#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace kencl {

/// Raised when an integral fails to reach its requested accuracy.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Full (both-sided) Gauss-Legendre rule of order N on [-1, 1].
template <unsigned N>
const std::vector<std::pair<double, double>>& gauss_legendre_rule() {
  static const std::vector<std::pair<double, double>> rule = [] {
    using G = boost::math::quadrature::gauss<double, N>;
    std::vector<std::pair<double, double>> r;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (x[i] == 0.0) {
        r.emplace_back(0.0, w[i]);
      } else {
        r.emplace_back(x[i], w[i]);
        r.emplace_back(-x[i], w[i]);
      }
    }
    return r;
  }();
  return rule;
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a vector-valued integrand.
/// `Value` must support +, -, scalar * and `size_of(v)` must return a nonnegative
/// magnitude used for the error estimate.
template <class F, class Norm>
auto adaptive_gauss_kronrod(F f, double a, double b, double abs_tol, Norm size_of,
                            int max_intervals = 4000) {
  using Value = decltype(f(a));
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using GL = boost::math::quadrature::gauss<double, 7>;
  const auto& xk = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = GL::weights();

  struct Piece {
    double lo, hi;
    Value value;
    double error;
  };
  auto evaluate = [&](double lo, double hi) {
    double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
    Value fc = f(c);
    Value kron = wk[0] * fc;
    Value gauss = wg[0] * fc;
    for (std::size_t i = 1; i < xk.size(); ++i) {
      Value s = f(c - h * xk[i]) + f(c + h * xk[i]);
      kron = kron + wk[i] * s;
      if (i % 2 == 0) gauss = gauss + wg[i / 2] * s;
    }
    Value kv = h * kron;
    Value gv = h * gauss;
    return Piece{lo, hi, kv, size_of(kv - gv)};
  };

  std::vector<Piece> pieces{evaluate(a, b)};
  while (true) {
    double total_err = 0.0;
    std::size_t worst = 0;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      total_err += pieces[i].error;
      if (pieces[i].error > pieces[worst].error) worst = i;
    }
    if (total_err <= abs_tol) break;
    if (static_cast<int>(pieces.size()) >= max_intervals)
      throw QuadratureError("adaptive quadrature did not reach the requested tolerance");
    Piece p = pieces[worst];
    double mid = 0.5 * (p.lo + p.hi);
    pieces[worst] = evaluate(p.lo, mid);
    pieces.push_back(evaluate(mid, p.hi));
  }
  Value sum = pieces[0].value;
  for (std::size_t i = 1; i < pieces.size(); ++i) sum = sum + pieces[i].value;
  return sum;
}

/// Scalar integral on [a, b] (a, b may be infinite) to relative tolerance `rel_tol`.
/// Throws QuadratureError when the error estimate stays above the target.
double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol = 1e-10);

/// Sum of `integrate` over consecutive pieces [cuts[i], cuts[i+1]].
double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& cuts,
                        double rel_tol = 1e-10);

}  // namespace kencl
