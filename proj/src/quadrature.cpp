#include "kencl/quadrature.hpp"

#include <string>

namespace kencl {

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  double err = 0.0, l1 = 0.0;
  double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 20, rel_tol, &err, &l1);
  if (!std::isfinite(v) || err > 10.0 * rel_tol * l1 + 1e-300)
    throw QuadratureError("integral on [" + std::to_string(a) + ", " + std::to_string(b) +
                          "] did not converge (error estimate " + std::to_string(err) + ")");
  return v;
}

double integrate_pieces(const std::function<double(double)>& f, const std::vector<double>& cuts,
                        double rel_tol) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sum += integrate(f, cuts[i], cuts[i + 1], rel_tol);
  return sum;
}

}  // namespace kencl
