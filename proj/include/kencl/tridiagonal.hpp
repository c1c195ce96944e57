#pragma once

#include <vector>

#include <Eigen/Dense>

#include "kencl/geometry.hpp"

namespace kencl {

/// Real tridiagonal matrix stored by bands: lower[i] = A(i+1, i), upper[i] = A(i, i+1).
struct Tridiagonal {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  std::size_t size() const { return diag.size(); }
  Eigen::MatrixXd dense() const;
};

struct AberthOptions {
  int max_iterations = 300;
  /// Relative part of the stopping test |step| <= rel |z| + abs * scale.
  double rel_tolerance = 4e-16;
  double abs_tolerance = 8e-16;
  /// Initial imaginary displacement as a fraction of the local gap.
  double displacement = 0.1;
};

struct TridiagonalSpectrum {
  std::vector<ComplexPoint> values;
  /// Newton inclusion radius n |p / p'| at each returned value.
  std::vector<double> error_bounds;
  int iterations = 0;
};

/// All eigenvalues of a real tridiagonal matrix by simultaneous (Ehrlich-Aberth) iteration
/// on the three-term characteristic recurrence. Throws std::runtime_error when the
/// iteration fails to converge.
TridiagonalSpectrum tridiagonal_eigenvalues(const Tridiagonal& a, const AberthOptions& options = {});

/// Eigenvector for a real eigenvalue by inverse iteration; unit Euclidean norm.
std::vector<double> tridiagonal_eigenvector(const Tridiagonal& a, double lambda);

}  // namespace kencl
