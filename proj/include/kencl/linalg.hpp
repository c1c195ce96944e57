#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "kencl/geometry.hpp"
#include "kencl/random.hpp"

namespace kencl {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Largest singular value.
double spectral_norm(const Matrix& m);
/// Smallest singular value.
double min_singular_value(const Matrix& m);

double hermitian_max_eigenvalue(const Matrix& h);
double hermitian_min_eigenvalue(const Matrix& h);

/// ||m - m*|| <= rel_tol * max(1, ||m||).
bool is_hermitian(const Matrix& m, double rel_tol);

/// diag(signature) as a complex matrix.
Matrix signature_matrix(const std::vector<int>& signature);

/// Haar-distributed unitary via QR of a complex Gaussian matrix.
Matrix random_unitary(Rng& rng, int n);
Matrix random_gaussian(Rng& rng, int rows, int cols);
/// U diag(d) U* with the given real spectrum.
Matrix hermitian_with_spectrum(Rng& rng, const std::vector<double>& spectrum);

struct EigenSystem {
  std::vector<ComplexPoint> values;
  Matrix vectors;  // columns normalized to unit length
  /// ||V|| ||V^{-1}||, a condition estimate for the eigenvalue problem.
  double condition = 1.0;
};

EigenSystem eigen_system(const Matrix& m);

/// Principal square root of a Hermitian positive definite matrix and its inverse.
std::pair<Matrix, Matrix> hpd_sqrt_and_inverse(const Matrix& p);

}  // namespace kencl
