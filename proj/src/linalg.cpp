#include "kencl/linalg.hpp"

#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace kencl {

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

double min_singular_value(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(svd.singularValues().size() - 1);
}

double hermitian_max_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(es.eigenvalues().size() - 1);
}

double hermitian_min_eigenvalue(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_hermitian(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  double scale = std::max(1.0, spectral_norm(m));
  return spectral_norm(m - m.adjoint()) <= rel_tol * scale;
}

Matrix signature_matrix(const std::vector<int>& signature) {
  const auto n = static_cast<Eigen::Index>(signature.size());
  Matrix j = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    int s = signature[static_cast<std::size_t>(i)];
    if (s != 1 && s != -1) throw std::invalid_argument("signature entries must be +1 or -1");
    j(i, i) = static_cast<double>(s);
  }
  return j;
}

Matrix random_gaussian(Rng& rng, int rows, int cols) {
  Matrix g(rows, cols);
  for (int c = 0; c < cols; ++c)
    for (int r = 0; r < rows; ++r) g(r, c) = rng.complex_normal();
  return g;
}

Matrix random_unitary(Rng& rng, int n) {
  Matrix g = random_gaussian(rng, n, n);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // fix column phases so the distribution is Haar
  for (int i = 0; i < n; ++i) {
    std::complex<double> d = r(i, i);
    double ad = std::abs(d);
    if (ad > 0.0) q.col(i) *= d / ad;
  }
  return q;
}

Matrix hermitian_with_spectrum(Rng& rng, const std::vector<double>& spectrum) {
  const int n = static_cast<int>(spectrum.size());
  Matrix u = random_unitary(rng, n);
  Eigen::VectorXd d(n);
  for (int i = 0; i < n; ++i) d(i) = spectrum[static_cast<std::size_t>(i)];
  Matrix h = u * d.cast<std::complex<double>>().asDiagonal() * u.adjoint();
  return 0.5 * (h + h.adjoint());
}

EigenSystem eigen_system(const Matrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigen_system needs a square matrix");
  EigenSystem out;
  if (m.rows() == 0) return out;
  Eigen::ComplexEigenSolver<Matrix> es(m, true);
  if (es.info() != Eigen::Success) throw std::runtime_error("eigenvalue iteration did not converge");
  out.vectors = es.eigenvectors();
  for (Eigen::Index i = 0; i < out.vectors.cols(); ++i) {
    double nrm = out.vectors.col(i).norm();
    if (nrm > 0.0) out.vectors.col(i) /= nrm;
    out.values.push_back(es.eigenvalues()(i));
  }
  Eigen::JacobiSVD<Matrix> svd(out.vectors);
  const auto& sv = svd.singularValues();
  double smin = sv(sv.size() - 1);
  out.condition = smin > 0.0 ? sv(0) / smin : std::numeric_limits<double>::infinity();
  return out;
}

std::pair<Matrix, Matrix> hpd_sqrt_and_inverse(const Matrix& p) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(p);
  if (es.info() != Eigen::Success) throw std::runtime_error("Hermitian eigensolver failed");
  const auto& d = es.eigenvalues();
  if (d.size() > 0 && !(d(0) > 0.0)) throw std::domain_error("matrix is not positive definite");
  Eigen::VectorXd s = d.cwiseSqrt();
  Eigen::VectorXd si = s.cwiseInverse();
  const Matrix& u = es.eigenvectors();
  Matrix root = u * s.cast<std::complex<double>>().asDiagonal() * u.adjoint();
  Matrix inv = u * si.cast<std::complex<double>>().asDiagonal() * u.adjoint();
  return {root, inv};
}

}  // namespace kencl
