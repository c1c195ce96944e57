#include "kencl/instance_generator.hpp"

#include <cmath>
#include <stdexcept>

namespace kencl::lab {

namespace {

std::vector<double> uniform_spectrum(Rng& rng, int n, double lo, double hi) {
  std::vector<double> d(static_cast<std::size_t>(n));
  for (auto& x : d) x = rng.uniform(lo, hi);
  return d;
}

Matrix unit_norm_gaussian(Rng& rng, int rows, int cols) {
  Matrix g = random_gaussian(rng, rows, cols);
  return g / spectral_norm(g);
}

}  // namespace

BlockOperator random_block_operator(Rng& rng, const BlockInstanceParams& p) {
  if (p.min_dim < 2 || p.max_dim < p.min_dim) throw std::invalid_argument("invalid dimension bounds");
  const int n = rng.integer(p.min_dim, p.max_dim);
  const int np = rng.integer(1, n - 1);
  const int nm = n - np;
  const double spread = rng.uniform(p.min_spread, p.max_spread);
  const double overlap = rng.uniform(0.0, 0.5) * spread;
  Matrix sp = hermitian_with_spectrum(rng, uniform_spectrum(rng, np, -overlap, spread));
  Matrix sm = hermitian_with_spectrum(rng, uniform_spectrum(rng, nm, -spread, overlap));
  const double coupling = rng.uniform(p.min_coupling, p.max_coupling);
  Matrix m = coupling * spread * unit_norm_gaussian(rng, np, nm);
  if (rng.uniform() < 0.5) {
    // relatively bounded part, growing with S-
    m += rng.uniform(0.0, 0.5) * unit_norm_gaussian(rng, np, nm) * sm;
  }
  return BlockOperator(sp, sm, m);
}

KreinPerturbationProblem random_perturbation_problem(Rng& rng, const PerturbationInstanceParams& p) {
  if (p.min_dim < 2 || p.max_dim < p.min_dim) throw std::invalid_argument("invalid dimension bounds");
  const int n = rng.integer(p.min_dim, p.max_dim);
  const int np = rng.integer(1, n - 1);
  std::vector<int> sig(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < np; ++i) sig[static_cast<std::size_t>(i)] = 1;
  std::vector<double> eig(static_cast<std::size_t>(n));
  for (auto& x : eig) x = std::exp(rng.uniform(std::log(p.min_eig), std::log(p.max_eig)));
  Matrix pmat = hermitian_with_spectrum(rng, eig);
  Matrix j = signature_matrix(sig);
  Matrix a0 = j * pmat;
  Matrix v = Matrix::Zero(n, n);
  double kind = rng.uniform();
  double eps = rng.uniform(0.01, 1.0) * p.max_perturbation;
  if (kind < 0.15) {
    // V = 0
  } else if (kind < 0.3) {
    v = eps * j;
  } else {
    std::vector<double> hs = uniform_spectrum(rng, n, -1.0, 1.0);
    Matrix h = hermitian_with_spectrum(rng, hs);
    if (rng.uniform() < 0.5) {
      v = eps * j * h;
    } else {
      // relative perturbation of size eps against A0
      auto [root, inv] = hpd_sqrt_and_inverse(pmat);
      Matrix rel = root * h * root;
      v = eps * j * (0.5 * (rel + rel.adjoint())) / std::max(1.0, spectral_norm(root) * spectral_norm(root) / 2.0);
    }
  }
  return KreinPerturbationProblem(sig, a0, v);
}

}  // namespace kencl::lab
