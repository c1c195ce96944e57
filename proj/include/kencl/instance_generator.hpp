#pragma once

#include <cstdint>

#include "kencl/operator_lab.hpp"
#include "kencl/random.hpp"

namespace kencl::lab {

struct BlockInstanceParams {
  int min_dim = 2;
  /// Bound on the total dimension n+ + n-.
  int max_dim = 20;
  double min_spread = 1.0;
  double max_spread = 10.0;
  /// ||M|| relative to the diagonal spread.
  double min_coupling = 0.05;
  double max_coupling = 1.0;
};

/// S+ and S- with uniform spectra whose ranges overlap, and M = bounded part plus a part
/// relative to S-.
BlockOperator random_block_operator(Rng& rng, const BlockInstanceParams& params = {});

struct PerturbationInstanceParams {
  int min_dim = 2;
  int max_dim = 20;
  /// Spectrum of J A0 is log-uniform in [min_eig, max_eig].
  double min_eig = 0.1;
  double max_eig = 10.0;
  double max_perturbation = 1.0;
};

/// Mix of V = 0, V = eps J (J-non-negative perturbations) and general J-symmetric V.
KreinPerturbationProblem random_perturbation_problem(Rng& rng, const PerturbationInstanceParams& params = {});

}  // namespace kencl::lab
