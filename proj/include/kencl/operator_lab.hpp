#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kencl/geometry.hpp"
#include "kencl/linalg.hpp"
#include "kencl/verification_report.hpp"

namespace kencl::lab {

/// S = [[S+, M], [-M*, S-]] with Hermitian diagonal blocks; J = diag(I, -I).
class BlockOperator {
 public:
  BlockOperator(Matrix s_plus, Matrix s_minus, Matrix m);

  const Matrix& s_plus() const { return s_plus_; }
  const Matrix& s_minus() const { return s_minus_; }
  const Matrix& m() const { return m_; }
  int n_plus() const { return static_cast<int>(s_plus_.rows()); }
  int n_minus() const { return static_cast<int>(s_minus_.rows()); }
  std::vector<int> signature() const;

 private:
  Matrix s_plus_;
  Matrix s_minus_;
  Matrix m_;
};

Matrix assemble_block(const BlockOperator& b);

/// ||T (S - lambda)^{-1}|| for a fixed pair (T, S), S Hermitian. The eigen-decomposition
/// of S is computed once so repeated evaluations cost one small Hermitian eigensolve.
class ResolventFactor {
 public:
  ResolventFactor(const Matrix& t, const Matrix& s);

  double norm(ComplexPoint lambda) const;
  /// Distance from lambda to the spectrum of S.
  double spectrum_distance(ComplexPoint lambda) const;
  const RealVector& spectrum() const { return spectrum_; }
  double scale() const { return scale_; }

 private:
  RealVector spectrum_;
  Matrix gram_;  // (T U)^* (T U)
  double scale_;
};

double resolvent_factor_norm(const Matrix& t, const Matrix& s, ComplexPoint lambda);

/// ||T (S - lambda)^{-1}|| >= 1 - 1e-10. Points within 1e-8 of the spectrum of S count as
/// members (see `k_set_member`).
bool k_set_membership(const Matrix& t, const Matrix& s, ComplexPoint lambda);
bool k_set_member(const ResolventFactor& f, ComplexPoint lambda);

/// Least a with ||T f||^2 <= a ||f||^2 + b ||S f||^2 for all f.
double min_relative_bound(const Matrix& t, const Matrix& s, double b);

/// ||(S - lambda)^{-1}||.
double resolvent_norm(const Matrix& s, ComplexPoint lambda);

class KreinPerturbationProblem {
 public:
  KreinPerturbationProblem(std::vector<int> signature, Matrix a0, Matrix v);

  const std::vector<int>& signature() const { return signature_; }
  Matrix j() const { return signature_matrix(signature_); }
  const Matrix& a0() const { return a0_; }
  const Matrix& v() const { return v_; }
  Matrix a() const { return a0_ + v_; }
  int dim() const { return static_cast<int>(signature_.size()); }
  /// Lower bound of J V.
  double v_lower() const;

 private:
  std::vector<int> signature_;
  Matrix a0_;
  Matrix v_;
};

struct ProjectionData {
  Matrix e_plus;
  Matrix e_minus;
  Matrix j0;
  double tau0 = 1.0;
};

ProjectionData spectral_projections(const KreinPerturbationProblem& problem);
ProjectionData spectral_projections(const std::vector<int>& signature, const Matrix& a0);

/// (1/pi) int_0^{horizon ||A0||} ((A0 + it)^{-1} + (A0 - it)^{-1}) dt by adaptive quadrature.
Matrix j0_by_quadrature(const Matrix& a0, double horizon_factor = 1e6, double tolerance = 1e-10);

struct RenormCheck {
  bool holds = true;
  /// Largest lhs / rhs over all inequalities and trials.
  double worst_ratio = 0.0;
  int trials = 0;
};

/// Checks the norm-comparison inequalities between ||.|| and ||.||_0 on random data.
RenormCheck renorm_check(const ProjectionData& data, const std::vector<int>& signature, int trials,
                         std::uint64_t seed);

struct BlockCheckOptions {
  double nonreal_tolerance = 1e-8;
  double sign_threshold = 1e-6;
  /// Relative gap below which eigenvalues count as clustered.
  double cluster_tolerance = 1e-6;
  /// b values for which the disk-union enclosure is checked.
  std::vector<double> b_grid{0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

VerificationReport verify_block_theorem(const BlockOperator& b, int lambda_samples, std::uint64_t seed,
                                        const BlockCheckOptions& options = {});

struct TmainOptions {
  /// Explicit tau; the value used is max(tau0, tau). Absent: tau = tau0.
  std::optional<double> tau;
  /// Step of the b grid {0, step, 2 step, ...} below 1.
  double b_step = 0.01;
  /// Restrict the fit to b = 0 (bounded perturbation).
  bool bounded_only = false;
  double nonreal_tolerance = 1e-8;
  double sign_threshold = 1e-6;
  double cluster_tolerance = 1e-6;
};

/// One admissible relative-bound pair for the perturbation theorem.
struct TmainFit {
  double a = 0.0;
  double b = 0.0;
  double area = 0.0;
};

VerificationReport verify_tmain(const KreinPerturbationProblem& problem, const TmainOptions& options = {});

/// Resolvent growth: order-one bound beyond the threshold radius, and the constant M of
/// ||(S - lambda)^{-1}|| <= M (1 + |lambda|)^2 / |Im lambda|^2 elsewhere off the real axis.
VerificationReport resolvent_order_check(const BlockOperator& b, double rel_b, int samples,
                                         std::uint64_t seed);

}  // namespace kencl::lab
