#include "kencl/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <lapacke.h>

namespace kencl {

namespace {

struct C {
  double re, im;
};

inline C sub(C a, C b) { return {a.re - b.re, a.im - b.im}; }
inline C mul(C a, C b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }
inline C inv(C a) {
  double d = a.re * a.re + a.im * a.im;
  return {a.re / d, -a.im / d};
}

// p(z) / p'(z) for det(A - z) through the continued-fraction recurrence
//   r_i = (d_i - z) - e_{i-1} / r_{i-1},  r_i' = -1 + e_{i-1} r_{i-1}' / r_{i-1}^2,
// using p'/p = sum r_i' / r_i. Evaluated for m points at once; the loop over points is
// innermost so it vectorizes, and every point sees the same operation order.
void newton_ratios(const std::vector<double>& d, const std::vector<double>& e, const double* zr_in,
                   const double* zi_in, std::size_t m, double tiny, double* out_re, double* out_im) {
  const std::size_t n = d.size();
  std::vector<double> v_ri_re(m), v_ri_im(m), v_dr_re(m), v_dr_im(m), v_s_re(m), v_s_im(m);
  double* __restrict ri_re = v_ri_re.data();
  double* __restrict ri_im = v_ri_im.data();
  double* __restrict dr_re = v_dr_re.data();
  double* __restrict dr_im = v_dr_im.data();
  double* __restrict s_re = v_s_re.data();
  double* __restrict s_im = v_s_im.data();
  const double* __restrict zr = zr_in;
  const double* __restrict zi = zi_in;
  for (std::size_t p = 0; p < m; ++p) {
    const double r_re = d[0] - zr[p], r_im = -zi[p];
    const double inv_den = 1.0 / (r_re * r_re + r_im * r_im);
    ri_re[p] = r_re * inv_den;
    ri_im[p] = -r_im * inv_den;
    dr_re[p] = -1.0;
    dr_im[p] = 0.0;
    s_re[p] = -ri_re[p];
    s_im[p] = -ri_im[p];
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double ek = e[k - 1], dk = d[k];
    for (std::size_t p = 0; p < m; ++p) {
      const double a = ri_re[p], b = ri_im[p];
      double rn_re = dk - zr[p] - ek * a;
      const double rn_im = -zi[p] - ek * b;
      const double q_re = a * a - b * b, q_im = 2.0 * a * b;
      const double drn_re = ek * (dr_re[p] * q_re - dr_im[p] * q_im) - 1.0;
      const double drn_im = ek * (dr_re[p] * q_im + dr_im[p] * q_re);
      rn_re += (rn_re == 0.0 && rn_im == 0.0) ? tiny : 0.0;
      const double inv_den = 1.0 / (rn_re * rn_re + rn_im * rn_im);
      const double na = rn_re * inv_den, nb = -rn_im * inv_den;
      s_re[p] += drn_re * na - drn_im * nb;
      s_im[p] += drn_re * nb + drn_im * na;
      ri_re[p] = na;
      ri_im[p] = nb;
      dr_re[p] = drn_re;
      dr_im[p] = drn_im;
    }
  }
  for (std::size_t p = 0; p < m; ++p) {
    const double inv_den = 1.0 / (s_re[p] * s_re[p] + s_im[p] * s_im[p]);
    out_re[p] = s_re[p] * inv_den;
    out_im[p] = -s_im[p] * inv_den;
  }
}

// Eigenvalues of the blocks where all off-diagonal products are positive (each block is
// similar to a symmetric tridiagonal matrix).
std::vector<double> block_eigenvalues(const std::vector<double>& d, const std::vector<double>& e) {
  const std::size_t n = d.size();
  std::vector<double> out;
  out.reserve(n);
  std::size_t start = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i + 1 < n && e[i] > 0.0) continue;
    const std::size_t len = i - start + 1;
    std::vector<double> dd(d.begin() + static_cast<long>(start), d.begin() + static_cast<long>(i + 1));
    std::vector<double> ee(len, 0.0);
    for (std::size_t k = 0; k + 1 < len; ++k) ee[k] = std::sqrt(e[start + k]);
    if (len > 1) {
      lapack_int info = LAPACKE_dsterf(static_cast<lapack_int>(len), dd.data(), ee.data());
      if (info != 0) throw std::runtime_error("dsterf failed while seeding the eigenvalue iteration");
    }
    out.insert(out.end(), dd.begin(), dd.end());
    start = i + 1;
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Eigen::MatrixXd Tridiagonal::dense() const {
  const auto n = static_cast<Eigen::Index>(diag.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    m(i, i) = diag[static_cast<std::size_t>(i)];
    if (i + 1 < n) {
      m(i + 1, i) = lower[static_cast<std::size_t>(i)];
      m(i, i + 1) = upper[static_cast<std::size_t>(i)];
    }
  }
  return m;
}

TridiagonalSpectrum tridiagonal_eigenvalues(const Tridiagonal& a, const AberthOptions& opt) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  if (a.lower.size() + 1 != n || a.upper.size() + 1 != n) throw std::invalid_argument("band length mismatch");
  std::vector<double> e(n > 1 ? n - 1 : 0);
  for (std::size_t i = 0; i + 1 < n; ++i) e[i] = a.lower[i] * a.upper[i];
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double row = std::abs(a.diag[i]);
    if (i > 0) row += std::abs(a.lower[i - 1]);
    if (i + 1 < n) row += std::abs(a.upper[i]);
    scale = std::max(scale, row);
  }
  if (scale == 0.0) {
    TridiagonalSpectrum zero;
    zero.values.assign(n, ComplexPoint(0.0, 0.0));
    zero.error_bounds.assign(n, 0.0);
    return zero;
  }
  const double tiny = 1e-300 + 1e-18 * scale;

  // seeds: block eigenvalues pushed off the axis by a fraction of the local gap
  std::vector<double> seeds = block_eigenvalues(a.diag, e);
  std::vector<double> zr(n), zi(n);
  for (std::size_t i = 0; i < n; ++i) {
    double gap = kInf;
    if (i > 0) gap = std::min(gap, seeds[i] - seeds[i - 1]);
    if (i + 1 < n) gap = std::min(gap, seeds[i + 1] - seeds[i]);
    if (!(gap > 0.0) || !std::isfinite(gap)) gap = 1e-8 * (1.0 + std::abs(seeds[i]));
    zr[i] = seeds[i];
    zi[i] = (i % 2 ? 1.0 : -1.0) * opt.displacement * gap;
  }

  // Jacobi-style sweeps over the roots that have not converged yet
  std::vector<std::size_t> active(n);
  for (std::size_t i = 0; i < n; ++i) active[i] = i;
  std::vector<double> ar, ai, nr_re, nr_im, sr, si;
  int it = 0;
  for (; it < opt.max_iterations && !active.empty(); ++it) {
    const std::size_t m = active.size();
    ar.resize(m);
    ai.resize(m);
    for (std::size_t p = 0; p < m; ++p) {
      ar[p] = zr[active[p]];
      ai[p] = zi[active[p]];
    }
    nr_re.resize(m);
    nr_im.resize(m);
    newton_ratios(a.diag, e, ar.data(), ai.data(), m, tiny, nr_re.data(), nr_im.data());
    // sum over j != i of 1 / (z_i - z_j); the self term has a zero difference and drops out
    sr.assign(m, 0.0);
    si.assign(m, 0.0);
    {
      double* __restrict psr = sr.data();
      double* __restrict psi = si.data();
      const double* __restrict par = ar.data();
      const double* __restrict pai = ai.data();
      for (std::size_t j = 0; j < n; ++j) {
        const double xr = zr[j], xi = zi[j];
        for (std::size_t p = 0; p < m; ++p) {
          const double dr = par[p] - xr, di = pai[p] - xi;
          double den = dr * dr + di * di;
          den += den == 0.0 ? 1.0 : 0.0;
          const double inv_den = 1.0 / den;
          psr[p] += dr * inv_den;
          psi[p] -= di * inv_den;
        }
      }
    }
    std::vector<std::size_t> still;
    for (std::size_t p = 0; p < m; ++p) {
      const C nr{nr_re[p], nr_im[p]};
      const C den = sub({1.0, 0.0}, mul(nr, C{sr[p], si[p]}));
      const C w = mul(nr, inv(den));
      const std::size_t i = active[p];
      zr[i] -= w.re;
      zi[i] -= w.im;
      const double step = std::hypot(w.re, w.im);
      if (!(step <= opt.rel_tolerance * std::hypot(zr[i], zi[i]) + opt.abs_tolerance * scale)) still.push_back(i);
    }
    active.swap(still);
  }
  if (!active.empty()) throw std::runtime_error("tridiagonal eigenvalue iteration did not converge");
  TridiagonalSpectrum out;
  out.iterations = it;
  out.values.resize(n);
  out.error_bounds.resize(n);
  std::vector<double> fr(n), fi(n);
  newton_ratios(a.diag, e, zr.data(), zi.data(), n, tiny, fr.data(), fi.data());
  for (std::size_t i = 0; i < n; ++i) {
    out.values[i] = ComplexPoint(zr[i], zi[i]);
    out.error_bounds[i] = static_cast<double>(n) * std::hypot(fr[i], fi[i]);
  }
  return out;
}

std::vector<double> tridiagonal_eigenvector(const Tridiagonal& a, double lambda) {
  const std::size_t n = a.size();
  if (n == 0) return {};
  double scale = 0.0;
  for (double v : a.diag) scale = std::max(scale, std::abs(v));
  for (double v : a.lower) scale = std::max(scale, std::abs(v));
  const auto ln = static_cast<lapack_int>(n);
  std::vector<double> dl, d, du, du2(n > 2 ? n - 2 : 1);
  std::vector<lapack_int> ipiv(n);
  auto factor = [&](double shift) {
    dl = a.lower;
    du = a.upper;
    d = a.diag;
    for (auto& v : d) v -= shift;
    return LAPACKE_dgttrf(ln, dl.data(), d.data(), du.data(), du2.data(), ipiv.data());
  };
  double shift = lambda + 1e-13 * (scale + std::abs(lambda));
  lapack_int info = factor(shift);
  if (info < 0) throw std::runtime_error("dgttrf rejected its arguments");
  if (info > 0) {
    // exactly singular: the shift hit an eigenvalue; nudge it
    shift = shift * (1.0 + 1e-12) + 1e-12;
    if (factor(shift) != 0) throw std::runtime_error("inverse iteration failed");
  }
  std::vector<double> x(n, 1.0 / std::sqrt(static_cast<double>(n)));
  for (int iter = 0; iter < 3; ++iter) {
    info = LAPACKE_dgttrs(LAPACK_COL_MAJOR, 'N', ln, 1, dl.data(), d.data(), du.data(), du2.data(), ipiv.data(),
                          x.data(), ln);
    if (info != 0) throw std::runtime_error("dgttrs failed");
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (!(nrm > 0.0) || !std::isfinite(nrm)) throw std::runtime_error("inverse iteration produced no direction");
    for (auto& v : x) v /= nrm;
  }
  return x;
}

}  // namespace kencl
