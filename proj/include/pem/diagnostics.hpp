#ifndef PEM_DIAGNOSTICS_HPP
#define PEM_DIAGNOSTICS_HPP

#include <cmath>
#include <vector>

#include "pem/core_math.hpp"
#include "pem/online.hpp"

namespace pem {

/// B = (D + eps I)^{-1/2} O (D + eps I)^{-1/2}, with D = diag(C) and
/// O = C - D. Zero diagonal by construction.
template <typename Scalar>
SymmetricMatrix<Scalar> normalized_offdiag(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  const Eigen::Index n = C.dim();
  if (!(eps >= Scalar(0))) throw InvalidInput("normalized_offdiag: eps must be nonnegative");
  Vec<Scalar> inv_sqrt(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (C(i, i) < Scalar(-1e-12)) throw InvalidInput("normalized_offdiag: negative diagonal");
    const Scalar d = C(i, i) + eps;
    if (!(d > Scalar(0))) throw InvalidInput("normalized_offdiag: zero regularized diagonal");
    inv_sqrt(i) = Scalar(1) / std::sqrt(d);
  }
  SymmetricMatrix<Scalar> B(n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = j + 1; i < n; ++i) B.set(i, j, inv_sqrt(i) * C(i, j) * inv_sqrt(j));
  return B;
}

namespace detail {

// sum_{i != j} C_ij^2 / ((C_ii + eps)(C_jj + eps)), computed entrywise.
template <typename Scalar>
Scalar normalized_offdiag_energy(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  Scalar s = 0;
  for (Eigen::Index j = 0; j < C.dim(); ++j)
    for (Eigen::Index i = j + 1; i < C.dim(); ++i)
      s += C(i, j) * C(i, j) / ((C(i, i) + eps) * (C(j, j) + eps));
  return Scalar(2) * s;
}

template <typename Scalar>
Scalar sum_log_diag(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  Scalar s = 0;
  for (Eigen::Index i = 0; i < C.dim(); ++i) s += std::log(C(i, i) + eps);
  return s;
}

// log(1 + x) - x + x^2/2. The alternating series is used near zero, where
// the closed form cancels catastrophically.
template <typename Scalar>
Scalar remainder_term(Scalar x) {
  if (std::abs(x) < Scalar(0.1)) {
    Scalar sum = 0;
    Scalar power = x * x * x;
    for (int k = 3; k <= 26; ++k) {
      sum += (k % 2 == 1 ? power : -power) / Scalar(k);
      power *= x;
    }
    return sum;
  }
  return std::log1p(x) - x + x * x / Scalar(2);
}

}  // namespace detail

/// Second-order Taylor surrogate of -log det(C + eps I): variance expansion
/// plus normalized covariance penalty.
template <typename Scalar>
Scalar surrogate_objective(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  return -detail::sum_log_diag(C, eps) + detail::normalized_offdiag_energy(C, eps) / Scalar(2);
}

/// -log det(C + eps I).
template <typename Scalar>
Scalar exact_objective(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  return -cholesky_logdet(C.shifted(eps));
}

/// 1/2 log det(C + eps I) + n/2 log(2 pi e).
template <typename Scalar>
Scalar correlative_entropy(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  const Scalar two_pi_e = Scalar(2) * Scalar(M_PI) * std::exp(Scalar(1));
  return cholesky_logdet(C.shifted(eps)) / Scalar(2) +
         Scalar(C.dim()) / Scalar(2) * std::log(two_pi_e);
}

template <typename Scalar>
struct RemainderReportT {
  Scalar r2_direct = 0;    // log det minus its second-order expansion
  Scalar r2_spectral = 0;  // sum of log(1+l) - l + l^2/2 over eig(B)
  Scalar lower_bound = 0;
  Scalar upper_bound = 0;
  Scalar norm_bound = 0;   // ||B||_F^2 ||B||_2 / (3 (1 + lambda_min(B)))
  Scalar b_fro = 0;
  Scalar b_spec = 0;
  Scalar b_lambda_min = 0;
};
using RemainderReport = RemainderReportT<double>;

/// Exact Taylor remainder of log det(C + eps I) about its diagonal, computed
/// twice (Cholesky log-det vs. spectrum of B) together with the two-sided
/// spectral bound and the norm-based bound.
template <typename Scalar>
RemainderReportT<Scalar> taylor_remainder(const SymmetricMatrix<Scalar>& C, Scalar eps) {
  const SymmetricMatrix<Scalar> B = normalized_offdiag(C, eps);
  const std::vector<Scalar> lambdas = sym_eigvals(B);

  RemainderReportT<Scalar> rep;
  rep.b_lambda_min = lambdas.front();
  if (Scalar(1) + rep.b_lambda_min < Scalar(1e-10))
    throw SpectrumAtSingularity("taylor_remainder: eigenvalue of B too close to -1");
  rep.b_spec = std::max(std::abs(lambdas.front()), std::abs(lambdas.back()));
  rep.b_fro = B.dense().norm();

  for (Scalar l : lambdas) {
    rep.r2_spectral += detail::remainder_term(l);
    if (l >= Scalar(0))
      rep.upper_bound += l * l * l / Scalar(3);
    else
      rep.lower_bound -= std::abs(l) * l * l / (Scalar(3) * (Scalar(1) + l));
  }
  rep.norm_bound =
      rep.b_fro * rep.b_fro * rep.b_spec / (Scalar(3) * (Scalar(1) + rep.b_lambda_min));

  const Scalar logdet = cholesky_logdet(C.shifted(eps));
  rep.r2_direct = logdet - (detail::sum_log_diag(C, eps) -
                            detail::normalized_offdiag_energy(C, eps) / Scalar(2));
  return rep;
}

/// n rho^3 / (3 (1 - rho)): exact-objective gap bound when ||B||_2 <= rho
/// uniformly.
double near_optimality_gap(double rho, int n);

/// True iff every sample's |surrogate - exact| is within its own norm bound
/// and, when max ||B||_2 < 1, within near_optimality_gap(max ||B||_2, n).
/// Comparisons allow floating-point roundoff of the two objectives.
template <typename Scalar>
bool certify_uniform_gap(const std::vector<SymmetricMatrix<Scalar>>& samples, Scalar eps) {
  if (samples.empty()) throw InvalidInput("certify_uniform_gap: no samples");
  std::vector<Scalar> gaps;
  std::vector<Scalar> slack;
  Scalar max_spec = 0;
  bool ok = true;
  for (const auto& C : samples) {
    const auto rep = taylor_remainder(C, eps);
    const Scalar sur = surrogate_objective(C, eps);
    const Scalar ex = exact_objective(C, eps);
    const Scalar gap = std::abs(sur - ex);
    const Scalar tol = Scalar(1e-12) * (Scalar(1) + std::abs(sur) + std::abs(ex));
    if (gap > rep.norm_bound + tol) ok = false;
    gaps.push_back(gap);
    slack.push_back(tol);
    max_spec = std::max(max_spec, rep.b_spec);
  }
  if (max_spec < Scalar(1)) {
    const int n = static_cast<int>(samples.front().dim());
    const Scalar uniform = static_cast<Scalar>(near_optimality_gap(static_cast<double>(max_spec), n));
    for (std::size_t k = 0; k < gaps.size(); ++k)
      if (gaps[k] > uniform + slack[k]) ok = false;
  }
  return ok;
}

/// Truncated direction g (= -direction), the discarded term r, and the two
/// descent certificates.
struct DescentReport {
  Vector g;
  Vector r;
  double g_norm = 0.0;
  double r_norm = 0.0;
  double coarse_bound = 0.0;  // ||B||_2^2 / min_k(v_k + eps) * ||ybar||_2
  bool descent_certified = false;
  bool coarse_certified = false;
};

/// `state` must carry the time-t statistics (already including y) and the
/// pre-update separator W(t-1). For the unnormalized variant the direction
/// is the exact gradient of its cost, so r = 0.
DescentReport descent_check(const PemState& state, const Vector& y, const Vector& x,
                            const PemConfig& cfg);

/// Online cost J_t(y) with the statistics advanced from `prev` at y
/// (steady-state recursions). The prediction weight is
/// lambda (1 - lambda) gamma_pred, matching the absorbed constant in
/// PemConfig::gamma_pred, so that grad J = -2 lambda (1 - lambda) (d + r).
double online_objective(const PemState& prev, const Vector& y, const Vector& x,
                        const PemConfig& cfg);

/// One row of the diagnostics CSV.
struct DiagnosticRow {
  std::uint64_t t = 0;
  RemainderReport remainder;
  double g_norm = 0.0;
  double r_norm = 0.0;
  bool descent_certified = false;
};

/// Remainder reports for every trace entry.
std::vector<DiagnosticRow> diagnostic_rows(const DiagnosticTrace& trace, double eps);

}  // namespace pem

#endif  // PEM_DIAGNOSTICS_HPP
