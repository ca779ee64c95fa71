#include "pem/diagnostics.hpp"

namespace pem {

double near_optimality_gap(double rho, int n) {
  if (!(rho >= 0.0 && rho < 1.0)) throw InvalidInput("near_optimality_gap: rho must lie in [0,1)");
  if (n < 1) throw InvalidInput("near_optimality_gap: n must be positive");
  return n * rho * rho * rho / (3.0 * (1.0 - rho));
}

DescentReport descent_check(const PemState& state, const Vector& y, const Vector& x,
                            const PemConfig& cfg) {
  DescentReport rep;
  rep.g = -direction(state, y, x, cfg);
  const Eigen::Index n = y.size();
  const Vector ybar = y - state.mu_hat;
  const Vector a = state.v_hat.array() + cfg.epsilon;
  rep.r = Vector::Zero(n);

  if (cfg.variant == Variant::Normalized) {
    // B has entries c_ij / sqrt(a_i a_j), so [B^2]_kk = sum_j c_kj^2 / (a_k a_j).
    const auto& c = state.c_hat.dense();
    for (Eigen::Index k = 0; k < n; ++k) {
      double b2 = 0.0;
      for (Eigen::Index j = 0; j < n; ++j)
        if (j != k) b2 += c(k, j) * c(k, j) / (a(k) * a(j));
      rep.r(k) = b2 / a(k) * ybar(k);
    }
    const SymmetricMatrix<double> B = normalized_offdiag(state.covariance(), cfg.epsilon);
    const std::vector<double> ev = sym_eigvals(B);
    const double spec = std::max(std::abs(ev.front()), std::abs(ev.back()));
    rep.coarse_bound = spec * spec / a.minCoeff() * ybar.norm();
  }

  rep.g_norm = rep.g.norm();
  rep.r_norm = rep.r.norm();
  rep.descent_certified = rep.r_norm < rep.g_norm;
  rep.coarse_certified = rep.coarse_bound < rep.g_norm;
  return rep;
}

double online_objective(const PemState& prev, const Vector& y, const Vector& x,
                        const PemConfig& cfg) {
  PemState s = prev;
  PemConfig steady = cfg;
  steady.exact_normalization = false;
  advance_statistics(s, y, steady);
  const SymmetricMatrix<double> C = s.covariance();
  const double lam = cfg.lambda;
  const double prediction = lam * (1.0 - lam) * cfg.gamma_pred * (y - prev.W * x).squaredNorm();

  if (cfg.variant == Variant::Normalized) return surrogate_objective(C, cfg.epsilon) + prediction;

  // u-PEM cost: the lateral penalty is not variance-normalized.
  double lateral = 0.0;
  for (Eigen::Index j = 0; j < C.dim(); ++j)
    for (Eigen::Index i = j + 1; i < C.dim(); ++i) lateral += C(i, j) * C(i, j);
  return -detail::sum_log_diag(C, cfg.epsilon) + cfg.gamma_lateral.value_or(0.0) * lateral +
         prediction;
}

std::vector<DiagnosticRow> diagnostic_rows(const DiagnosticTrace& trace, double eps) {
  std::vector<DiagnosticRow> rows;
  rows.reserve(trace.entries.size());
  for (const auto& e : trace.entries) {
    DiagnosticRow row;
    row.t = e.t;
    row.remainder = taylor_remainder(e.covariance, eps);
    row.g_norm = e.g_norm;
    row.r_norm = e.r_norm;
    row.descent_certified = e.descent_certified;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace pem
