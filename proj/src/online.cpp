#include "pem/online.hpp"

#include <cmath>
#include <string>

#include "pem/diagnostics.hpp"
#include "pem/rng.hpp"

namespace pem {

std::string_view to_string(ScheduleRule r) noexcept {
  switch (r) {
    case ScheduleRule::Constant: return "constant";
    case ScheduleRule::DivideByIndex: return "divide_by_index";
    case ScheduleRule::DivideByLogIndex: return "divide_by_log_index";
    case ScheduleRule::DivideByLoopIndex: return "divide_by_loop_index";
    case ScheduleRule::DivideBySlowLoopIndex: return "divide_by_slow_loop_index";
  }
  return "unknown";
}

ScheduleRule parse_schedule_rule(std::string_view name) {
  for (auto r : {ScheduleRule::Constant, ScheduleRule::DivideByIndex, ScheduleRule::DivideByLogIndex,
                 ScheduleRule::DivideByLoopIndex, ScheduleRule::DivideBySlowLoopIndex})
    if (to_string(r) == name) return r;
  throw InvalidInput("unknown schedule rule '" + std::string(name) + "'");
}

double StepSchedule::value(std::uint64_t index) const {
  const double i = static_cast<double>(index);
  switch (rule) {
    case ScheduleRule::Constant:
      return base;
    case ScheduleRule::DivideByIndex:
      return std::max(base / (i / divider + 1.0), floor);
    case ScheduleRule::DivideByLogIndex:
      return std::max(base / (1.0 + std::log(i / divider + 2.0)), floor);
    case ScheduleRule::DivideByLoopIndex:
      return std::max(base / (i + 1.0), floor);
    case ScheduleRule::DivideBySlowLoopIndex:
      return std::max(base / (i * divider + 1.0), floor);
  }
  return base;
}

std::string_view to_string(Variant v) noexcept {
  return v == Variant::Normalized ? "pem" : "u-pem";
}

Variant parse_variant(std::string_view name) {
  if (name == "pem" || name == "normalized") return Variant::Normalized;
  if (name == "u-pem" || name == "unnormalized") return Variant::Unnormalized;
  throw InvalidInput("unknown variant '" + std::string(name) + "'");
}

std::string_view to_string(WeightInit w) noexcept {
  return w == WeightInit::Identity ? "identity" : "random";
}

WeightInit parse_weight_init(std::string_view name) {
  if (name == "identity") return WeightInit::Identity;
  if (name == "random") return WeightInit::Random;
  throw InvalidInput("unknown weight init '" + std::string(name) + "'");
}

std::string_view to_string(CovarianceInit c) noexcept {
  return c == CovarianceInit::ScaledIdentity ? "scaled_identity" : "random_gram";
}

CovarianceInit parse_covariance_init(std::string_view name) {
  if (name == "scaled_identity") return CovarianceInit::ScaledIdentity;
  if (name == "random_gram") return CovarianceInit::RandomGram;
  throw InvalidInput("unknown covariance init '" + std::string(name) + "'");
}

namespace {

void check_schedule(const StepSchedule& s, const char* what) {
  if (!(s.base > 0.0) || !std::isfinite(s.base))
    throw InvalidInput(std::string(what) + ": base must be positive");
  if (!(s.divider > 0.0)) throw InvalidInput(std::string(what) + ": divider must be positive");
  if (!(s.floor >= 0.0)) throw InvalidInput(std::string(what) + ": floor must be nonnegative");
}

}  // namespace

void PemConfig::validate() const {
  if (n < 1 || m < 1) throw InvalidInput("n and m must be positive");
  if (m < n) throw InvalidInput("need at least as many mixtures as sources");
  if (!(lambda > 0.0 && lambda < 1.0)) throw InvalidInput("lambda must lie in (0,1)");
  if (!(epsilon > 0.0)) throw InvalidInput("epsilon must be positive");
  if (!(gamma_pred > 0.0)) throw InvalidInput("gamma_pred must be positive");
  if (variant == Variant::Unnormalized && !(gamma_lateral && *gamma_lateral > 0.0))
    throw InvalidInput("u-pem requires a positive gamma_lateral");
  if (requires_threshold_unit(domain) && !(eta_lambda && *eta_lambda > 0.0))
    throw InvalidInput("domain '" + std::string(to_string(domain)) + "' requires eta_lambda");
  check_schedule(w_schedule, "w_schedule");
  check_schedule(y_schedule, "y_schedule");
  if (tau_max < 1) throw InvalidInput("tau_max must be positive");
  if (!(inner_tol > 0.0)) throw InvalidInput("inner_tol must be positive");
  if (!(init.c0_scale > 0.0)) throw InvalidInput("init c0_scale must be positive");
  if (!(init.noise_scale >= 0.0) || !(init.gram_noise_var >= 0.0))
    throw InvalidInput("init noise levels must be nonnegative");
}

SymmetricMatrix<double> PemState::covariance() const {
  SymmetricMatrix<double> C = c_hat;
  for (Eigen::Index i = 0; i < v_hat.size(); ++i) C.set(i, i, v_hat(i));
  return C;
}

PemState init_state(const PemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int n = cfg.n;
  const int m = cfg.m;
  const InitConfig& ic = cfg.init;
  Rng rng(seed, Stream::Init);

  PemState s;
  s.W = Matrix::Zero(n, m);
  if (ic.w_mode == WeightInit::Identity)
    for (int i = 0; i < n; ++i) s.W(i, i) = ic.w_identity_scale;
  if (ic.noise_scale > 0.0)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < n; ++i) s.W(i, j) += ic.noise_scale * rng.normal();

  s.mu_hat = Vector::Constant(n, ic.mu0);
  s.c_hat = SymmetricMatrix<double>(n);
  if (ic.c_mode == CovarianceInit::ScaledIdentity) {
    s.v_hat = Vector::Constant(n, ic.c0_scale);
  } else {
    Matrix G = std::sqrt(ic.c0_scale) * Matrix::Identity(n, n);
    const double sd = std::sqrt(ic.gram_noise_var);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) G(i, j) += sd * rng.normal();
    const Matrix C = G * G.transpose();
    s.v_hat = C.diagonal();
    for (int j = 0; j < n; ++j)
      for (int i = j + 1; i < n; ++i) s.c_hat.set(i, j, C(i, j));
  }
  return s;
}

void direction_from_prediction(const PemState& state, const Vector& y, const Vector& prediction,
                               const PemConfig& cfg, Vector& out) {
  const Eigen::Index n = y.size();
  out.resize(n);
  const auto& c = state.c_hat.dense();
  const double gl = cfg.gamma_lateral.value_or(0.0);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double ak = state.v_hat(k) + cfg.epsilon;
    double lateral = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == k) continue;
      const double ybar_j = y(j) - state.mu_hat(j);
      lateral += cfg.variant == Variant::Normalized
                     ? c(k, j) * ybar_j / (state.v_hat(j) + cfg.epsilon)
                     : c(k, j) * ybar_j;
    }
    lateral = cfg.variant == Variant::Normalized ? lateral / ak : gl * lateral;
    out(k) = (y(k) - state.mu_hat(k)) / ak - lateral - cfg.gamma_pred * (y(k) - prediction(k));
  }
}

Vector direction(const PemState& state, const Vector& y, const Vector& x, const PemConfig& cfg) {
  Vector d;
  direction_from_prediction(state, y, state.W * x, cfg, d);
  return d;
}

InferenceResult infer_output(const PemState& state, const Vector& x, const PemConfig& cfg) {
  const Vector prediction = state.W * x;
  const bool threshold = requires_threshold_unit(cfg.domain);
  const double eta_lambda = cfg.eta_lambda.value_or(0.0);

  InferenceResult res;
  res.y = Vector::Zero(cfg.n);
  res.lambda_L = cfg.warm_start_threshold ? state.lambda_L : 0.0;
  Vector d;
  Vector next;
  for (int tau = 0; tau < cfg.tau_max; ++tau) {
    direction_from_prediction(state, res.y, prediction, cfg, d);
    next = res.y + cfg.y_schedule.value(static_cast<std::uint64_t>(tau)) * d;
    apply_nonlinearity_inplace(cfg.domain, next, res.lambda_L);
    if (!next.allFinite()) throw NumericalDivergence(tau);
    double change = (next - res.y).cwiseAbs().maxCoeff();
    if (threshold) {
      // The inhibitory unit is part of the fast state: y can sit at 0 for
      // several steps while lambda_L is still relaxing.
      const double lambda_next = update_threshold(cfg.domain, res.lambda_L, next, eta_lambda);
      change = std::max(change, std::abs(lambda_next - res.lambda_L));
      res.lambda_L = lambda_next;
    }
    res.y.swap(next);
    res.iters_used = tau + 1;
    if (change < cfg.inner_tol) break;
  }
  res.feasible = contains(cfg.domain, res.y, 1e-4);
  if (cfg.domain == SourceDomain::Simplex) res.feasible = res.feasible && std::abs(res.y.sum() - 1.0) < 1e-3;
  return res;
}

void advance_statistics(PemState& state, const Vector& y, const PemConfig& cfg) {
  double rate = 1.0 - cfg.lambda;
  double keep = cfg.lambda;
  if (cfg.exact_normalization) {
    rate = (1.0 - cfg.lambda) / (1.0 - std::pow(cfg.lambda, static_cast<double>(state.t + 1)));
    keep = 1.0 - rate;
  }
  state.mu_hat = keep * state.mu_hat + rate * y;
  const Vector ybar = y - state.mu_hat;
  const Eigen::Index n = y.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    state.v_hat(i) = keep * state.v_hat(i) + rate * ybar(i) * ybar(i);
    for (Eigen::Index j = 0; j < i; ++j)
      state.c_hat.set(i, j, keep * state.c_hat(i, j) + rate * ybar(i) * ybar(j));
  }
}

void slow_update_inplace(PemState& state, const Vector& x, const Vector& y, const PemConfig& cfg) {
  const Vector e = y - state.W * x;
  state.W.noalias() += cfg.w_schedule.value(state.t + 1) * e * x.transpose();
  advance_statistics(state, y, cfg);
  ++state.t;
}

PemState slow_update(const PemState& state, const Vector& x, const Vector& y,
                     const PemConfig& cfg) {
  PemState next = state;
  slow_update_inplace(next, x, y, cfg);
  return next;
}

namespace {

TraceEntry trace_entry(const PemState& updated, const Matrix& W_prev, const Vector& y,
                       const Vector& x, const PemConfig& cfg) {
  PemState view;
  view.W = W_prev;
  view.mu_hat = updated.mu_hat;
  view.v_hat = updated.v_hat;
  view.c_hat = updated.c_hat;
  view.t = updated.t;

  TraceEntry e;
  e.t = updated.t;
  e.covariance = updated.covariance();
  const DescentReport rep = descent_check(view, y, x, cfg);
  e.g_norm = rep.g_norm;
  e.r_norm = rep.r_norm;
  e.descent_certified = rep.descent_certified;
  e.variance_term = -(updated.v_hat.array() + cfg.epsilon).log().sum();
  e.covariance_penalty = detail::normalized_offdiag_energy(e.covariance, cfg.epsilon) / 2.0;
  e.prediction_term = (y - W_prev * x).squaredNorm();
  return e;
}

}  // namespace

RunResult run_online_from(PemState state, const Matrix& X, const PemConfig& cfg,
                          std::optional<std::uint64_t> trace_stride) {
  cfg.validate();
  if (X.rows() != cfg.m) throw InvalidInput("data has the wrong number of mixtures");
  if (!X.allFinite()) throw InvalidInput("data contains non-finite values");
  const Eigen::Index T = X.cols();

  RunResult out;
  out.Y.resize(cfg.n, T);
  const bool tracing = trace_stride && *trace_stride > 0;
  if (tracing) out.trace = DiagnosticTrace{*trace_stride, {}};

  std::uint64_t iters = 0;
  std::uint64_t infeasible = 0;
  Vector x;
  Matrix W_prev;
  for (Eigen::Index t = 0; t < T; ++t) {
    x = X.col(t);
    InferenceResult res;
    try {
      res = infer_output(state, x, cfg);
    } catch (const NumericalDivergence& err) {
      throw NumericalDivergence(err.tau(), static_cast<std::int64_t>(t));
    }
    iters += static_cast<std::uint64_t>(res.iters_used);
    if (!res.feasible) ++infeasible;
    if (cfg.warm_start_threshold) state.lambda_L = res.lambda_L;

    const bool record =
        tracing && ((static_cast<std::uint64_t>(t) + 1) % *trace_stride == 0 || t + 1 == T);
    if (record) W_prev = state.W;
    slow_update_inplace(state, x, res.y, cfg);
    if (record) out.trace->entries.push_back(trace_entry(state, W_prev, res.y, x, cfg));
    out.Y.col(t) = res.y;
  }
  if (T > 0) {
    out.mean_inner_iters = static_cast<double>(iters) / static_cast<double>(T);
    out.infeasible_fraction = static_cast<double>(infeasible) / static_cast<double>(T);
  }
  out.state = std::move(state);
  return out;
}

RunResult run_online(const Matrix& X, const PemConfig& cfg, std::uint64_t seed,
                     std::optional<std::uint64_t> trace_stride) {
  return run_online_from(init_state(cfg, seed), X, cfg, trace_stride);
}

}  // namespace pem
