#ifndef PEM_ONLINE_HPP
#define PEM_ONLINE_HPP

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "pem/core_math.hpp"
#include "pem/domains.hpp"

namespace pem {

enum class ScheduleRule {
  Constant,
  DivideByIndex,          // base / (index / divider + 1)
  DivideByLogIndex,       // base / (1 + log(index / divider + 2))
  DivideByLoopIndex,      // base / (index + 1)
  DivideBySlowLoopIndex,  // base / (index * divider + 1)
};

std::string_view to_string(ScheduleRule r) noexcept;
ScheduleRule parse_schedule_rule(std::string_view name);

/// Step-size schedule; every rule except Constant is floored at `floor`.
struct StepSchedule {
  ScheduleRule rule = ScheduleRule::Constant;
  double base = 0.0;
  double divider = 1.0;
  double floor = 0.0;

  double value(std::uint64_t index) const;
};

inline double schedule_value(const StepSchedule& s, std::uint64_t index) { return s.value(index); }

enum class Variant { Normalized, Unnormalized };

std::string_view to_string(Variant v) noexcept;
Variant parse_variant(std::string_view name);

enum class WeightInit {
  Identity,  // identity_scale * I_rect + noise_scale * N(0,1)
  Random,    // noise_scale * N(0,1)
};

enum class CovarianceInit {
  ScaledIdentity,  // c0_scale * I
  RandomGram,      // G G', G = sqrt(c0_scale) I + Z, Z_ij ~ N(0, gram_noise_var)
};

std::string_view to_string(WeightInit w) noexcept;
WeightInit parse_weight_init(std::string_view name);
std::string_view to_string(CovarianceInit c) noexcept;
CovarianceInit parse_covariance_init(std::string_view name);

struct InitConfig {
  WeightInit w_mode = WeightInit::Identity;
  double w_identity_scale = 1.0;
  double noise_scale = 0.01;
  CovarianceInit c_mode = CovarianceInit::ScaledIdentity;
  double c0_scale = 0.2;
  double gram_noise_var = 0.2;
  double mu0 = 0.0;
};

/// Hyperparameters of one PEM / u-PEM run.
///
/// `gamma_pred` multiplies the prediction error in the activity direction
/// directly. In the exact gradient of the online cost the same term carries
/// an extra 1/(lambda (1 - lambda)); that constant is absorbed here.
struct PemConfig {
  int n = 0;
  int m = 0;
  SourceDomain domain = SourceDomain::Antisparse;
  double lambda = 0.99;
  double epsilon = 1e-5;
  double gamma_pred = 1.0;
  Variant variant = Variant::Normalized;
  std::optional<double> gamma_lateral;
  StepSchedule w_schedule;
  StepSchedule y_schedule;
  std::optional<double> eta_lambda;
  int tau_max = 100;
  double inner_tol = 1e-6;
  bool exact_normalization = false;
  InitConfig init;
  bool warm_start_threshold = false;

  /// Throws InvalidInput on inconsistent settings.
  void validate() const;
};

/// Separator and running second-order statistics.
struct PemState {
  Matrix W;                        // n x m
  Vector mu_hat;                   // running mean
  Vector v_hat;                    // output variances
  SymmetricMatrix<double> c_hat;   // cross-covariances, zero diagonal
  std::uint64_t t = 0;             // samples consumed
  double lambda_L = 0.0;           // shared threshold (warm-start mode)

  /// v_hat on the diagonal, c_hat off it.
  SymmetricMatrix<double> covariance() const;
};

PemState init_state(const PemConfig& cfg, std::uint64_t seed);

/// Activity-update direction d (the negative truncated gradient) at output
/// y, using the statistics held in `state` as they are.
Vector direction(const PemState& state, const Vector& y, const Vector& x, const PemConfig& cfg);

/// Same as `direction` with the feedforward prediction W x precomputed.
void direction_from_prediction(const PemState& state, const Vector& y, const Vector& prediction,
                               const PemConfig& cfg, Vector& out);

struct InferenceResult {
  Vector y;
  double lambda_L = 0.0;
  int iters_used = 0;
  bool feasible = false;
};

/// Fast loop for one sample with the state frozen. Throws
/// NumericalDivergence on non-finite activity.
InferenceResult infer_output(const PemState& state, const Vector& x, const PemConfig& cfg);

/// Running-statistics step only (mean first, then variances and
/// cross-covariances with the updated mean); W and t are left untouched.
void advance_statistics(PemState& state, const Vector& y, const PemConfig& cfg);

/// Slow step: W <- W + alpha_W(t) e x' with the pre-update W, then the
/// statistics, then t <- t + 1.
PemState slow_update(const PemState& state, const Vector& x, const Vector& y,
                     const PemConfig& cfg);
void slow_update_inplace(PemState& state, const Vector& x, const Vector& y, const PemConfig& cfg);

/// Quantities recorded every `stride` samples when tracing is enabled.
struct TraceEntry {
  std::uint64_t t = 0;
  SymmetricMatrix<double> covariance;  // C(t), after the statistics update
  double g_norm = 0.0;
  double r_norm = 0.0;
  bool descent_certified = false;
  double variance_term = 0.0;      // -sum log(v_i + eps)
  double covariance_penalty = 0.0;
  double prediction_term = 0.0;    // ||y - W(t-1) x||^2
};

struct DiagnosticTrace {
  std::uint64_t stride = 100;
  std::vector<TraceEntry> entries;
};

struct RunResult {
  PemState state;
  Matrix Y;  // n x T converged outputs
  std::optional<DiagnosticTrace> trace;
  double mean_inner_iters = 0.0;
  double infeasible_fraction = 0.0;
};

/// Single streaming pass: per sample, infer_output then slow_update.
/// `trace_stride` > 0 records a TraceEntry every that many samples (and at
/// the last one). NumericalDivergence carries the failing sample index.
RunResult run_online(const Matrix& X, const PemConfig& cfg, std::uint64_t seed,
                     std::optional<std::uint64_t> trace_stride = std::nullopt);

/// Same, starting from a caller-supplied state.
RunResult run_online_from(PemState state, const Matrix& X, const PemConfig& cfg,
                          std::optional<std::uint64_t> trace_stride = std::nullopt);

}  // namespace pem

#endif  // PEM_ONLINE_HPP
