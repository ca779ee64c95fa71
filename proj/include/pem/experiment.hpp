#ifndef PEM_EXPERIMENT_HPP
#define PEM_EXPERIMENT_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pem/binary_io.hpp"
#include "pem/datagen.hpp"
#include "pem/diagnostics.hpp"
#include "pem/online.hpp"

namespace pem {

enum class SourceModel { Uniform, CopulaT };

/// A fully seeded experiment. `pem` is already resolved: preset first, then
/// the explicit overrides from the file.
struct ExperimentSpec {
  std::string name;
  SourceDomain domain = SourceDomain::Antisparse;
  int n = 0;
  int m = 0;
  int T = 0;
  SourceModel source_model = SourceModel::Uniform;
  double rho = 0.0;
  int nu = 4;
  MixingDistribution mixing_dist = MixingDistribution::Gaussian;
  std::optional<double> snr_in_db;
  std::string preset_name;
  PemConfig pem;
  bool covariance_init_set = false;  // [pem.init] c_mode given explicitly
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> diag_stride;

  void validate() const;
};

/// Parses the key = value experiment format:
///
///   name = demo
///   domain = antisparse
///   n = 3
///   m = 6
///   T = 20000
///   mixing_dist = gaussian
///   snr_in_db = 30          # or "none"
///   seeds = 0,1,2           # or a range "0..9"
///   diag_stride = 100       # optional
///   [source_model]  kind, rho, nu
///   [pem]           preset, variant, lambda, epsilon, gamma_pred,
///                   gamma_lateral, eta_lambda, tau_max, inner_tol,
///                   exact_normalization, warm_start_threshold
///   [pem.w_schedule] / [pem.y_schedule]  rule, base, divider, floor
///   [pem.init]      w_mode, w_identity_scale, noise_scale, c_mode,
///                   c0_scale, gram_noise_var, mu0
///
/// Lines starting with '#' or ';' are comments. Unknown keys, sections and
/// duplicates are rejected with ConfigError carrying the line number.
ExperimentSpec parse_spec(std::string_view text);
ExperimentSpec load_spec(const std::string& path);

struct ResultRecord {
  std::string name;
  std::optional<double> sweep_value;
  std::uint64_t seed = 0;
  SourceDomain domain = SourceDomain::Antisparse;
  int n = 0;
  int m = 0;
  int T = 0;
  double rho = 0.0;
  std::optional<double> snr_in_db;
  Variant variant = Variant::Normalized;
  double msnr_db_mean = 0.0;
  std::vector<double> per_source_msnr;
  double mean_inner_iters = 0.0;
  double infeasible_fraction = 0.0;
  std::string status = "ok";  // "ok" or "diverged"
  double wall_time_s = 0.0;
};

/// Sources, mixing matrix and mixtures for one seed. `mixing` replaces the
/// freshly sampled matrix (nested-mixture sweeps).
DataDump generate_data(const ExperimentSpec& spec, std::uint64_t seed,
                       const Matrix* mixing = nullptr);

struct SeedOutcome {
  ResultRecord record;
  std::optional<DiagnosticTrace> trace;
  std::optional<PemState> state;
};

/// One pipeline: data, PEM pass, alignment, mSNR. NumericalDivergence is
/// caught and reported through `status`.
SeedOutcome run_seed(const ExperimentSpec& spec, std::uint64_t seed,
                     const Matrix* mixing = nullptr);

/// Worker count: PEM_THREADS if set and positive, else the hardware count.
int worker_count();

/// Runs task(i) for i in [0, count) on up to `threads` workers. Exceptions
/// are rethrown (first by index) after all workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task);

std::vector<SeedOutcome> run_experiment(const ExperimentSpec& spec, int threads);

enum class SweepAxis { Rho, SnrInDb, M };

std::string_view to_string(SweepAxis a) noexcept;
SweepAxis parse_sweep_axis(std::string_view name);

/// Cartesian product values x seeds, ordered by value then seed. For the m
/// axis each seed samples one mixing matrix with max(values) rows and every
/// run uses its leading rows.
std::vector<ResultRecord> run_sweep(const ExperimentSpec& spec, SweepAxis axis,
                                    const std::vector<std::optional<double>>& values, int threads);

struct DiagnoseRow {
  std::uint64_t seed = 0;
  double rho = 0.0;
  DiagnosticRow row;
};

/// Traced runs for every (rho, seed). Unless the spec chooses a covariance
/// initialization, the statistics start from a random Gram matrix so the
/// early trace has substantial off-diagonal structure. Throws Error when a
/// row violates |R2| <= norm_bound.
std::vector<DiagnoseRow> run_diagnose(const ExperimentSpec& spec,
                                      const std::vector<double>& rhos, int threads);

/// CSV writers; every file starts with "# schema=1" and is overwritten.
void write_results_csv(const std::string& path, const std::vector<ResultRecord>& rows,
                       std::optional<SweepAxis> axis = std::nullopt);
void write_summary_csv(const std::string& path, const std::vector<ResultRecord>& rows,
                       std::optional<SweepAxis> axis = std::nullopt);
void write_diagnostics_csv(const std::string& path, const std::vector<DiagnoseRow>& rows);

/// Formats a double the way the CSV writers do.
std::string format_number(double v);

}  // namespace pem

#endif  // PEM_EXPERIMENT_HPP
