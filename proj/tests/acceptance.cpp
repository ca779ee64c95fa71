// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits nonzero if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "pem/diagnostics.hpp"
#include "pem/experiment.hpp"
#include "pem/metrics.hpp"
#include "test_support.hpp"

using namespace pem;
using pem::test::gaussian;
using pem::test::random_psd;
using pem::test::uniform;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

const char* kRecovery = R"(name = acceptance_recovery
domain = antisparse
n = 3
m = 6
T = 20000
mixing_dist = gaussian
snr_in_db = 30
seeds = 0..9
[source_model]
kind = uniform
[pem]
preset = antisparse
tau_max = 250
)";

const char* kCopula = R"(name = acceptance_copula
domain = antisparse
n = 3
m = 6
T = 20000
mixing_dist = gaussian
snr_in_db = 30
seeds = 0..9
diag_stride = 100
[source_model]
kind = copula_t
rho = 0
nu = 4
[pem]
preset = antisparse
tau_max = 250
)";

const char* kMixtures = R"(name = acceptance_mixtures
domain = sparse
n = 3
m = 5
T = 20000
mixing_dist = gaussian
snr_in_db = 30
seeds = 0..9
[pem]
preset = sparse
)";

double mean_of(const std::vector<ResultRecord>& rows, std::optional<double> value = std::nullopt) {
  double s = 0;
  int k = 0;
  for (const auto& r : rows) {
    if (value && !(r.sweep_value && *r.sweep_value == *value)) continue;
    s += r.msnr_db_mean;
    ++k;
  }
  return k ? s / k : std::nan("");
}

std::string read_file(const std::string& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string without_wall_time(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

// ------------------------------------------------------------------------

Outcome remainder_identity_and_bounds() {
  const auto t0 = Clock::now();
  std::mt19937_64 gen(20240101);
  long violations = 0;
  long checked = 0;
  double worst_rel = 0;
  for (int k = 0; k < 10000; ++k) {
    const int n = 2 + k % 7;
    const auto C = random_psd(gen, n, k % 3);
    for (double eps : {1e-5, 1e-2, 1.0}) {
      const RemainderReport r = taylor_remainder(C, eps);
      const double rel = std::abs(r.r2_direct - r.r2_spectral) / (1 + std::abs(r.r2_direct));
      worst_rel = std::max(worst_rel, rel);
      if (rel > 1e-9) ++violations;
      if (!(r.lower_bound <= r.r2_spectral && r.r2_spectral <= r.upper_bound)) ++violations;
      if (!(std::abs(r.r2_spectral) <= r.norm_bound)) ++violations;
      ++checked;
    }
  }
  const double dt = seconds_since(t0);
  return {violations == 0 && dt < 10.0,
          std::to_string(checked) + " reports, " + std::to_string(violations) + " violations, " +
              fmt("max rel |direct-spectral| %.2e, %.2f s", worst_rel, dt)};
}

Outcome diagonal_exactness() {
  std::mt19937_64 gen(2);
  int bad = 0;
  double worst = 0;
  for (int k = 0; k < 1000; ++k) {
    const int n = 1 + k % 8;
    SymmetricMatrix<double> C(n);
    for (int i = 0; i < n; ++i) C.set(i, i, std::exp(uniform(gen, -5, 5)));
    const double eps = std::pow(10.0, uniform(gen, -6, 0));
    const double gap = std::abs(surrogate_objective(C, eps) - exact_objective(C, eps));
    const RemainderReport r = taylor_remainder(C, eps);
    worst = std::max(worst, gap);
    if (!(gap < 1e-12) || r.r2_spectral != 0.0 || std::abs(r.r2_direct) >= 1e-12) ++bad;
  }
  return {bad == 0, std::to_string(bad) + " failures in 1000, " + fmt("max gap %.2e", worst)};
}

Outcome closed_form_two_by_two() {
  double worst = 0;
  for (int k = 1; k <= 9; ++k) {
    const double a = 0.1 * k;
    SymmetricMatrix<double> C(2);
    C.set(0, 0, 1.0);
    C.set(1, 1, 1.0);
    C.set(0, 1, a);
    const RemainderReport r = taylor_remainder(C, 0.0);
    const double closed = std::log(1 - a * a) + a * a;
    worst = std::max({worst, std::abs(r.r2_direct - closed), std::abs(r.r2_spectral - closed)});
  }
  return {worst < 1e-12, fmt("max error %.2e", worst)};
}

Outcome gradient_consistency() {
  std::mt19937_64 gen(404);
  int bad_fd = 0;
  int bad_bound = 0;
  double worst = 0;
  for (int k = 0; k < 200; ++k) {
    const int n = 2 + k % 4;
    const auto g = test::random_gradient_case(gen, n, Variant::Normalized);
    PemState view = g.prev;
    advance_statistics(view, g.y, g.cfg);
    const DescentReport rep = descent_check(view, g.y, g.x, g.cfg);
    const double lam = g.cfg.lambda;
    const Vector predicted = 2 * lam * (1 - lam) * (rep.g - rep.r);
    Vector fd(n);
    const double h = 1e-6;
    for (int i = 0; i < n; ++i) {
      Vector yp = g.y, ym = g.y;
      yp(i) += h;
      ym(i) -= h;
      fd(i) = (online_objective(g.prev, yp, g.x, g.cfg) - online_objective(g.prev, ym, g.x, g.cfg)) / (2 * h);
    }
    const double rel = (fd - predicted).norm() / predicted.norm();
    worst = std::max(worst, rel);
    if (!(rel <= 1e-5)) ++bad_fd;
    if (!(rep.r_norm <= rep.coarse_bound)) ++bad_bound;
  }
  return {bad_fd == 0 && bad_bound == 0,
          "200 states, " + std::to_string(bad_fd) + " gradient mismatches, " + std::to_string(bad_bound) +
              " coarse-bound violations, " + fmt("max rel error %.2e", worst)};
}

Outcome descent_certification() {
  std::mt19937_64 gen(505);
  int certified = 0;
  int violations = 0;
  int drawn = 0;
  while (certified < 500 && drawn < 100000) {
    ++drawn;
    const auto g = test::random_gradient_case(gen, 2 + drawn % 4, Variant::Normalized);
    PemState view = g.prev;
    advance_statistics(view, g.y, g.cfg);
    const DescentReport rep = descent_check(view, g.y, g.x, g.cfg);
    if (!rep.descent_certified) continue;
    ++certified;
    const Vector stepped = g.y - 1e-6 * rep.g;
    if (!(online_objective(g.prev, stepped, g.x, g.cfg) < online_objective(g.prev, g.y, g.x, g.cfg))) ++violations;
  }
  return {certified == 500 && violations == 0,
          std::to_string(certified) + " certified states (of " + std::to_string(drawn) + " drawn), " +
              std::to_string(violations) + " violations"};
}

Outcome statistics_recursions() {
  std::mt19937_64 gen(606);
  const int n = 3;
  const int T = 1000;
  double worst = 0;
  for (bool exact : {false, true}) {
    PemConfig cfg;
    cfg.n = cfg.m = n;
    cfg.lambda = 0.99;
    cfg.exact_normalization = exact;
    cfg.w_schedule = {ScheduleRule::Constant, 0.01, 1, 0};
    PemState s;
    s.W = Matrix::Zero(n, n);
    s.mu_hat = Vector::Zero(n);
    s.v_hat = Vector::Constant(n, 0.2);
    s.c_hat = SymmetricMatrix<double>(n);
    std::vector<Vector> ys;
    std::vector<Vector> mus{s.mu_hat};
    const double lam = cfg.lambda;
    for (int t = 1; t <= T; ++t) {
      ys.push_back(gaussian(gen, n, 1) + Vector::Constant(n, 0.5));
      slow_update_inplace(s, Vector::Zero(n), ys.back(), cfg);

      // Brute-force weighted sums over the whole history.
      Vector mu = Vector::Zero(n);
      double wsum = 0;
      for (int k = 1; k <= t; ++k) {
        const double w = std::pow(lam, t - k);
        mu += w * ys[k - 1];
        wsum += w;
      }
      mu = exact ? Vector(mu / wsum) : Vector((1 - lam) * mu);
      mus.push_back(mu);
      if (t % 100 != 0 && t != T) continue;
      Matrix C = Matrix::Zero(n, n);
      for (int k = 1; k <= t; ++k) {
        const Vector yb = ys[k - 1] - mus[k];
        C += std::pow(lam, t - k) * yb * yb.transpose();
      }
      C = exact ? Matrix(C / wsum) : Matrix(std::pow(lam, t) * 0.2 * Matrix::Identity(n, n) + (1 - lam) * C);
      worst = std::max({worst, (s.mu_hat - mu).cwiseAbs().maxCoeff(),
                        (s.covariance().dense() - C).cwiseAbs().maxCoeff()});
    }
  }
  return {worst < 1e-12, fmt("max deviation %.2e over both modes", worst)};
}

Outcome recovery(double& seconds, std::string& csv_body) {
  const auto t0 = Clock::now();
  const ExperimentSpec spec = parse_spec(kRecovery);
  const auto out = run_experiment(spec, worker_count());
  seconds = seconds_since(t0);
  std::vector<ResultRecord> rows;
  for (const auto& o : out) rows.push_back(o.record);
  write_results_csv(spec.name + ".results.csv", rows);
  write_summary_csv(spec.name + ".summary.csv", rows);
  csv_body = read_file(spec.name + ".results.csv");
  const double m = mean_of(rows);
  return {m >= 15.0 && seconds < 180.0, fmt("mean mSNR %.2f dB over 10 seeds (floor 15), %.1f s", m, seconds)};
}

Outcome correlation_trend() {
  const ExperimentSpec spec = parse_spec(kCopula);
  const auto rows = run_sweep(spec, SweepAxis::Rho, {0.0, 0.4}, worker_count());
  write_results_csv(spec.name + ".results.csv", rows, SweepAxis::Rho);
  write_summary_csv(spec.name + ".summary.csv", rows, SweepAxis::Rho);
  const double m0 = mean_of(rows, 0.0);
  const double m4 = mean_of(rows, 0.4);
  return {std::abs(m0 - m4) <= 10.0, fmt("mean mSNR %.2f dB at rho=0, %.2f dB at rho=0.4", m0, m4)};
}

Outcome mixtures_trend() {
  const ExperimentSpec spec = parse_spec(kMixtures);
  const auto rows = run_sweep(spec, SweepAxis::M, {5.0, 9.0}, worker_count());
  write_results_csv(spec.name + ".results.csv", rows, SweepAxis::M);
  write_summary_csv(spec.name + ".summary.csv", rows, SweepAxis::M);
  const double m5 = mean_of(rows, 5.0);
  const double m9 = mean_of(rows, 9.0);
  return {m9 > m5, fmt("mean mSNR %.2f dB at m=5, %.2f dB at m=9", m5, m9)};
}

Outcome diagnostics_trend() {
  const ExperimentSpec spec = parse_spec(kCopula);
  std::vector<DiagnoseRow> rows;
  try {
    rows = run_diagnose(spec, {0.0, 0.4}, worker_count());
  } catch (const Error& e) {
    return {false, e.what()};
  }
  write_diagnostics_csv(spec.name + ".diagnostics.csv", rows);
  int over = 0;
  std::map<std::pair<double, std::uint64_t>, double> terminal;
  std::map<std::pair<double, std::uint64_t>, std::uint64_t> last_t;
  for (const auto& d : rows) {
    const auto& r = d.row.remainder;
    if (!(std::abs(r.r2_spectral) <= r.norm_bound)) ++over;
    const auto key = std::make_pair(d.rho, d.seed);
    if (!last_t.count(key) || d.row.t >= last_t[key]) {
      last_t[key] = d.row.t;
      terminal[key] = std::abs(r.r2_spectral);
    }
  }
  double s0 = 0, s4 = 0;
  int k0 = 0, k4 = 0;
  for (const auto& [key, v] : terminal) {
    if (key.first == 0.0) {
      s0 += v;
      ++k0;
    } else {
      s4 += v;
      ++k4;
    }
  }
  const double m0 = s0 / k0;
  const double m4 = s4 / k4;
  return {over == 0 && k0 == 10 && k4 == 10 && m4 > m0,
          std::to_string(rows.size()) + " rows, " + std::to_string(over) + " above bound, " +
              fmt("terminal mean |R2| %.3e at rho=0, %.3e at rho=0.4", m0, m4)};
}

Outcome metrics_reference() {
  Matrix S = Matrix::Identity(2, 2);
  Matrix Y(2, 2);
  Y << 0.9, 0.1, 0.1, 0.9;
  const double m = msnr_db(S, Y).mean;
  const double t = student_t_quantile(0.975, 29.0);
  return {std::abs(m - 16.9897) < 1e-3 && std::abs(t - 2.045) < 1e-3,
          fmt("mSNR %.4f dB, t critical value %.4f", m, t)};
}

Outcome determinism(const std::string& first_body) {
  double seconds = 0;
  std::string second_body;
  recovery(seconds, second_body);
  const bool same = !first_body.empty() && without_wall_time(first_body) == without_wall_time(second_body);
  return {same, same ? "results CSV identical apart from wall_time_s" : "results CSV differs between runs"};
}

}  // namespace

int main() {
  int failures = 0;
  auto report = [&](int id, const char* title, const std::function<Outcome()>& f) {
    Outcome o;
    try {
      o = f();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << title << ": " << o.detail << std::endl;
  };

  std::string recovery_csv;
  report(1, "remainder identity and bounds", remainder_identity_and_bounds);
  report(2, "surrogate exact on diagonal matrices", diagonal_exactness);
  report(3, "2x2 closed-form remainder", closed_form_two_by_two);
  report(4, "gradient consistency", gradient_consistency);
  report(5, "descent certification", descent_certification);
  report(6, "statistics recursions", statistics_recursions);
  report(7, "desk-scale recovery", [&] {
    double s = 0;
    return recovery(s, recovery_csv);
  });
  report(8, "correlation robustness trend", correlation_trend);
  report(9, "mixtures ablation trend", mixtures_trend);
  report(10, "diagnostics trend", diagnostics_trend);
  report(11, "metrics reference values", metrics_reference);
  report(12, "determinism", [&] { return determinism(recovery_csv); });

  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
