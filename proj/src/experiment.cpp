#include "pem/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "pem/metrics.hpp"
#include "pem/presets.hpp"

namespace pem {

// ---------------------------------------------------------------- parsing --

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

using Section = std::map<std::string, Entry>;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

const std::vector<std::string>& allowed_keys(const std::string& section) {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"", {"name", "domain", "n", "m", "T", "mixing_dist", "snr_in_db", "seeds", "diag_stride"}},
      {"source_model", {"kind", "rho", "nu"}},
      {"pem",
       {"preset", "variant", "lambda", "epsilon", "gamma_pred", "gamma_lateral", "eta_lambda",
        "tau_max", "inner_tol", "exact_normalization", "warm_start_threshold"}},
      {"pem.w_schedule", {"rule", "base", "divider", "floor"}},
      {"pem.y_schedule", {"rule", "base", "divider", "floor"}},
      {"pem.init",
       {"w_mode", "w_identity_scale", "noise_scale", "c_mode", "c0_scale", "gram_noise_var", "mu0"}},
  };
  const auto it = keys.find(section);
  static const std::vector<std::string> none;
  return it == keys.end() ? none : it->second;
}

double to_double(const Entry& e, const std::string& key) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError("'" + key + "' expects a number, got '" + e.value + "'", e.line);
  return v;
}

long long to_int(const Entry& e, const std::string& key) {
  long long v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("'" + key + "' expects an integer, got '" + e.value + "'", e.line);
  return v;
}

std::uint64_t to_u64(const std::string& text, int line) {
  std::uint64_t v = 0;
  const std::string t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    throw ConfigError("bad seed '" + t + "'", line);
  return v;
}

bool to_bool(const Entry& e, const std::string& key) {
  if (e.value == "true") return true;
  if (e.value == "false") return false;
  throw ConfigError("'" + key + "' expects true or false", e.line);
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Section>& sections) : sections_(sections) {}

  const Entry* find(const std::string& section, const std::string& key) {
    auto s = sections_.find(section);
    if (s == sections_.end()) return nullptr;
    auto e = s->second.find(key);
    if (e == s->second.end()) return nullptr;
    return &e->second;
  }

  const Entry& require(const std::string& section, const std::string& key) {
    const Entry* e = find(section, key);
    if (!e) throw ConfigError("missing required key '" + key + "'");
    return *e;
  }

  template <typename F>
  void with(const std::string& section, const std::string& key, F&& f) {
    if (const Entry* e = find(section, key)) {
      try {
        f(*e);
      } catch (const ConfigError&) {
        throw;
      } catch (const Error& err) {
        throw ConfigError(err.what(), e->line);
      }
    }
  }

 private:
  std::map<std::string, Section>& sections_;
};

void apply_schedule(Reader& r, const std::string& section, StepSchedule& s) {
  r.with(section, "rule", [&](const Entry& e) { s.rule = parse_schedule_rule(e.value); });
  r.with(section, "base", [&](const Entry& e) { s.base = to_double(e, "base"); });
  r.with(section, "divider", [&](const Entry& e) { s.divider = to_double(e, "divider"); });
  r.with(section, "floor", [&](const Entry& e) { s.floor = to_double(e, "floor"); });
}

std::vector<std::uint64_t> parse_seeds(const Entry& e) {
  std::vector<std::uint64_t> seeds;
  const auto range = e.value.find("..");
  if (range != std::string::npos) {
    const std::uint64_t lo = to_u64(e.value.substr(0, range), e.line);
    const std::uint64_t hi = to_u64(e.value.substr(range + 2), e.line);
    if (hi < lo || hi - lo >= 100000) throw ConfigError("bad seed range", e.line);
    for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) seeds.push_back(to_u64(item, e.line));
  return seeds;
}

}  // namespace

void ExperimentSpec::validate() const {
  if (name.empty()) throw InvalidInput("experiment name must not be empty");
  if (name.find_first_of("/\\") != std::string::npos)
    throw InvalidInput("experiment name must not contain path separators");
  if (n < 2) throw InvalidInput("n must be >= 2");
  if (m < n) throw InvalidInput("m must be >= n");
  if (T < 1) throw InvalidInput("T must be >= 1");
  if (seeds.empty()) throw InvalidInput("seeds must not be empty");
  if (source_model == SourceModel::CopulaT && !is_box(domain))
    throw InvalidInput("copula_t sources require a box domain");
  if (source_model == SourceModel::CopulaT && !(rho >= 0.0 && rho < 1.0))
    throw InvalidInput("rho must lie in [0,1)");
  if (source_model == SourceModel::CopulaT && nu < 1) throw InvalidInput("nu must be >= 1");
  if (pem.n != n || pem.m != m || pem.domain != domain)
    throw InvalidInput("pem configuration disagrees with the experiment shape or domain");
  if (diag_stride && *diag_stride == 0) throw InvalidInput("diag_stride must be positive");
  pem.validate();
}

ExperimentSpec parse_spec(std::string_view text) {
  std::map<std::string, Section> sections;
  sections[""];
  std::string current;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (const auto hash = line.find(" #"); hash != std::string::npos) line = trim(line.substr(0, hash));
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      current = trim(std::string_view(line).substr(1, line.size() - 2));
      if (current.empty() || allowed_keys(current).empty())
        throw ConfigError("unknown section [" + current + "]", line_no);
      if (sections.count(current)) throw ConfigError("duplicate section [" + current + "]", line_no);
      sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line_no);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    const auto& keys = allowed_keys(current);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ConfigError("unknown key '" + key + "'" +
                            (current.empty() ? std::string() : " in [" + current + "]"),
                        line_no);
    if (value.empty()) throw ConfigError("empty value for '" + key + "'", line_no);
    auto& section = sections[current];
    if (section.count(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    section[key] = Entry{value, line_no};
  }

  Reader r(sections);
  ExperimentSpec spec;
  spec.name = r.require("", "name").value;
  {
    const Entry& e = r.require("", "domain");
    try {
      spec.domain = parse_domain(e.value);
    } catch (const Error& err) {
      throw ConfigError(err.what(), e.line);
    }
  }
  spec.n = static_cast<int>(to_int(r.require("", "n"), "n"));
  spec.m = static_cast<int>(to_int(r.require("", "m"), "m"));
  spec.T = static_cast<int>(to_int(r.require("", "T"), "T"));
  r.with("", "mixing_dist",
         [&](const Entry& e) { spec.mixing_dist = parse_mixing_distribution(e.value); });
  r.with("", "snr_in_db", [&](const Entry& e) {
    if (e.value != "none") spec.snr_in_db = to_double(e, "snr_in_db");
  });
  {
    const Entry& e = r.require("", "seeds");
    spec.seeds = parse_seeds(e);
  }
  r.with("", "diag_stride", [&](const Entry& e) {
    const long long v = to_int(e, "diag_stride");
    if (v <= 0) throw ConfigError("diag_stride must be positive", e.line);
    spec.diag_stride = static_cast<std::uint64_t>(v);
  });

  r.with("source_model", "kind", [&](const Entry& e) {
    if (e.value == "uniform")
      spec.source_model = SourceModel::Uniform;
    else if (e.value == "copula_t")
      spec.source_model = SourceModel::CopulaT;
    else
      throw ConfigError("unknown source model '" + e.value + "'", e.line);
  });
  r.with("source_model", "rho", [&](const Entry& e) { spec.rho = to_double(e, "rho"); });
  r.with("source_model", "nu", [&](const Entry& e) {
    spec.nu = static_cast<int>(to_int(e, "nu"));
  });

  spec.preset_name = std::string(to_string(spec.domain));
  r.with("pem", "preset", [&](const Entry& e) { spec.preset_name = e.value; });
  try {
    spec.pem = preset(spec.preset_name, spec.n, spec.m);
  } catch (const Error& err) {
    const Entry* e = r.find("pem", "preset");
    throw ConfigError(err.what(), e ? e->line : 0);
  }
  if (spec.pem.domain != spec.domain)
    throw ConfigError("preset '" + spec.preset_name + "' targets a different domain",
                      r.find("pem", "preset")->line);

  PemConfig& c = spec.pem;
  r.with("pem", "variant", [&](const Entry& e) { c.variant = parse_variant(e.value); });
  r.with("pem", "lambda", [&](const Entry& e) { c.lambda = to_double(e, "lambda"); });
  r.with("pem", "epsilon", [&](const Entry& e) { c.epsilon = to_double(e, "epsilon"); });
  r.with("pem", "gamma_pred", [&](const Entry& e) { c.gamma_pred = to_double(e, "gamma_pred"); });
  r.with("pem", "gamma_lateral",
         [&](const Entry& e) { c.gamma_lateral = to_double(e, "gamma_lateral"); });
  r.with("pem", "eta_lambda", [&](const Entry& e) { c.eta_lambda = to_double(e, "eta_lambda"); });
  r.with("pem", "tau_max", [&](const Entry& e) { c.tau_max = static_cast<int>(to_int(e, "tau_max")); });
  r.with("pem", "inner_tol", [&](const Entry& e) { c.inner_tol = to_double(e, "inner_tol"); });
  r.with("pem", "exact_normalization",
         [&](const Entry& e) { c.exact_normalization = to_bool(e, "exact_normalization"); });
  r.with("pem", "warm_start_threshold",
         [&](const Entry& e) { c.warm_start_threshold = to_bool(e, "warm_start_threshold"); });
  apply_schedule(r, "pem.w_schedule", c.w_schedule);
  apply_schedule(r, "pem.y_schedule", c.y_schedule);
  InitConfig& ic = c.init;
  r.with("pem.init", "w_mode", [&](const Entry& e) { ic.w_mode = parse_weight_init(e.value); });
  r.with("pem.init", "w_identity_scale",
         [&](const Entry& e) { ic.w_identity_scale = to_double(e, "w_identity_scale"); });
  r.with("pem.init", "noise_scale", [&](const Entry& e) { ic.noise_scale = to_double(e, "noise_scale"); });
  r.with("pem.init", "c_mode", [&](const Entry& e) {
    ic.c_mode = parse_covariance_init(e.value);
    spec.covariance_init_set = true;
  });
  r.with("pem.init", "c0_scale", [&](const Entry& e) { ic.c0_scale = to_double(e, "c0_scale"); });
  r.with("pem.init", "gram_noise_var",
         [&](const Entry& e) { ic.gram_noise_var = to_double(e, "gram_noise_var"); });
  r.with("pem.init", "mu0", [&](const Entry& e) { ic.mu0 = to_double(e, "mu0"); });

  try {
    spec.validate();
  } catch (const Error& err) {
    throw ConfigError(err.what());
  }
  return spec;
}

ExperimentSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open experiment file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_spec(ss.str());
}

// --------------------------------------------------------------- pipeline --

DataDump generate_data(const ExperimentSpec& spec, std::uint64_t seed, const Matrix* mixing) {
  const SourceBatch src =
      spec.source_model == SourceModel::CopulaT
          ? sample_copula_t_source(spec.domain, spec.n, spec.T, spec.rho, spec.nu, seed)
          : sample_uniform_source(spec.domain, spec.n, spec.T, seed);
  DataDump d;
  d.domain = spec.domain;
  d.A = mixing ? *mixing : gen_mixing(spec.m, spec.n, spec.mixing_dist, seed);
  d.X = mix_with_noise(d.A, src, spec.snr_in_db, seed).X;
  d.S = src.S;
  return d;
}

namespace {

ResultRecord base_record(const ExperimentSpec& spec, std::uint64_t seed) {
  ResultRecord r;
  r.name = spec.name;
  r.seed = seed;
  r.domain = spec.domain;
  r.n = spec.n;
  r.m = spec.m;
  r.T = spec.T;
  r.rho = spec.source_model == SourceModel::CopulaT ? spec.rho : 0.0;
  r.snr_in_db = spec.snr_in_db;
  r.variant = spec.pem.variant;
  return r;
}

SeedOutcome run_seed_traced(const ExperimentSpec& spec, std::uint64_t seed, const Matrix* mixing,
                            std::optional<std::uint64_t> stride) {
  const auto start = std::chrono::steady_clock::now();
  SeedOutcome out;
  out.record = base_record(spec, seed);
  const DataDump data = generate_data(spec, seed, mixing);
  try {
    RunResult run = run_online(data.X, spec.pem, seed, stride);
    const AlignResult al = align(data.S, run.Y, spec.domain);
    const MsnrResult ms = msnr_db(data.S, al.Y_aligned);
    out.record.msnr_db_mean = ms.mean;
    out.record.per_source_msnr.assign(ms.per_source.data(), ms.per_source.data() + ms.per_source.size());
    out.record.mean_inner_iters = run.mean_inner_iters;
    out.record.infeasible_fraction = run.infeasible_fraction;
    out.trace = std::move(run.trace);
    out.state = std::move(run.state);
  } catch (const NumericalDivergence&) {
    out.record.status = "diverged";
    out.record.msnr_db_mean = std::numeric_limits<double>::quiet_NaN();
  }
  out.record.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace

SeedOutcome run_seed(const ExperimentSpec& spec, std::uint64_t seed, const Matrix* mixing) {
  return run_seed_traced(spec, seed, mixing, spec.diag_stride);
}

int worker_count() {
  if (const char* env = std::getenv("PEM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& task) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        task(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::min<std::size_t>(count, static_cast<std::size_t>(std::max(1, threads)));
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

std::vector<SeedOutcome> run_experiment(const ExperimentSpec& spec, int threads) {
  spec.validate();
  std::vector<SeedOutcome> out(spec.seeds.size());
  parallel_for(out.size(), threads, [&](std::size_t i) { out[i] = run_seed(spec, spec.seeds[i]); });
  return out;
}

std::string_view to_string(SweepAxis a) noexcept {
  switch (a) {
    case SweepAxis::Rho: return "rho";
    case SweepAxis::SnrInDb: return "snr_in_db";
    case SweepAxis::M: return "m";
  }
  return "unknown";
}

SweepAxis parse_sweep_axis(std::string_view name) {
  for (auto a : {SweepAxis::Rho, SweepAxis::SnrInDb, SweepAxis::M})
    if (to_string(a) == name) return a;
  throw InvalidInput("unknown sweep axis '" + std::string(name) + "'");
}

std::vector<ResultRecord> run_sweep(const ExperimentSpec& spec, SweepAxis axis,
                                    const std::vector<std::optional<double>>& values, int threads) {
  spec.validate();
  if (values.empty()) throw InvalidInput("sweep needs at least one value");
  if (axis != SweepAxis::SnrInDb)
    for (const auto& v : values)
      if (!v) throw InvalidInput("only the snr_in_db axis accepts 'none'");
  if (axis == SweepAxis::Rho && spec.source_model != SourceModel::CopulaT)
    throw InvalidInput("a rho sweep needs copula_t sources");

  std::vector<ExperimentSpec> variants;
  int max_m = spec.m;
  for (const auto& v : values) {
    ExperimentSpec s = spec;
    switch (axis) {
      case SweepAxis::Rho:
        s.rho = *v;
        break;
      case SweepAxis::SnrInDb:
        s.snr_in_db = v;
        break;
      case SweepAxis::M:
        if (*v != std::floor(*v)) throw InvalidInput("m values must be integers");
        s.m = static_cast<int>(*v);
        s.pem.m = s.m;
        max_m = std::max(max_m, s.m);
        break;
    }
    s.validate();
    variants.push_back(std::move(s));
  }
  if (axis == SweepAxis::M) {
    max_m = 0;
    for (const auto& s : variants) max_m = std::max(max_m, s.m);
  }

  std::vector<Matrix> masters;
  if (axis == SweepAxis::M)
    for (auto seed : spec.seeds) masters.push_back(gen_mixing(max_m, spec.n, spec.mixing_dist, seed));

  const std::size_t n_seeds = spec.seeds.size();
  std::vector<ResultRecord> rows(values.size() * n_seeds);
  parallel_for(rows.size(), threads, [&](std::size_t k) {
    const std::size_t vi = k / n_seeds;
    const std::size_t si = k % n_seeds;
    const ExperimentSpec& s = variants[vi];
    Matrix prefix;
    const Matrix* mixing = nullptr;
    if (axis == SweepAxis::M) {
      prefix = take_first_rows(masters[si], s.m);
      mixing = &prefix;
    }
    ResultRecord r = run_seed_traced(s, spec.seeds[si], mixing, std::nullopt).record;
    r.sweep_value = axis == SweepAxis::SnrInDb && !values[vi]
                        ? std::optional<double>(std::numeric_limits<double>::quiet_NaN())
                        : values[vi];
    rows[k] = std::move(r);
  });
  return rows;
}

std::vector<DiagnoseRow> run_diagnose(const ExperimentSpec& spec, const std::vector<double>& rhos,
                                      int threads) {
  spec.validate();
  if (rhos.empty()) throw InvalidInput("diagnose needs at least one rho");
  std::vector<ExperimentSpec> variants;
  for (double rho : rhos) {
    ExperimentSpec s = spec;
    if (rho != spec.rho && spec.source_model != SourceModel::CopulaT)
      throw InvalidInput("varying rho needs copula_t sources");
    s.rho = rho;
    if (!s.covariance_init_set) s.pem.init.c_mode = CovarianceInit::RandomGram;
    s.validate();
    variants.push_back(std::move(s));
  }
  const std::uint64_t stride = spec.diag_stride.value_or(100);
  const std::size_t n_seeds = spec.seeds.size();
  std::vector<std::vector<DiagnoseRow>> parts(rhos.size() * n_seeds);
  parallel_for(parts.size(), threads, [&](std::size_t k) {
    const ExperimentSpec& s = variants[k / n_seeds];
    const std::uint64_t seed = spec.seeds[k % n_seeds];
    const DataDump data = generate_data(s, seed);
    const RunResult run = run_online(data.X, s.pem, seed, stride);
    for (const auto& row : diagnostic_rows(*run.trace, s.pem.epsilon)) {
      const auto& rep = row.remainder;
      if (std::abs(rep.r2_spectral) > rep.norm_bound * (1.0 + 1e-12))
        throw Error("diagnostics: |R2| exceeds its norm bound at t=" + std::to_string(row.t));
      parts[k].push_back(DiagnoseRow{seed, s.rho, row});
    }
  });
  std::vector<DiagnoseRow> out;
  for (auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// -------------------------------------------------------------------- csv --

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  // Shortest text that reads back to the same double.
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  os << "# schema=1\n";
  return os;
}

std::string format_optional(const std::optional<double>& v) {
  return v ? format_number(*v) : "none";
}

}  // namespace

void write_results_csv(const std::string& path, const std::vector<ResultRecord>& rows,
                       std::optional<SweepAxis> axis) {
  std::ofstream os = open_csv(path);
  os << "name,";
  if (axis) os << "sweep_" << to_string(*axis) << ",";
  os << "seed,domain,n,m,T,rho,snr_in_db,variant,msnr_db_mean,per_source_msnr,"
        "mean_inner_iters,infeasible_fraction,status,wall_time_s\n";
  for (const auto& r : rows) {
    os << r.name << ",";
    if (axis) os << (r.sweep_value && !std::isnan(*r.sweep_value) ? format_number(*r.sweep_value) : "none") << ",";
    os << r.seed << "," << to_string(r.domain) << "," << r.n << "," << r.m << "," << r.T << ","
       << format_number(r.rho) << "," << format_optional(r.snr_in_db) << "," << to_string(r.variant)
       << "," << format_number(r.msnr_db_mean) << ",";
    for (std::size_t i = 0; i < r.per_source_msnr.size(); ++i)
      os << (i ? ";" : "") << format_number(r.per_source_msnr[i]);
    os << "," << format_number(r.mean_inner_iters) << "," << format_number(r.infeasible_fraction)
       << "," << r.status << "," << format_number(r.wall_time_s) << "\n";
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

void write_summary_csv(const std::string& path, const std::vector<ResultRecord>& rows,
                       std::optional<SweepAxis> axis) {
  // Group by sweep value in first-seen order.
  std::vector<std::string> keys;
  std::map<std::string, std::vector<const ResultRecord*>> groups;
  for (const auto& r : rows) {
    const std::string key =
        axis ? (r.sweep_value && !std::isnan(*r.sweep_value) ? format_number(*r.sweep_value) : "none")
             : std::string();
    if (!groups.count(key)) keys.push_back(key);
    groups[key].push_back(&r);
  }
  std::ofstream os = open_csv(path);
  os << "name,";
  if (axis) os << "sweep_" << to_string(*axis) << ",";
  os << "runs,ok_runs,msnr_db_mean,ci95_half_width,mean_inner_iters,infeasible_fraction\n";
  for (const auto& key : keys) {
    const auto& g = groups[key];
    std::vector<double> msnr;
    double iters = 0.0;
    double infeasible = 0.0;
    for (const auto* r : g) {
      if (r->status != "ok") continue;
      msnr.push_back(r->msnr_db_mean);
      iters += r->mean_inner_iters;
      infeasible += r->infeasible_fraction;
    }
    os << g.front()->name << ",";
    if (axis) os << key << ",";
    os << g.size() << "," << msnr.size() << ",";
    if (msnr.empty()) {
      os << "nan,nan,nan,nan\n";
      continue;
    }
    const double k = static_cast<double>(msnr.size());
    if (msnr.size() >= 2) {
      const ConfidenceInterval ci = confidence_interval(msnr);
      os << format_number(ci.mean) << "," << format_number(ci.half_width);
    } else {
      os << format_number(msnr.front()) << ",nan";
    }
    os << "," << format_number(iters / k) << "," << format_number(infeasible / k) << "\n";
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

void write_diagnostics_csv(const std::string& path, const std::vector<DiagnoseRow>& rows) {
  std::ofstream os = open_csv(path);
  os << "seed,rho,t,r2_direct,r2_spectral,lower_bound,upper_bound,norm_bound,b_spec,"
        "b_lambda_min,g_norm,r_norm,descent_certified\n";
  for (const auto& d : rows) {
    const auto& r = d.row.remainder;
    os << d.seed << "," << format_number(d.rho) << "," << d.row.t << ","
       << format_number(r.r2_direct) << "," << format_number(r.r2_spectral) << ","
       << format_number(r.lower_bound) << "," << format_number(r.upper_bound) << ","
       << format_number(r.norm_bound) << "," << format_number(r.b_spec) << ","
       << format_number(r.b_lambda_min) << "," << format_number(d.row.g_norm) << ","
       << format_number(d.row.r_norm) << "," << (d.row.descent_certified ? 1 : 0) << "\n";
  }
  if (!os) throw Error("write failed for '" + path + "'");
}

}  // namespace pem
