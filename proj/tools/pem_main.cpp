#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pem/binary_io.hpp"
#include "pem/experiment.hpp"
#include "pem/presets.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

std::vector<std::optional<double>> parse_values(const std::string& csv) {
  std::vector<std::optional<double>> out;
  std::size_t start = 0;
  while (start <= csv.size()) {
    const auto comma = csv.find(',', start);
    const std::string item = csv.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (item == "none" || item == "null") {
      out.emplace_back(std::nullopt);
    } else {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(item, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (item.empty() || used != item.size()) throw pem::InvalidInput("bad value '" + item + "' in --values");
      out.emplace_back(v);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string out_path(const std::string& dir, const std::string& name, const std::string& suffix) {
  return (fs::path(dir) / (name + suffix)).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw pem::Error("cannot create directory '" + dir + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online blind source separation by predictive entropy maximization"};
  app.require_subcommand(1);

  std::string spec_path;
  std::string out_dir = ".";
  std::string save_state_dir;
  std::string axis_name;
  std::string values_csv;
  std::string dump_path;
  std::optional<std::uint64_t> dump_seed;

  auto* run = app.add_subcommand("run", "Run every seed of an experiment file");
  run->add_option("spec", spec_path, "Experiment file")->required();
  run->add_option("--out-dir", out_dir, "Directory for CSV output");
  run->add_option("--save-state", save_state_dir, "Write each seed's final state to this directory");

  auto* sweep = app.add_subcommand("sweep", "Sweep one axis over a list of values");
  sweep->add_option("spec", spec_path, "Experiment file")->required();
  sweep->add_option("--axis", axis_name, "rho, snr_in_db or m")->required();
  sweep->add_option("--values", values_csv, "Comma-separated values ('none' for no noise)")->required();
  sweep->add_option("--out-dir", out_dir, "Directory for CSV output");

  auto* diagnose = app.add_subcommand("diagnose", "Emit the surrogate diagnostics trace");
  diagnose->add_option("spec", spec_path, "Experiment file")->required();
  diagnose->add_option("--values", values_csv, "Comma-separated rho values (default: the file's rho)");
  diagnose->add_option("--out-dir", out_dir, "Directory for CSV output");

  auto* presets = app.add_subcommand("presets", "List the built-in hyperparameter presets");

  auto* dump = app.add_subcommand("dump-data", "Write generated sources, mixing and mixtures");
  dump->add_option("spec", spec_path, "Experiment file")->required();
  dump->add_option("--out", dump_path, "Output file")->required();
  dump->add_option("--seed", dump_seed, "Seed (default: the first seed of the file)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  pem::ExperimentSpec spec;
  try {
    if (presets->parsed()) {
      for (const auto& name : pem::preset_names()) std::cout << pem::describe_preset(name) << "\n";
      return kOk;
    }
    spec = pem::load_spec(spec_path);
  } catch (const pem::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  }

  const int threads = pem::worker_count();
  try {
    if (run->parsed()) {
      ensure_dir(out_dir);
      const auto outcomes = pem::run_experiment(spec, threads);
      std::vector<pem::ResultRecord> rows;
      std::vector<pem::DiagnoseRow> diag;
      for (const auto& o : outcomes) {
        rows.push_back(o.record);
        if (o.trace)
          for (const auto& r : pem::diagnostic_rows(*o.trace, spec.pem.epsilon))
            diag.push_back({o.record.seed, o.record.rho, r});
        if (!save_state_dir.empty() && o.state) {
          ensure_dir(save_state_dir);
          pem::save_state(out_path(save_state_dir, spec.name, ".seed" + std::to_string(o.record.seed) + ".pems"),
                          *o.state);
        }
      }
      pem::write_results_csv(out_path(out_dir, spec.name, ".results.csv"), rows);
      pem::write_summary_csv(out_path(out_dir, spec.name, ".summary.csv"), rows);
      if (spec.diag_stride) pem::write_diagnostics_csv(out_path(out_dir, spec.name, ".diagnostics.csv"), diag);
      for (const auto& r : rows)
        std::printf("seed %llu: %s mSNR %.2f dB\n", static_cast<unsigned long long>(r.seed), r.status.c_str(),
                    r.msnr_db_mean);
    } else if (sweep->parsed()) {
      pem::SweepAxis axis;
      std::vector<std::optional<double>> values;
      try {
        axis = pem::parse_sweep_axis(axis_name);
        values = parse_values(values_csv);
      } catch (const pem::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kValidation;
      }
      ensure_dir(out_dir);
      const auto rows = pem::run_sweep(spec, axis, values, threads);
      pem::write_results_csv(out_path(out_dir, spec.name, ".results.csv"), rows, axis);
      pem::write_summary_csv(out_path(out_dir, spec.name, ".summary.csv"), rows, axis);
      std::cout << rows.size() << " runs written\n";
    } else if (diagnose->parsed()) {
      std::vector<double> rhos{spec.rho};
      if (!values_csv.empty()) {
        rhos.clear();
        try {
          for (const auto& v : parse_values(values_csv)) {
            if (!v) throw pem::InvalidInput("rho values must be numbers");
            rhos.push_back(*v);
          }
        } catch (const pem::Error& e) {
          std::cerr << "error: " << e.what() << "\n";
          return kValidation;
        }
      }
      ensure_dir(out_dir);
      const auto rows = pem::run_diagnose(spec, rhos, threads);
      pem::write_diagnostics_csv(out_path(out_dir, spec.name, ".diagnostics.csv"), rows);
      std::cout << rows.size() << " diagnostic rows written\n";
    } else if (dump->parsed()) {
      const std::uint64_t seed = dump_seed.value_or(spec.seeds.front());
      pem::write_data(dump_path, pem::generate_data(spec, seed));
    }
  } catch (const pem::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const pem::DomainMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
