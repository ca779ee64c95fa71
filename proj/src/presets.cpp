#include "pem/presets.hpp"

#include <sstream>

namespace pem {

namespace {

struct DomainDefaults {
  SourceDomain domain;
  double lambda;
  double gamma_pred;
  double eta_y0;
  double eta_y_min;
  double eta_lambda;  // 0 when the domain has no threshold unit
  int tau_max;
  double inner_tol;
  ScheduleRule w_rule;
  double w_divider;
  double gamma_lateral;
};

constexpr DomainDefaults kDefaults[] = {
    {SourceDomain::Antisparse, 0.99, 250, 0.5, 1e-6, 0, 250, 1e-7, ScheduleRule::DivideByIndex, 5000, 10},
    {SourceDomain::NonnegAntisparse, 0.95, 750, 0.05, 1e-4, 0, 500, 1e-6, ScheduleRule::DivideByIndex, 20000, 300},
    {SourceDomain::Sparse, 0.99, 150, 0.05, 1e-4, 0.5, 100, 1e-6, ScheduleRule::DivideByIndex, 5000, 50},
    {SourceDomain::NonnegSparse, 0.99, 250, 0.1, 1e-4, 0.5, 100, 1e-7, ScheduleRule::DivideByIndex, 2000, 3200},
    {SourceDomain::Simplex, 0.99, 150, 0.1, 1e-4, 0.05, 100, 1e-7, ScheduleRule::DivideByLogIndex, 5000, 100},
};

constexpr std::string_view kUnnormalizedPrefix = "u-pem/";

}  // namespace

PemConfig preset(std::string_view name, int n, int m) {
  bool unnormalized = false;
  if (name.substr(0, kUnnormalizedPrefix.size()) == kUnnormalizedPrefix) {
    unnormalized = true;
    name.remove_prefix(kUnnormalizedPrefix.size());
  }
  SourceDomain domain;
  try {
    domain = parse_domain(name);
  } catch (const InvalidInput&) {
    throw InvalidInput("unknown preset '" + std::string(name) + "'");
  }
  const DomainDefaults* d = nullptr;
  for (const auto& entry : kDefaults)
    if (entry.domain == domain) d = &entry;

  PemConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.domain = domain;
  cfg.lambda = d->lambda;
  cfg.epsilon = 1e-5;
  cfg.gamma_pred = d->gamma_pred;
  cfg.w_schedule = {d->w_rule, 0.05, d->w_divider, 1e-8};
  cfg.y_schedule = {ScheduleRule::DivideByLoopIndex, d->eta_y0, 1.0, d->eta_y_min};
  if (d->eta_lambda > 0) cfg.eta_lambda = d->eta_lambda;
  cfg.tau_max = d->tau_max;
  cfg.inner_tol = d->inner_tol;
  if (domain == SourceDomain::NonnegAntisparse) {
    cfg.epsilon = 1e-4;
    cfg.init.c0_scale = 2.0;
    cfg.init.w_identity_scale = 0.01;
    cfg.init.noise_scale = 1.0 / 15.0;
  }
  if (unnormalized) {
    cfg.variant = Variant::Unnormalized;
    cfg.gamma_lateral = d->gamma_lateral;
  }
  return cfg;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& d : kDefaults) names.emplace_back(to_string(d.domain));
  for (const auto& d : kDefaults) names.push_back(std::string(kUnnormalizedPrefix) + std::string(to_string(d.domain)));
  return names;
}

std::string describe_preset(std::string_view name) {
  const PemConfig c = preset(name, 1, 1);
  std::ostringstream os;
  os << name << "\n"
     << "  variant        " << to_string(c.variant) << "\n"
     << "  lambda         " << c.lambda << "\n"
     << "  epsilon        " << c.epsilon << "\n"
     << "  gamma_pred     " << c.gamma_pred << "\n";
  if (c.gamma_lateral) os << "  gamma_lateral  " << *c.gamma_lateral << "\n";
  os << "  alpha_W        " << to_string(c.w_schedule.rule) << " base=" << c.w_schedule.base
     << " divider=" << c.w_schedule.divider << " floor=" << c.w_schedule.floor << "\n"
     << "  eta_y          " << to_string(c.y_schedule.rule) << " base=" << c.y_schedule.base
     << " floor=" << c.y_schedule.floor << "\n";
  if (c.eta_lambda) os << "  eta_lambda     " << *c.eta_lambda << "\n";
  os << "  tau_max        " << c.tau_max << "\n"
     << "  inner_tol      " << c.inner_tol << "\n"
     << "  init           W=" << c.init.w_identity_scale << "*I+" << c.init.noise_scale
     << "*N(0,1) C=" << c.init.c0_scale << "*I mu=" << c.init.mu0 << "\n";
  return os.str();
}

}  // namespace pem
