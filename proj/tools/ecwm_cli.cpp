// ecwm: prevalence estimation for extended crosswise model surveys.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "ecwm/analysis.hpp"
#include "ecwm/errors.hpp"
#include "ecwm/simulator.hpp"
#include "ecwm/survey_io.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

int exit_code(ecwm::ErrorKind kind) {
  switch (kind) {
    case ecwm::ErrorKind::Config:
    case ecwm::ErrorKind::Design:
    case ecwm::ErrorKind::Domain: return kExitConfig;
    case ecwm::ErrorKind::Data: return kExitData;
    case ecwm::ErrorKind::Numerical:
    case ecwm::ErrorKind::Internal: return kExitNumerical;
  }
  return kExitNumerical;
}

struct AnalysisFlags {
  std::string survey;
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<long long> bootstrap;
  std::optional<double> time_cutoff;
  std::optional<std::string> gamma_method;
  std::optional<std::string> weights;
};

void add_analysis_flags(CLI::App* cmd, AnalysisFlags& f) {
  cmd->add_option("--survey", f.survey, "survey CSV")->required();
  cmd->add_option("--config", f.config, "run configuration (key = value)")->required();
  cmd->add_option("--out", f.out, "write the JSON report here");
  cmd->add_option("--seed", f.seed, "bootstrap seed");
  cmd->add_option("--bootstrap", f.bootstrap, "bootstrap resamples (0 disables)");
  cmd->add_option("--time-cutoff", f.time_cutoff, "exclude completion times above this many minutes");
  cmd->add_option("--gamma-method", f.gamma_method, "naive_2ec | delta_pi | fixed:<value> | none");
  cmd->add_option("--weights", f.weights, "anchor weights 'w0,w50' or 'off'");
}

// Flags override the config file.
ecwm::RunConfig resolve_config(const AnalysisFlags& f) {
  ecwm::KeyValueConfig kv = ecwm::KeyValueConfig::load(f.config);
  if (f.seed) kv.set("seed", std::to_string(*f.seed));
  if (f.bootstrap) kv.set("bootstrap", std::to_string(*f.bootstrap));
  if (f.time_cutoff) kv.set("time_cutoff_minutes", ecwm::format_double(*f.time_cutoff));
  if (f.gamma_method) kv.set("gamma_method", *f.gamma_method);
  ecwm::RunConfig cfg = ecwm::RunConfig::from(kv);
  if (f.weights) ecwm::parse_weights(*f.weights, cfg);
  return cfg;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ecwm::config_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw ecwm::config_error("failed writing '" + path + "'");
}

int cmd_fit(const AnalysisFlags& f) {
  const ecwm::RunConfig cfg = resolve_config(f);
  const ecwm::SurveyData data = ecwm::read_survey_csv(f.survey);
  const ecwm::Report report = ecwm::run_fit(data.respondents, cfg, f.survey);
  std::cout << ecwm::render_text(report);
  if (!f.out.empty()) write_file(f.out, ecwm::to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_sensitivity(const AnalysisFlags& f) {
  const ecwm::RunConfig cfg = resolve_config(f);
  const ecwm::SurveyData data = ecwm::read_survey_csv(f.survey);
  const ecwm::SensitivityReport report = ecwm::run_sensitivity(data.respondents, cfg, f.survey);
  std::cout << ecwm::render_text(report);
  if (!f.out.empty()) write_file(f.out, ecwm::to_json(report).dump(2) + "\n");
  return 0;
}

int cmd_simulate(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed_flag) {
  std::uint64_t seed = 1;
  const ecwm::PopulationSpec spec = ecwm::population_from(ecwm::KeyValueConfig::load(config), seed);
  if (seed_flag) seed = *seed_flag;
  const auto records = ecwm::to_respondents(ecwm::simulate(spec, seed));
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ecwm::config_error("cannot write '" + out + "'");
  ecwm::write_survey_csv(file, records);
  if (!file) throw ecwm::config_error("failed writing '" + out + "'");
  std::cout << "wrote " << records.size() << " respondents to " << out << " (seed " << seed << ")\n";
  return 0;
}

int cmd_bias_surface(const std::string& out) {
  const auto rows = ecwm::bias_surface();
  std::ofstream file(out, std::ios::binary);
  if (!file) throw ecwm::config_error("cannot write '" + out + "'");
  ecwm::write_bias_surface_csv(file, rows);
  std::cout << "wrote " << rows.size() << " rows to " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Extended crosswise model prevalence estimation with random-answering correction"};
  app.set_version_flag("--version", ecwm::kToolVersion);
  app.require_subcommand(1);

  AnalysisFlags fit_flags;
  auto* fit = app.add_subcommand("fit", "calibrate gamma and run the model ladder");
  add_analysis_flags(fit, fit_flags);

  AnalysisFlags sens_flags;
  auto* sens = app.add_subcommand("sensitivity", "weighted estimates over the 3x3 anchor-weight grid");
  add_analysis_flags(sens, sens_flags);

  std::string sim_config;
  std::string sim_out;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "write a synthetic survey CSV");
  sim->add_option("--config", sim_config, "population settings (key = value)")->required();
  sim->add_option("--out", sim_out, "output CSV")->required();
  sim->add_option("--seed", sim_seed, "random seed (overrides config)");

  std::string bias_out;
  auto* bias = app.add_subcommand("bias-surface", "expected uncorrected ECWM estimates as CSV");
  bias->add_option("--out", bias_out, "output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*fit) return cmd_fit(fit_flags);
    if (*sens) return cmd_sensitivity(sens_flags);
    if (*sim) return cmd_simulate(sim_config, sim_out, sim_seed);
    if (*bias) return cmd_bias_surface(bias_out);
  } catch (const ecwm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  }
  return 0;
}
