#include "ecwm/analysis.hpp"

#include <fmt/format.h>

#include <cmath>
#include <ostream>
#include <sstream>

#include "ecwm/errors.hpp"
#include "ecwm/survey_io.hpp"

namespace ecwm {

namespace {

using nlohmann::json;

const std::set<std::string> kRunKeys{"p",     "q",       "gamma_method", "base_model",          "weighting",
                                     "w0",    "w50",     "time_cutoff_minutes", "bootstrap",    "level",
                                     "seed",  "threads", "stratified_bootstrap"};

std::string gamma_choice_name(const RunConfig& cfg) {
  switch (cfg.gamma_method) {
    case GammaChoice::Naive2ec: return "naive_2ec";
    case GammaChoice::DeltaPi: return "delta_pi";
    case GammaChoice::Fixed: return "fixed:" + format_double(cfg.gamma_fixed);
    case GammaChoice::None: return "none";
  }
  return "?";
}

bool needs_control(const RunConfig& cfg) {
  return cfg.gamma_method == GammaChoice::Naive2ec || cfg.gamma_method == GammaChoice::DeltaPi;
}

json optional_number(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

json interval_json(const std::optional<IntervalEstimate>& ci) {
  if (!ci) return nullptr;
  return {{"lower", ci->lower}, {"upper", ci->upper}, {"n_failed", ci->n_failed}};
}

json fit_json(const FitResult& fit) {
  return {{"spec", std::string(to_string(fit.spec.kind))},
          {"method", std::string(to_string(fit.method))},
          {"pi_hat", fit.pi_hat},
          {"pi_raw", fit.pi_raw},
          {"pi_clipped", fit.pi_clipped},
          {"theta_hat", optional_number(fit.theta_hat)},
          {"gamma_fixed", fit.gamma_fixed},
          {"loglik", fit.loglik},
          {"g2", std::isfinite(fit.gof.g2) ? json(fit.gof.g2) : json("inf")},
          {"df", fit.gof.df},
          {"p_value", fit.gof.p_value},
          {"boundary", fit.boundary}};
}

json calibration_json(const CalibrationSummary& c) {
  json j{{"gamma_hat", c.gamma_hat}};
  if (c.control) {
    const GammaEstimate& g = *c.control;
    j["e_c"] = g.e_c;
    j["two_e_c"] = 2.0 * g.e_c;
    j["n_control"] = g.n_c;
    j["phi_implied"] = g.phi_implied;
    if (g.method == GammaMethod::DeltaPi) {
      j["pi_in"] = g.pi_in;
      j["pi_out"] = g.pi_out;
      j["delta_pi"] = g.delta_pi;
      j["pi_ra_target"] = g.pi_ra_target;
      j["theta_hat"] = g.theta_hat;
    }
    j["flags"] = {{"truncated", g.truncated},       {"negative_delta", g.negative_delta},
                  {"boundary", g.boundary},         {"degenerate", g.degenerate},
                  {"exceeds_naive", g.exceeds_naive}};
  }
  if (c.weights) {
    const WeightParams& w = *c.weights;
    j["t0"] = w.t0;
    j["t50"] = w.t50;
    j["w0"] = w.w0;
    j["w50"] = w.w50;
    j["beta0"] = w.beta0;
    j["beta"] = w.beta;
  }
  return j;
}

json attrition_json(const Attrition& a) {
  return {{"n_read", a.n_read},
          {"time_excluded", a.n_time_excluded},
          {"time_excluded_pct", a.n_read ? 100.0 * static_cast<double>(a.n_time_excluded) / static_cast<double>(a.n_read) : 0.0},
          {"n_analyzed", a.n_analyzed},
          {"n_control", a.n_control},
          {"control_excluded", a.n_control_errors}};
}

json provenance_json(const RunConfig& cfg, const std::string& survey) {
  return {{"config", cfg.to_json()},
          {"seed", cfg.bootstrap ? json(cfg.bootstrap->seed) : json(nullptr)},
          {"survey", survey},
          {"tool_version", kToolVersion}};
}

std::string fmt3(double x) { return std::isfinite(x) ? fmt::format("{:.3f}", x) : std::string("-"); }

std::string ci_text(const std::optional<IntervalEstimate>& ci) {
  if (!ci) return "";
  return fmt::format("({}, {})", fmt3(ci->lower), fmt3(ci->upper));
}

void calibration_text(std::ostringstream& os, const CalibrationSummary& c, const RunConfig& cfg) {
  os << fmt::format("gamma method: {}   gamma_hat = {}\n", gamma_choice_name(cfg), fmt3(c.gamma_hat));
  if (c.control) {
    const GammaEstimate& g = *c.control;
    os << fmt::format("  2e_c = {}  (e_c = {}, n_c = {})\n", fmt3(2.0 * g.e_c), fmt3(g.e_c), g.n_c);
    if (g.method == GammaMethod::DeltaPi) {
      os << fmt::format("  pi_in = {}  pi_out = {}  delta_pi = {}  pi_ra target = {}  theta_hat = {}\n", fmt3(g.pi_in),
                        fmt3(g.pi_out), fmt3(g.delta_pi), fmt3(g.pi_ra_target), fmt3(g.theta_hat));
    }
    os << fmt::format("  phi implied = {}", fmt3(g.phi_implied));
    if (g.negative_delta) os << "  [negative delta: no random answering detected]";
    if (g.boundary) os << "  [target not reachable: boundary]";
    if (g.degenerate) os << "  [degenerate: fitted pi = .5]";
    if (g.truncated) os << "  [2e_c truncated at 1]";
    if (g.exceeds_naive) os << "  [gamma_hat exceeds 2e_c]";
    os << '\n';
  }
  if (c.weights) {
    const WeightParams& w = *c.weights;
    os << fmt::format("  t0 = {:.1f}  t50 = {:.1f}  (beta0, beta) = ({:.2f}, {:.2f})  anchors w0 = {}, w50 = {}\n", w.t0,
                      w.t50, w.beta0, w.beta, format_double(w.w0), format_double(w.w50));
  }
}

void attrition_text(std::ostringstream& os, const Attrition& a, const RunConfig& cfg) {
  os << fmt::format("respondents: {} read, {} over {} min excluded, {} analyzed", a.n_read, a.n_time_excluded,
                    format_double(cfg.time_cutoff), a.n_analyzed);
  if (a.n_control) os << fmt::format("; {} of {} failed the control item", a.n_control_errors, a.n_control);
  os << '\n';
}

}  // namespace

void parse_gamma_method(const std::string& text, RunConfig& cfg) {
  if (text == "naive_2ec") {
    cfg.gamma_method = GammaChoice::Naive2ec;
  } else if (text == "delta_pi") {
    cfg.gamma_method = GammaChoice::DeltaPi;
  } else if (text == "none") {
    cfg.gamma_method = GammaChoice::None;
  } else if (text.rfind("fixed:", 0) == 0) {
    KeyValueConfig tmp;
    tmp.set("gamma", text.substr(6));
    cfg.gamma_method = GammaChoice::Fixed;
    cfg.gamma_fixed = tmp.get_double("gamma", 0.0);
  } else {
    throw config_error("gamma_method must be naive_2ec, delta_pi, fixed:<value> or none, got '" + text + "'");
  }
}

void parse_weights(const std::string& text, RunConfig& cfg) {
  if (text == "off") {
    cfg.weighting = false;
    return;
  }
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw config_error("weights must be 'off' or 'w0,w50', got '" + text + "'");
  KeyValueConfig tmp;
  tmp.set("w0", text.substr(0, comma));
  tmp.set("w50", text.substr(comma + 1));
  cfg.weighting = true;
  cfg.w0 = tmp.get_double("w0", cfg.w0);
  cfg.w50 = tmp.get_double("w50", cfg.w50);
  if (!(cfg.w0 > 0.0 && cfg.w0 < 1.0 && cfg.w50 > 0.0 && cfg.w50 < 1.0))
    throw config_error("anchor weights must lie strictly inside (0,1), got '" + text + "'");
}

RunConfig RunConfig::from(const KeyValueConfig& kv) {
  kv.require_known(kRunKeys);
  RunConfig cfg;
  if (!kv.has("p")) throw config_error("config must set the design probability 'p'");
  cfg.p = kv.get_double("p", cfg.p);
  if (kv.has("q") && std::abs(kv.get_double("q", 0.0) - (1.0 - cfg.p)) > 1e-12)
    throw config_error("q must equal 1 - p");
  parse_gamma_method(kv.get_string("gamma_method", "delta_pi"), cfg);

  const std::string base = kv.get_string("base_model", "one_sayers");
  if (base == "ecwm" || base == "ECWM") {
    cfg.base_model = ModelKind::ECWM;
  } else if (base == "one_sayers" || base == "ONE_SAYERS") {
    cfg.base_model = ModelKind::OneSayers;
  } else {
    throw config_error("base_model must be ecwm or one_sayers, got '" + base + "'");
  }

  cfg.weighting = kv.get_bool("weighting", cfg.weighting);
  cfg.w0 = kv.get_double("w0", cfg.w0);
  cfg.w50 = kv.get_double("w50", cfg.w50);
  cfg.time_cutoff = kv.get_double("time_cutoff_minutes", cfg.time_cutoff);

  const long long resamples = kv.get_int("bootstrap", 0);
  if (resamples < 0) throw config_error("bootstrap must be nonnegative");
  BootstrapConfig bc;
  bc.n_resamples = static_cast<std::size_t>(resamples);
  bc.level = kv.get_double("level", bc.level);
  bc.seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(bc.seed)));
  bc.threads = static_cast<unsigned>(kv.get_int("threads", bc.threads));
  bc.stratified = kv.get_bool("stratified_bootstrap", bc.stratified);
  if (resamples > 0) cfg.bootstrap = bc;
  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  try {
    DesignParams design(p);
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  if (gamma_method == GammaChoice::Fixed && !(gamma_fixed >= 0.0 && gamma_fixed < 1.0))
    throw config_error("fixed gamma must lie in [0,1)");
  if (weighting && !(w0 > 0.0 && w0 < 1.0 && w50 > 0.0 && w50 < 1.0))
    throw config_error("anchor weights must lie strictly inside (0,1)");
  if (!(time_cutoff > 0.0)) throw config_error("time cutoff must be positive");
  if (bootstrap) bootstrap->validate();
}

nlohmann::json RunConfig::to_json() const {
  json j{{"p", p},
         {"q", 1.0 - p},
         {"gamma_method", gamma_choice_name(*this)},
         {"base_model", base_model == ModelKind::ECWM ? "ecwm" : "one_sayers"},
         {"weighting", weighting},
         {"w0", w0},
         {"w50", w50},
         {"time_cutoff_minutes", time_cutoff},
         {"bootstrap", bootstrap ? bootstrap->n_resamples : 0}};
  if (bootstrap) {
    j["level"] = bootstrap->level;
    j["seed"] = bootstrap->seed;
    j["threads"] = bootstrap->threads;
    j["stratified_bootstrap"] = bootstrap->stratified;
  }
  return j;
}

std::vector<Respondent> prepare_sample(std::span<const Respondent> records, const RunConfig& cfg,
                                       Attrition& attrition) {
  attrition = Attrition{};
  attrition.n_read = records.size();
  std::size_t with_time = 0;
  std::size_t with_control = 0;
  for (const auto& r : records) {
    with_time += r.time_minutes.has_value();
    with_control += r.control.has_value();
  }
  if (cfg.weighting && with_time == 0)
    throw config_error("weighting requires column 'time_minutes'");
  if (needs_control(cfg) && with_control == 0)
    throw config_error("gamma_method " + gamma_choice_name(cfg) + " requires column 'control_answer'");
  if (needs_control(cfg) && with_control != records.size())
    throw data_error("control answers are missing for " + std::to_string(records.size() - with_control) +
                     " respondents");

  std::vector<Respondent> sample;
  if (with_time == 0) {
    sample.assign(records.begin(), records.end());
  } else {
    if (with_time != records.size())
      throw data_error("completion times are missing for " + std::to_string(records.size() - with_time) +
                       " respondents");
    sample = filter_respondents_by_time(records, cfg.time_cutoff, &attrition.n_time_excluded);
  }
  attrition.n_analyzed = sample.size();
  if (with_control > 0) {
    const ControlOutcome c = control_error_rate(sample);
    attrition.n_control = c.n_c;
    attrition.n_control_errors = c.n_errors;
  }
  return sample;
}

CalibrationSummary calibrate(std::span<const Respondent> sample, const RunConfig& cfg) {
  const DesignParams design(cfg.p);
  CalibrationSummary c;
  c.method = cfg.gamma_method;
  switch (cfg.gamma_method) {
    case GammaChoice::Naive2ec:
      c.control = gamma_naive(control_error_rate(sample));
      c.gamma_hat = c.control->gamma_hat;
      break;
    case GammaChoice::DeltaPi:
      c.control = gamma_delta_pi(sample, design, cfg.base_model);
      c.gamma_hat = c.control->gamma_hat;
      break;
    case GammaChoice::Fixed: c.gamma_hat = cfg.gamma_fixed; break;
    case GammaChoice::None: c.gamma_hat = 0.0; break;
  }
  if (cfg.weighting) {
    std::vector<double> times;
    times.reserve(sample.size());
    for (const auto& r : sample) times.push_back(*r.time_minutes);
    c.weights = weight_params_from_times(times, cfg.w0, cfg.w50);
  }
  return c;
}

Ladder estimate_ladder(std::span<const Respondent> sample, const RunConfig& cfg) {
  const DesignParams design(cfg.p);
  Ladder out;
  out.calibration = calibrate(sample, cfg);
  const double gamma = out.calibration.gamma_hat;
  const ResponseCounts counts = ResponseCounts::tally(sample);

  out.rows.push_back({"ECWM", fit_mle(ModelSpec::ecwm(), counts, design, Solver::Exact), {}, {}, {}});
  out.rows.push_back({"+ one-saying", fit_mle(ModelSpec::one_sayers(), counts, design, Solver::Exact), {}, {}, {}});
  if (cfg.gamma_method != GammaChoice::None) {
    out.rows.push_back({"+ ra", fit_mle(ModelSpec::one_sayers_ra(gamma), counts, design, Solver::Exact), {}, {}, {}});
  }
  if (cfg.weighting) {
    const auto w = respondent_weights(sample, *out.calibration.weights);
    out.rows.push_back(
        {"+ weights", fit_weighted_mle(ModelSpec::one_sayers_ra(gamma), sample, w, design, Solver::Exact), {}, {}, {}});
  }
  const double ecwm = out.rows.front().fit.pi_hat;
  for (auto& row : out.rows) {
    if (ecwm > 0.0) row.pct_of_ecwm = 100.0 * row.fit.pi_hat / ecwm;
  }
  return out;
}

Report run_fit(std::span<const Respondent> records, const RunConfig& cfg, const std::string& survey) {
  cfg.validate();
  Report report;
  report.config = cfg;
  report.survey = survey;
  const std::vector<Respondent> sample = prepare_sample(records, cfg, report.attrition);
  report.ladder = estimate_ladder(sample, cfg);

  if (cfg.bootstrap) {
    // Outputs: gamma_hat, then pi (and theta where present) per ladder row.
    const VectorPipeline pipeline = [&cfg](std::span<const Respondent> s) {
      const Ladder l = estimate_ladder(s, cfg);
      std::vector<double> v{l.calibration.gamma_hat};
      for (const auto& row : l.rows) {
        v.push_back(row.fit.pi_hat);
        if (row.fit.theta_hat) v.push_back(*row.fit.theta_hat);
      }
      return v;
    };
    const auto cis = bootstrap_ci(sample, pipeline, *cfg.bootstrap);
    std::size_t k = 0;
    report.gamma_ci = cis[k++];
    for (auto& row : report.ladder.rows) {
      row.pi_ci = cis[k++];
      if (row.fit.theta_hat) row.theta_ci = cis[k++];
    }
  }
  return report;
}

nlohmann::json to_json(const Report& report) {
  json ladder = json::array();
  for (const auto& row : report.ladder.rows) {
    json j = fit_json(row.fit);
    j["model"] = row.label;
    j["pi_ci"] = interval_json(row.pi_ci);
    j["theta_ci"] = interval_json(row.theta_ci);
    j["pct_of_ecwm"] = optional_number(row.pct_of_ecwm);
    ladder.push_back(std::move(j));
  }
  json cal = calibration_json(report.ladder.calibration);
  cal["gamma_ci"] = interval_json(report.gamma_ci);
  return {{"calibration", cal},
          {"ladder", ladder},
          {"attrition", attrition_json(report.attrition)},
          {"provenance", provenance_json(report.config, report.survey)}};
}

std::string render_text(const Report& report) {
  std::ostringstream os;
  attrition_text(os, report.attrition, report.config);
  calibration_text(os, report.ladder.calibration, report.config);
  os << '\n';
  os << fmt::format("{:<14} {:>7} {:<16} {:>8} {:>7} {:<16} {}\n", "Model", "pi_hat", "(95% CI)", "%ECWM", "theta",
                    "(95% CI)", "goodness-of-fit");
  for (const auto& row : report.ladder.rows) {
    const FitResult& f = row.fit;
    const std::string pct = row.pct_of_ecwm ? fmt::format("{:.1f}", *row.pct_of_ecwm) : "-";
    const std::string theta = f.theta_hat ? fmt3(*f.theta_hat) : "";
    std::string gof = fmt::format("G2_{} = {:.1f}", f.gof.df, f.gof.g2);
    if (f.gof.df > 0) gof += f.gof.p_value < 0.001 ? ", p < .001" : fmt::format(", p = {:.3f}", f.gof.p_value);
    os << fmt::format("{:<14} {:>7} {:<16} {:>8} {:>7} {:<16} {}\n", row.label, fmt3(f.pi_hat), ci_text(row.pi_ci),
                      pct, theta, ci_text(row.theta_ci), gof);
  }
  if (report.config.bootstrap) {
    os << fmt::format("\nintervals: {} nonparametric bootstrap resamples, percentile method, level {}, seed {}\n",
                      report.config.bootstrap->n_resamples, format_double(report.config.bootstrap->level),
                      report.config.bootstrap->seed);
  }
  return os.str();
}

SensitivityReport run_sensitivity(std::span<const Respondent> records, const RunConfig& cfg,
                                  const std::string& survey) {
  RunConfig c = cfg;
  c.weighting = true;
  c.validate();
  SensitivityReport report;
  report.config = c;
  report.survey = survey;
  const std::vector<Respondent> sample = prepare_sample(records, c, report.attrition);
  report.calibration = calibrate(sample, c);
  report.grid = sensitivity_grid(sample, DesignParams(c.p), ModelSpec::one_sayers_ra(report.calibration.gamma_hat));
  return report;
}

nlohmann::json to_json(const SensitivityReport& report) {
  json cells = json::array();
  for (const auto& cell : report.grid.cells) {
    json j{{"w0", cell.w0}, {"w50", cell.w50}, {"beta0", cell.params.beta0}, {"beta", cell.params.beta}};
    if (cell.fit) {
      j["pi_hat"] = cell.fit->pi_hat;
      j["theta_hat"] = optional_number(cell.fit->theta_hat);
    } else {
      j["pi_hat"] = nullptr;
      j["error"] = cell.error;
    }
    j["default"] = cell.w0 == 0.1 && cell.w50 == 0.9;
    cells.push_back(std::move(j));
  }
  return {{"calibration", calibration_json(report.calibration)},
          {"grid", {{"w0", report.grid.w0s}, {"w50", report.grid.w50s}, {"cells", cells}}},
          {"attrition", attrition_json(report.attrition)},
          {"provenance", provenance_json(report.config, report.survey)}};
}

std::string render_text(const SensitivityReport& report) {
  std::ostringstream os;
  attrition_text(os, report.attrition, report.config);
  calibration_text(os, report.calibration, report.config);
  os << "\nweighted one-sayers+RA pi_hat by anchor weights (* = default anchors)\n";
  os << fmt::format("{:>10}", "w0 \\ w50");
  for (double w50 : report.grid.w50s) os << fmt::format(" {:>9}", format_double(w50));
  os << '\n';
  for (std::size_t i = 0; i < report.grid.w0s.size(); ++i) {
    os << fmt::format("{:>10}", format_double(report.grid.w0s[i]));
    for (std::size_t k = 0; k < report.grid.w50s.size(); ++k) {
      const SensitivityCell& cell = report.grid.at(i, k);
      const bool is_default = cell.w0 == 0.1 && cell.w50 == 0.9;
      const std::string v = cell.fit ? fmt3(cell.fit->pi_hat) : "error";
      os << fmt::format(" {:>9}", (is_default ? "*" : "") + v);
    }
    os << '\n';
  }
  return os.str();
}

PopulationSpec population_from(const KeyValueConfig& kv, std::uint64_t& seed) {
  kv.require_known({"n", "pi", "theta", "gamma", "phi", "p", "subsample_split", "force_balance", "with_control",
                    "with_time", "link_random_to_speed", "median_time", "median_time_random", "time_sigma",
                    "timer_failure_rate", "time_resolution", "seed"});
  PopulationSpec spec;
  const long long n = kv.get_int("n", static_cast<long long>(spec.n));
  if (n < 1) throw config_error("n must be positive");
  spec.n = static_cast<std::size_t>(n);
  spec.pi = kv.get_double("pi", spec.pi);
  spec.theta = kv.get_double("theta", spec.theta);
  spec.gamma = kv.get_double("gamma", spec.gamma);
  spec.phi = kv.get_double("phi", spec.phi);
  try {
    spec.design = DesignParams(kv.get_double("p", spec.design.p()));
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  spec.subsample_split = kv.get_double("subsample_split", spec.subsample_split);
  spec.force_balance = kv.get_bool("force_balance", spec.force_balance);
  spec.with_control = kv.get_bool("with_control", spec.with_control);
  spec.with_time = kv.get_bool("with_time", spec.with_time);
  spec.link_random_to_speed = kv.get_bool("link_random_to_speed", spec.link_random_to_speed);
  spec.time_model.median_attentive = kv.get_double("median_time", spec.time_model.median_attentive);
  spec.time_model.median_random = kv.get_double("median_time_random", spec.time_model.median_random);
  spec.time_model.sigma = kv.get_double("time_sigma", spec.time_model.sigma);
  spec.time_model.timer_failure_rate = kv.get_double("timer_failure_rate", spec.time_model.timer_failure_rate);
  spec.time_model.resolution = kv.get_double("time_resolution", spec.time_model.resolution);
  seed = static_cast<std::uint64_t>(kv.get_int("seed", static_cast<long long>(seed)));
  try {
    spec.validate();
  } catch (const Error& e) {
    throw config_error(e.what());
  }
  return spec;
}

std::vector<BiasRow> bias_surface(double step, const std::vector<double>& thetas) {
  if (!(step > 0.0 && step <= 1.0)) throw domain_error("bias surface step must lie in (0,1]");
  const int k = static_cast<int>(std::lround(1.0 / step));
  std::vector<BiasRow> rows;
  for (double theta : thetas) {
    for (int g = 0; g <= k; ++g) {
      const double gamma = static_cast<double>(g) / k;
      if (theta + gamma > 1.0 + 1e-12) break;
      for (int i = 0; i <= k; ++i) {
        const double pi = static_cast<double>(i) / k;
        const BiasExpectation e = expected_bias(pi, theta, std::min(gamma, 1.0 - theta));
        rows.push_back({pi, theta, gamma, e.expected_pi_hat, e.bias});
      }
    }
  }
  return rows;
}

void write_bias_surface_csv(std::ostream& out, std::span<const BiasRow> rows) {
  out << "pi,theta,gamma,expected_pi_hat,bias\n";
  for (const auto& r : rows) {
    out << format_double(r.pi) << ',' << format_double(r.theta) << ',' << format_double(r.gamma) << ','
        << format_double(r.expected_pi_hat) << ',' << format_double(r.bias) << '\n';
  }
}

}  // namespace ecwm
