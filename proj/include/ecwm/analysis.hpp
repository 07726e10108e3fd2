#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecwm/bootstrap.hpp"
#include "ecwm/calibration.hpp"
#include "ecwm/estimation.hpp"
#include "ecwm/simulator.hpp"
#include "ecwm/timeweights.hpp"
#include "json.hpp"

namespace ecwm {

inline constexpr const char* kToolVersion = "0.1.0";

class KeyValueConfig;

enum class GammaChoice { Naive2ec, DeltaPi, Fixed, None };

struct RunConfig {
  double p = 0.2;
  GammaChoice gamma_method = GammaChoice::DeltaPi;
  double gamma_fixed = 0.0;
  ModelKind base_model = ModelKind::OneSayers;
  bool weighting = true;
  double w0 = 0.1;
  double w50 = 0.9;
  double time_cutoff = kDefaultTimeCutoff;
  std::optional<BootstrapConfig> bootstrap;  // nullopt: no intervals

  // Reads every key with its default; unknown keys are rejected.
  static RunConfig from(const KeyValueConfig& cfg);
  void validate() const;
  nlohmann::json to_json() const;
};

// "naive_2ec", "delta_pi", "fixed:<value>", "none".
void parse_gamma_method(const std::string& text, RunConfig& cfg);
// "off" or "w0,w50".
void parse_weights(const std::string& text, RunConfig& cfg);

struct CalibrationSummary {
  GammaChoice method = GammaChoice::None;
  double gamma_hat = 0.0;
  std::optional<GammaEstimate> control;  // naive_2ec / delta_pi details
  std::optional<WeightParams> weights;
};

struct LadderRow {
  std::string label;
  FitResult fit;
  std::optional<IntervalEstimate> pi_ci;
  std::optional<IntervalEstimate> theta_ci;
  std::optional<double> pct_of_ecwm;
};

struct Attrition {
  std::size_t n_read = 0;
  std::size_t n_time_excluded = 0;
  std::size_t n_analyzed = 0;
  std::size_t n_control = 0;
  std::size_t n_control_errors = 0;
};

struct Ladder {
  CalibrationSummary calibration;
  std::vector<LadderRow> rows;
};

// Applies the time cutoff (when times are present) and checks that the
// columns the configuration needs exist.
std::vector<Respondent> prepare_sample(std::span<const Respondent> records, const RunConfig& cfg,
                                       Attrition& attrition);

CalibrationSummary calibrate(std::span<const Respondent> sample, const RunConfig& cfg);

// ECWM, + one-saying, + ra (unless gamma_method = none), + weights (when weighting).
Ladder estimate_ladder(std::span<const Respondent> sample, const RunConfig& cfg);

struct Report {
  Ladder ladder;
  std::optional<IntervalEstimate> gamma_ci;
  Attrition attrition;
  RunConfig config;
  std::string survey;
};

Report run_fit(std::span<const Respondent> records, const RunConfig& cfg, const std::string& survey = "");
nlohmann::json to_json(const Report& report);
std::string render_text(const Report& report);

struct SensitivityReport {
  CalibrationSummary calibration;
  SensitivityGrid grid;
  Attrition attrition;
  RunConfig config;
  std::string survey;
};

SensitivityReport run_sensitivity(std::span<const Respondent> records, const RunConfig& cfg,
                                  const std::string& survey = "");
nlohmann::json to_json(const SensitivityReport& report);
std::string render_text(const SensitivityReport& report);

// Simulation settings from a flat config; `seed` is read into `seed`.
PopulationSpec population_from(const KeyValueConfig& cfg, std::uint64_t& seed);

struct BiasRow {
  double pi = 0.0;
  double theta = 0.0;
  double gamma = 0.0;
  double expected_pi_hat = 0.0;
  double bias = 0.0;
};

// Expected uncorrected ECWM estimate over pi, gamma in steps of `step` and
// the given theta values, keeping theta + gamma <= 1.
std::vector<BiasRow> bias_surface(double step = 0.05, const std::vector<double>& thetas = {0.0, 0.1, 0.2, 0.3});
void write_bias_surface_csv(std::ostream& out, std::span<const BiasRow> rows);

}  // namespace ecwm
