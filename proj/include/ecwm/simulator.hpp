#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "ecwm/estimation.hpp"
#include "ecwm/model.hpp"
#include "ecwm/respondent.hpp"

namespace ecwm {

// Log-normal completion times per responder class, in minutes.
struct TimeModel {
  double median_attentive = 3.5;
  double median_random = 1.2;  // only used when random answering is linked to speed
  double sigma = 0.45;         // standard deviation on the log scale
  // Share of respondents whose timer kept running: times land in (15.1, 60].
  double timer_failure_rate = 0.0;
  double resolution = 0.1;  // recorded precision; 0 keeps full precision
};

struct PopulationSpec {
  std::size_t n = 1000;
  double pi = 0.25;
  double theta = 0.0;
  double gamma = 0.0;
  // Population share of non-random respondents who believe statement A is
  // false and so fail the control item; e_c = gamma / 2 + phi.
  double phi = 0.0;
  DesignParams design{0.2};
  double subsample_split = 0.5;
  bool force_balance = false;  // exactly round(n * split) respondents in sub-sample 1
  bool with_control = true;
  bool with_time = true;
  TimeModel time_model;
  bool link_random_to_speed = false;

  void validate() const;
};

enum class LatentClass { Honest, OneSayer, Random };

struct SimRecord {
  Respondent respondent;
  bool control_correct = true;
  bool sensitive = false;
  LatentClass latent = LatentClass::Honest;
};

std::vector<SimRecord> simulate(const PopulationSpec& spec, std::uint64_t seed);

std::vector<Respondent> to_respondents(std::span<const SimRecord> records);

// Expected cell totals n_s * pi*_{y|s} under the generating model, no sampling noise.
ResponseCounts oracle_counts(const PopulationSpec& spec);

}  // namespace ecwm
