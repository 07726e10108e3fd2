#include "ecwm/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "ecwm/errors.hpp"

namespace ecwm {

namespace {

std::size_t balanced_first_arm(const PopulationSpec& spec) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(spec.n) * spec.subsample_split));
}

double record_time(double t, double resolution) {
  if (resolution <= 0.0) return t;
  // Dividing by the integer step count keeps values like 2.3 exactly representable.
  const double steps = std::round(1.0 / resolution);
  return std::max(resolution, std::round(t * steps) / steps);
}

}  // namespace

void PopulationSpec::validate() const {
  validate_params({pi, theta, gamma});
  if (!(phi >= 0.0 && phi <= 1.0 - gamma)) throw domain_error("phi must lie in [0, 1 - gamma]");
  if (!(subsample_split >= 0.0 && subsample_split <= 1.0)) throw domain_error("subsample_split must lie in [0,1]");
  if (!(time_model.median_attentive > 0.0 && time_model.median_random > 0.0 && time_model.sigma >= 0.0))
    throw domain_error("time model medians must be positive and sigma nonnegative");
  if (!(time_model.timer_failure_rate >= 0.0 && time_model.timer_failure_rate <= 1.0))
    throw domain_error("timer_failure_rate must lie in [0,1]");
  if (time_model.resolution < 0.0) throw domain_error("time resolution must be nonnegative");
}

std::vector<SimRecord> simulate(const PopulationSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  const std::size_t n1 = balanced_first_arm(spec);
  const double ignorance = spec.gamma < 1.0 ? spec.phi / (1.0 - spec.gamma) : 0.0;
  const int width = static_cast<int>(std::to_string(spec.n).size());

  std::vector<SimRecord> out;
  out.reserve(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    // Fixed draw order per respondent keeps streams aligned across specs.
    const double u_arm = unif(rng);
    const double u_class = unif(rng);
    const double u_sensitive = unif(rng);
    const double u_answer = unif(rng);
    const double u_b = unif(rng);
    const double u_control = unif(rng);
    const double z_time = normal(rng);
    const double u_timer = unif(rng);
    const double u_late = unif(rng);

    SimRecord rec;
    Respondent& r = rec.respondent;
    char id[32];
    std::snprintf(id, sizeof id, "r%0*zu", width, i + 1);
    r.id = id;
    r.subsample = spec.force_balance ? (i < n1 ? 1 : 2) : (u_arm < spec.subsample_split ? 1 : 2);

    if (u_class < spec.theta) {
      rec.latent = LatentClass::OneSayer;
    } else if (u_class < spec.theta + spec.gamma) {
      rec.latent = LatentClass::Random;
    } else {
      rec.latent = LatentClass::Honest;
    }
    rec.sensitive = u_sensitive < spec.pi;

    switch (rec.latent) {
      case LatentClass::Honest: {
        const double p_diff = honest_different_prob(rec.sensitive, r.subsample, spec.design);
        r.answer = u_answer < p_diff ? Answer::Different : Answer::Same;
        break;
      }
      case LatentClass::OneSayer: r.answer = Answer::Different; break;
      case LatentClass::Random: r.answer = u_answer < 0.5 ? Answer::Different : Answer::Same; break;
    }

    if (spec.with_control) {
      ControlItem c;
      c.a_true = true;
      const bool b_yes = u_b < 0.5;
      c.b_prob = b_yes ? 1.0 : 0.0;
      const Answer right = correct_control_answer(true, b_yes);
      if (rec.latent == LatentClass::Random) {
        c.answer = u_control < 0.5 ? Answer::Different : Answer::Same;
      } else if (u_control < ignorance) {
        c.answer = correct_control_answer(false, b_yes);
      } else {
        c.answer = right;
      }
      rec.control_correct = c.answer == right;
      r.control = c;
    }

    if (spec.with_time) {
      const TimeModel& tm = spec.time_model;
      const bool fast = spec.link_random_to_speed && rec.latent == LatentClass::Random;
      double t = (fast ? tm.median_random : tm.median_attentive) * std::exp(tm.sigma * z_time);
      if (u_timer < tm.timer_failure_rate) t = 15.1 + 44.9 * u_late;
      r.time_minutes = record_time(t, tm.resolution);
    }
    out.push_back(std::move(rec));
  }
  return out;
}

std::vector<Respondent> to_respondents(std::span<const SimRecord> records) {
  std::vector<Respondent> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.respondent);
  return out;
}

ResponseCounts oracle_counts(const PopulationSpec& spec) {
  spec.validate();
  const double n = static_cast<double>(spec.n);
  const double n1 = spec.force_balance ? static_cast<double>(balanced_first_arm(spec)) : n * spec.subsample_split;
  const double n2 = n - n1;
  const ResponseProbs probs =
      response_probs(ModelSpec::one_sayers_ra(spec.gamma), {spec.pi, spec.theta, spec.gamma}, spec.design);
  return ResponseCounts({n1 * probs.probs[0], n1 * probs.probs[1], n2 * probs.probs[2], n2 * probs.probs[3]});
}

}  // namespace ecwm
