#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "ecwm/respondent.hpp"

namespace ecwm {

// Randomization probability of the sub-sample-1 arm; sub-sample 2 uses q = 1 - p.
class DesignParams {
 public:
  explicit DesignParams(double p);
  double p() const noexcept { return p_; }
  double q() const noexcept { return 1.0 - p_; }
  // p for sub-sample 1, q for sub-sample 2.
  double arm(int subsample) const;

 private:
  double p_;
};

struct ModelParams {
  double pi = 0.0;
  double theta = 0.0;
  double gamma = 0.0;
};

enum class ModelKind { CWM, ECWM, ECWM_RA, OneSayers, OneSayersRA };

std::string_view to_string(ModelKind k);
bool has_theta(ModelKind k);
bool has_gamma(ModelKind k);

struct ModelSpec {
  ModelKind kind = ModelKind::ECWM;
  std::optional<double> fixed_gamma;

  static ModelSpec cwm() { return {ModelKind::CWM, std::nullopt}; }
  static ModelSpec ecwm() { return {ModelKind::ECWM, std::nullopt}; }
  static ModelSpec ecwm_ra(double gamma) { return {ModelKind::ECWM_RA, gamma}; }
  static ModelSpec one_sayers() { return {ModelKind::OneSayers, std::nullopt}; }
  static ModelSpec one_sayers_ra(double gamma) { return {ModelKind::OneSayersRA, gamma}; }

  // The random-answering variant of a base model, identified by fixing gamma.
  static ModelSpec with_random_answering(ModelKind base, double gamma);

  // Throws DomainError unless RA kinds carry a gamma in [0,1] and others carry none.
  void validate() const;
  // Number of free parameters (gamma is never free).
  int free_parameters() const;
};

// pi*_{y|s} stored as (1|1, 2|1, 1|2, 2|2), the row order of the model matrices.
struct ResponseProbs {
  std::array<double, 4> probs{};

  double at(Answer y, int s) const { return probs[index(y, s)]; }
  static std::size_t index(Answer y, int s) {
    return static_cast<std::size_t>((s - 1) * 2 + (static_cast<int>(y) - 1));
  }
};

// Checks 0 <= pi, theta, gamma <= 1 and theta + gamma <= 1.
void validate_params(const ModelParams& params);

// Exact randomized-response probabilities for the chosen model. Parameters the
// model does not contain are ignored (theta for ECWM/ECWM_RA, gamma for the
// non-RA kinds). For CWM the sub-sample 2 entries mirror the ECWM q arm.
ResponseProbs response_probs(const ModelSpec& spec, const ModelParams& params,
                             const DesignParams& design);

// response_probs plus assertion of the model nesting identities:
// ECWM_RA(gamma=0) == ECWM, OneSayersRA(gamma=0) == OneSayers,
// OneSayersRA(theta=0) == ECWM_RA. Throws InternalError on mismatch.
ResponseProbs reduce_check(const ModelSpec& spec, const ModelParams& params,
                           const DesignParams& design);

// Probability that an attentive honest respondent in sub-sample s answers
// DIFFERENT, given their sensitive status.
double honest_different_prob(bool sensitive, int subsample, const DesignParams& design);

}  // namespace ecwm
