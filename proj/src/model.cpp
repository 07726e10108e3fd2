#include "ecwm/model.hpp"

#include <cmath>
#include <string>

#include "ecwm/errors.hpp"

namespace ecwm {

namespace {

bool is_probability(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

void assert_close(const ResponseProbs& a, const ResponseProbs& b, const char* what) {
  for (std::size_t i = 0; i < 4; ++i) {
    if (std::abs(a.probs[i] - b.probs[i]) > 1e-12)
      throw internal_error(std::string("model nesting identity violated: ") + what);
  }
}

}  // namespace

DesignParams::DesignParams(double p) : p_(p) {
  if (!std::isfinite(p) || p <= 0.0 || p >= 1.0)
    throw design_error("randomization probability p must lie in (0,1), got " + std::to_string(p));
  if (p == 0.5) throw design_error("p = 0.5 leaves the model unidentified");
}

double DesignParams::arm(int subsample) const {
  if (subsample == 1) return p();
  if (subsample == 2) return q();
  throw domain_error("sub-sample must be 1 or 2, got " + std::to_string(subsample));
}

std::string_view to_string(ModelKind k) {
  switch (k) {
    case ModelKind::CWM: return "CWM";
    case ModelKind::ECWM: return "ECWM";
    case ModelKind::ECWM_RA: return "ECWM_RA";
    case ModelKind::OneSayers: return "ONE_SAYERS";
    case ModelKind::OneSayersRA: return "ONE_SAYERS_RA";
  }
  return "?";
}

bool has_theta(ModelKind k) { return k == ModelKind::OneSayers || k == ModelKind::OneSayersRA; }
bool has_gamma(ModelKind k) { return k == ModelKind::ECWM_RA || k == ModelKind::OneSayersRA; }

ModelSpec ModelSpec::with_random_answering(ModelKind base, double gamma) {
  switch (base) {
    case ModelKind::ECWM:
    case ModelKind::ECWM_RA: return ecwm_ra(gamma);
    case ModelKind::OneSayers:
    case ModelKind::OneSayersRA: return one_sayers_ra(gamma);
    case ModelKind::CWM: break;
  }
  throw domain_error("no random-answering variant of CWM");
}

void ModelSpec::validate() const {
  if (has_gamma(kind)) {
    if (!fixed_gamma) throw domain_error(std::string(to_string(kind)) + " requires a fixed gamma");
    if (!is_probability(*fixed_gamma))
      throw domain_error("fixed gamma must lie in [0,1], got " + std::to_string(*fixed_gamma));
  } else if (fixed_gamma) {
    throw domain_error(std::string(to_string(kind)) + " does not take a fixed gamma");
  }
}

int ModelSpec::free_parameters() const { return has_theta(kind) ? 2 : 1; }

void validate_params(const ModelParams& params) {
  if (!is_probability(params.pi)) throw domain_error("pi must lie in [0,1], got " + std::to_string(params.pi));
  if (!is_probability(params.theta))
    throw domain_error("theta must lie in [0,1], got " + std::to_string(params.theta));
  if (!is_probability(params.gamma))
    throw domain_error("gamma must lie in [0,1], got " + std::to_string(params.gamma));
  if (params.theta + params.gamma > 1.0 + 1e-15)
    throw domain_error("theta + gamma must not exceed 1");
}

double honest_different_prob(bool sensitive, int subsample, const DesignParams& design) {
  const double a = design.arm(subsample);
  return sensitive ? a : 1.0 - a;
}

ResponseProbs response_probs(const ModelSpec& spec, const ModelParams& params,
                             const DesignParams& design) {
  spec.validate();
  validate_params(params);
  const double theta = has_theta(spec.kind) ? params.theta : 0.0;
  const double gamma = has_gamma(spec.kind) ? params.gamma : 0.0;
  const double p = design.p();
  const double q = design.q();
  const double pi = params.pi;
  const double attentive = 1.0 - gamma - theta;

  // Honest DIFFERENT probability in the p arm; the q arm mirrors it.
  const double diff_p = p * pi + q * (1.0 - pi);
  const double diff_q = q * pi + p * (1.0 - pi);

  ResponseProbs out;
  out.probs[0] = attentive * diff_p + theta + 0.5 * gamma;  // DIFFERENT | 1
  out.probs[1] = attentive * diff_q + 0.5 * gamma;          // SAME | 1
  out.probs[2] = attentive * diff_q + theta + 0.5 * gamma;  // DIFFERENT | 2
  out.probs[3] = attentive * diff_p + 0.5 * gamma;          // SAME | 2

  for (int s = 0; s < 2; ++s) {
    const double sum = out.probs[2 * s] + out.probs[2 * s + 1];
    if (std::abs(sum - 1.0) > 1e-12) throw internal_error("response probabilities do not sum to 1");
  }
  return out;
}

ResponseProbs reduce_check(const ModelSpec& spec, const ModelParams& params,
                           const DesignParams& design) {
  const ResponseProbs out = response_probs(spec, params, design);
  const ModelParams no_ra{params.pi, params.theta, 0.0};
  const ModelParams plain{params.pi, 0.0, 0.0};

  switch (spec.kind) {
    case ModelKind::ECWM_RA:
      if (params.gamma == 0.0)
        assert_close(out, response_probs(ModelSpec::ecwm(), plain, design), "ECWM_RA(gamma=0) vs ECWM");
      break;
    case ModelKind::OneSayersRA:
      if (params.gamma == 0.0)
        assert_close(out, response_probs(ModelSpec::one_sayers(), no_ra, design),
                     "ONE_SAYERS_RA(gamma=0) vs ONE_SAYERS");
      if (params.theta == 0.0)
        assert_close(out, response_probs(ModelSpec::ecwm_ra(params.gamma), params, design),
                     "ONE_SAYERS_RA(theta=0) vs ECWM_RA");
      if (params.theta == 0.0 && params.gamma == 0.0)
        assert_close(out, response_probs(ModelSpec::ecwm(), plain, design),
                     "ONE_SAYERS_RA(theta=gamma=0) vs ECWM");
      break;
    case ModelKind::OneSayers:
      if (params.theta == 0.0)
        assert_close(out, response_probs(ModelSpec::ecwm(), plain, design), "ONE_SAYERS(theta=0) vs ECWM");
      break;
    case ModelKind::CWM:
    case ModelKind::ECWM: break;
  }
  return out;
}

}  // namespace ecwm
