#include "ecwm/estimation.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "ecwm/errors.hpp"
#include "optimize.hpp"

namespace ecwm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kGridStep = 0.01;
constexpr double kBoundaryTol = 1e-7;

Estimate clip_unit(double raw, double hi = 1.0) {
  Estimate e;
  e.raw = raw;
  e.value = std::clamp(raw, 0.0, hi);
  e.clipped = !(raw >= 0.0 && raw <= hi);
  return e;
}

// Model probabilities without validation; the caller guarantees admissibility.
std::array<double, 4> probs_unchecked(ModelKind kind, double pi, double theta, double gamma,
                                      const DesignParams& design) {
  if (!has_theta(kind)) theta = 0.0;
  if (!has_gamma(kind)) gamma = 0.0;
  const double p = design.p();
  const double q = design.q();
  const double attentive = 1.0 - gamma - theta;
  const double diff_p = p * pi + q * (1.0 - pi);
  const double diff_q = q * pi + p * (1.0 - pi);
  return {attentive * diff_p + theta + 0.5 * gamma, attentive * diff_q + 0.5 * gamma,
          attentive * diff_q + theta + 0.5 * gamma, attentive * diff_p + 0.5 * gamma};
}

double loglik_unchecked(ModelKind kind, double pi, double theta, double gamma,
                        const ResponseCounts& counts, const DesignParams& design) {
  const auto probs = probs_unchecked(kind, pi, theta, gamma, design);
  const auto& n = counts.cells();
  const std::size_t cells = kind == ModelKind::CWM ? 2 : 4;
  double ll = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    if (n[i] == 0.0) continue;
    if (probs[i] <= 0.0) return kNegInf;
    ll += n[i] * std::log(probs[i]);
  }
  return ll;
}

double theta_upper(ModelKind kind, double gamma) { return has_theta(kind) ? 1.0 - gamma : 0.0; }

void require_fit_data(const ModelSpec& spec, const ResponseCounts& counts) {
  if (spec.kind == ModelKind::CWM) {
    if (counts.subsample_total(1) <= 0.0) throw data_error("CWM fit needs a non-empty sub-sample 1");
    return;
  }
  if (counts.subsample_total(1) <= 0.0 || counts.subsample_total(2) <= 0.0)
    throw data_error("both sub-samples must be non-empty");
}

void finish(FitResult& fit, const ResponseCounts& counts, const DesignParams& design) {
  const ModelParams at{fit.pi_hat, fit.theta_hat.value_or(0.0), fit.gamma_fixed};
  fit.fitted.probs = probs_unchecked(fit.spec.kind, at.pi, at.theta, at.gamma, design);
  fit.loglik = log_likelihood(fit.spec, at, counts, design);
  fit.gof = gof_g2(fit.spec, counts, fit);
}

FitResult fit_numeric(const ModelSpec& spec, const ResponseCounts& counts, const DesignParams& design) {
  const double gamma = spec.fixed_gamma.value_or(0.0);
  const double t_max = theta_upper(spec.kind, gamma);
  auto ll = [&](double pi, double theta) {
    if (pi < 0.0 || pi > 1.0 || theta < 0.0 || theta > t_max) return kNegInf;
    return loglik_unchecked(spec.kind, pi, theta, gamma, counts, design);
  };

  // Coarse scan to locate the basin.
  double grid_pi = 0.0;
  double grid_theta = 0.0;
  double grid_best = kNegInf;
  const int n_pi = static_cast<int>(std::lround(1.0 / kGridStep));
  const int n_theta = has_theta(spec.kind) ? static_cast<int>(std::floor(t_max / kGridStep + 1e-9)) : 0;
  for (int i = 0; i <= n_pi; ++i) {
    const double pi = i * kGridStep;
    for (int j = 0; j <= n_theta + 1; ++j) {
      const double theta = std::min(j * kGridStep, t_max);
      const double v = ll(pi, theta);
      if (v > grid_best) {
        grid_best = v;
        grid_pi = pi;
        grid_theta = theta;
      }
      if (!has_theta(spec.kind)) break;
    }
  }

  const double lo = std::max(0.0, grid_pi - kGridStep);
  const double hi = std::min(1.0, grid_pi + kGridStep);
  double pi_hat = grid_pi;
  double theta_hat = grid_theta;
  if (!has_theta(spec.kind)) {
    const auto m = detail::golden_maximize([&](double pi) { return ll(pi, 0.0); }, lo, hi);
    if (m.fx >= grid_best) pi_hat = m.x;
  } else {
    // For fixed pi the probabilities are affine in theta, so the inner
    // problem is concave and a golden search over the full range is safe.
    auto inner = [&](double pi) {
      return detail::golden_maximize([&](double theta) { return ll(pi, theta); }, 0.0, t_max);
    };
    const auto m = detail::golden_maximize([&](double pi) { return inner(pi).fx; }, lo, hi);
    if (m.fx >= grid_best) {
      pi_hat = m.x;
      theta_hat = inner(m.x).x;
    }
  }

  FitResult fit;
  fit.spec = spec;
  fit.method = FitMethod::Mle;
  fit.pi_hat = fit.pi_raw = pi_hat;
  fit.gamma_fixed = gamma;
  if (has_theta(spec.kind)) {
    fit.theta_hat = theta_hat;
    fit.theta_raw = theta_hat;
  }
  fit.boundary = pi_hat < kBoundaryTol || pi_hat > 1.0 - kBoundaryTol ||
                 (has_theta(spec.kind) && (theta_hat < kBoundaryTol || theta_hat > t_max - kBoundaryTol));
  finish(fit, counts, design);
  return fit;
}

std::optional<FitResult> fit_closed_form(const ModelSpec& spec, const ResponseCounts& counts,
                                         const DesignParams& design) {
  const double gamma = spec.fixed_gamma.value_or(0.0);
  FitResult fit;
  switch (spec.kind) {
    case ModelKind::CWM: {
      const double a = counts.conditional(Answer::Different, 1);
      const Estimate e = clip_unit((a - design.q()) / (design.p() - design.q()));
      fit.pi_hat = e.value;
      fit.pi_raw = e.raw;
      fit.boundary = e.clipped || e.value == 0.0 || e.value == 1.0;
      break;
    }
    case ModelKind::ECWM:
    case ModelKind::ECWM_RA: {
      // The likelihood depends on the data only through (n11 + n22) / n and is
      // concave in that cell probability, so the clipped plug-in is the MLE.
      if (gamma >= 1.0) return std::nullopt;
      const FitResult m = moment_ecwm_ra(counts, design, gamma);
      fit.pi_hat = m.pi_hat;
      fit.pi_raw = m.pi_raw;
      fit.boundary = m.pi_clipped || m.pi_hat == 0.0 || m.pi_hat == 1.0;
      break;
    }
    case ModelKind::OneSayers:
    case ModelKind::OneSayersRA: {
      // Saturated: an admissible moment solution reproduces the observed
      // proportions and is therefore the global maximum.
      FitResult m;
      try {
        m = moment_onesayers_ra(counts, design, gamma);
      } catch (const Error&) {
        return std::nullopt;
      }
      const double t_max = 1.0 - gamma;
      if (m.pi_raw >= 0.0 && m.pi_raw <= 1.0 && m.theta_raw >= 0.0 && m.theta_raw <= t_max) {
        fit.pi_hat = fit.pi_raw = m.pi_raw;
        fit.theta_hat = fit.theta_raw = m.theta_raw;
        fit.boundary = m.pi_raw == 0.0 || m.pi_raw == 1.0 || m.theta_raw == 0.0 || m.theta_raw == t_max;
        break;
      }
      if (t_max <= 0.0) return std::nullopt;
      // The map (pi, theta) -> cell probabilities has Jacobian determinant
      // (1 - theta - gamma)(p - q), nonzero inside the region, so the moment
      // solution is the only interior stationary point. With it outside, the
      // maximum sits on an edge, and along each edge the probabilities are
      // affine in the free coordinate, which makes the edge problem concave.
      auto ll = [&](double pi, double theta) {
        return loglik_unchecked(spec.kind, pi, theta, gamma, counts, design);
      };
      double best = kNegInf;
      double best_pi = 0.0;
      double best_theta = 0.0;
      auto consider = [&](double value, double pi, double theta) {
        if (value > best) {
          best = value;
          best_pi = pi;
          best_theta = theta;
        }
      };
      for (double pi : {0.0, 1.0}) {
        const auto e = detail::golden_maximize([&](double theta) { return ll(pi, theta); }, 0.0, t_max);
        consider(e.fx, pi, e.x);
      }
      for (double theta : {0.0, t_max}) {
        const auto e = detail::golden_maximize([&](double pi) { return ll(pi, theta); }, 0.0, 1.0);
        consider(e.fx, e.x, theta);
      }
      if (!(best > kNegInf)) return std::nullopt;
      fit.pi_hat = fit.pi_raw = best_pi;
      fit.theta_hat = fit.theta_raw = best_theta;
      fit.boundary = true;
      break;
    }
  }
  fit.spec = spec;
  fit.method = FitMethod::Mle;
  fit.gamma_fixed = gamma;
  finish(fit, counts, design);
  return fit;
}

}  // namespace

ResponseCounts::ResponseCounts(std::array<double, 4> cells) : cells_(cells) {
  for (double c : cells_) {
    if (!std::isfinite(c) || c < 0.0) throw data_error("response counts must be finite and nonnegative");
  }
}

ResponseCounts ResponseCounts::tally(std::span<const Respondent> respondents) {
  std::array<double, 4> cells{};
  for (const auto& r : respondents) {
    if (r.subsample != 1 && r.subsample != 2)
      throw data_error("respondent " + r.id + ": sub-sample must be 1 or 2");
    cells[ResponseProbs::index(r.answer, r.subsample)] += 1.0;
  }
  return ResponseCounts(cells);
}

ResponseCounts ResponseCounts::tally_weighted(std::span<const Respondent> respondents,
                                              std::span<const double> weights) {
  if (respondents.size() != weights.size()) throw data_error("one weight per respondent is required");
  std::array<double, 4> cells{};
  for (std::size_t i = 0; i < respondents.size(); ++i) {
    const auto& r = respondents[i];
    const double w = weights[i];
    if (!(w >= 0.0 && w <= 1.0)) throw domain_error("weights must lie in [0,1]");
    if (r.subsample != 1 && r.subsample != 2)
      throw data_error("respondent " + r.id + ": sub-sample must be 1 or 2");
    cells[ResponseProbs::index(r.answer, r.subsample)] += w;
  }
  return ResponseCounts(cells);
}

double ResponseCounts::conditional(Answer y, int s) const {
  const double ns = subsample_total(s);
  if (ns <= 0.0) throw data_error("sub-sample " + std::to_string(s) + " is empty");
  return at(y, s) / ns;
}

double ResponseCounts::unconditional(Answer y, int s) const {
  const double n = total();
  if (n <= 0.0) throw data_error("no responses");
  return at(y, s) / n;
}

std::string_view to_string(FitMethod m) {
  switch (m) {
    case FitMethod::Moment: return "moment";
    case FitMethod::Mle: return "mle";
    case FitMethod::WeightedMle: return "weighted_mle";
  }
  return "?";
}

FitResult moment_ecwm_ra(const ResponseCounts& counts, const DesignParams& design, double gamma) {
  if (!(gamma >= 0.0 && gamma < 1.0)) throw domain_error("ECWM+RA moment estimator needs 0 <= gamma < 1");
  const double p = design.p();
  const double q = design.q();
  const double p11 = counts.unconditional(Answer::Different, 1);
  const double p22 = counts.unconditional(Answer::Same, 2);
  const double raw = (p11 + p22 - (1.0 - gamma) * q - 0.5 * gamma) / ((p - q) * (1.0 - gamma));
  const Estimate e = clip_unit(raw);

  FitResult fit;
  fit.spec = ModelSpec::ecwm_ra(gamma);
  fit.method = FitMethod::Moment;
  fit.pi_hat = e.value;
  fit.pi_raw = e.raw;
  fit.pi_clipped = e.clipped;
  fit.gamma_fixed = gamma;
  if (counts.subsample_total(1) > 0.0 && counts.subsample_total(2) > 0.0) {
    finish(fit, counts, design);
  } else {
    fit.fitted.probs = probs_unchecked(ModelKind::ECWM_RA, e.value, 0.0, gamma, design);
    fit.loglik = log_likelihood(fit.spec, {e.value, 0.0, gamma}, counts, design);
  }
  return fit;
}

Estimate moment_theta(const ResponseCounts& counts) {
  if (counts.subsample_total(1) <= 0.0 || counts.subsample_total(2) <= 0.0)
    throw data_error("one-sayer estimate needs both sub-samples");
  return clip_unit(counts.conditional(Answer::Different, 1) + counts.conditional(Answer::Different, 2) - 1.0);
}

FitResult moment_onesayers_ra(const ResponseCounts& counts, const DesignParams& design, double gamma) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw domain_error("gamma must lie in [0,1]");
  const Estimate theta = moment_theta(counts);
  const double p = design.p();
  const double q = design.q();
  const double same1 = counts.conditional(Answer::Same, 1);
  const double same2 = counts.conditional(Answer::Same, 2);
  const double denom = (p - q) * (same1 + same2 - gamma);
  if (std::abs(denom) < 1e-14) throw numerical_error("one-sayers+RA estimator: degenerate denominator");
  const double raw = (p * same2 - q * same1 - gamma * (p - 0.5)) / denom;
  const Estimate pi = clip_unit(raw);
  const Estimate th = clip_unit(theta.raw, 1.0 - gamma);

  FitResult fit;
  fit.spec = ModelSpec::one_sayers_ra(gamma);
  fit.method = FitMethod::Moment;
  fit.pi_hat = pi.value;
  fit.pi_raw = pi.raw;
  fit.pi_clipped = pi.clipped;
  fit.theta_hat = th.value;
  fit.theta_raw = th.raw;
  fit.theta_clipped = th.clipped;
  fit.gamma_fixed = gamma;
  finish(fit, counts, design);
  return fit;
}

double log_likelihood(const ModelSpec& spec, const ModelParams& params, const ResponseCounts& counts,
                      const DesignParams& design) {
  const double theta = has_theta(spec.kind) ? params.theta : 0.0;
  const double gamma = has_gamma(spec.kind) ? params.gamma : 0.0;
  const auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(params.pi) || !in_unit(theta) || !in_unit(gamma) || theta + gamma > 1.0 + 1e-15)
    return kNegInf;
  return loglik_unchecked(spec.kind, params.pi, theta, gamma, counts, design);
}

FitResult fit_mle(const ModelSpec& spec, const ResponseCounts& counts, const DesignParams& design,
                  Solver solver) {
  spec.validate();
  require_fit_data(spec, counts);
  if (solver == Solver::Exact) {
    if (auto fit = fit_closed_form(spec, counts, design)) return *fit;
  }
  return fit_numeric(spec, counts, design);
}

FitResult fit_weighted_mle(const ModelSpec& spec, std::span<const Respondent> respondents,
                           std::span<const double> weights, const DesignParams& design, Solver solver) {
  // sum_i w_i ln pi*_i only depends on the per-cell weight sums.
  FitResult fit = fit_mle(spec, ResponseCounts::tally_weighted(respondents, weights), design, solver);
  fit.method = FitMethod::WeightedMle;
  return fit;
}

GoodnessOfFit gof_g2(const ModelSpec& spec, const ResponseCounts& counts, const FitResult& fit) {
  GoodnessOfFit out;
  const bool cwm = spec.kind == ModelKind::CWM;
  out.df = (cwm ? 1 : 2) - spec.free_parameters();
  double g2 = 0.0;
  for (int s = 1; s <= (cwm ? 1 : 2); ++s) {
    const double ns = counts.subsample_total(s);
    for (Answer y : {Answer::Different, Answer::Same}) {
      const double n = counts.at(y, s);
      if (n <= 0.0) continue;
      const double fitted = fit.fitted.at(y, s);
      if (fitted <= 0.0) {
        g2 = std::numeric_limits<double>::infinity();
        break;
      }
      g2 += 2.0 * n * std::log(n / (ns * fitted));
    }
  }
  g2 = std::max(0.0, g2);
  if (out.df == 0 && g2 < 1e-8) g2 = 0.0;
  out.g2 = g2;
  out.p_value = chi_square_sf(g2, out.df);
  return out;
}

double chi_square_sf(double x, int df) {
  if (df < 0) throw domain_error("negative degrees of freedom");
  if (std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (df == 0 || std::isinf(x)) return 0.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * x);
}

BiasExpectation expected_bias(double pi, double theta, double gamma) {
  validate_params({pi, theta, gamma});
  const double bias = (theta + gamma) * (0.5 - pi);
  return {pi + bias, bias};
}

}  // namespace ecwm
