#include "ecwm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecwm/errors.hpp"

namespace ecwm {

namespace {

constexpr int kMaxBisections = 80;
constexpr double kPiTolerance = 1e-9;
constexpr double kGammaWidth = 1e-12;

ModelKind base_of(ModelKind k) {
  switch (k) {
    case ModelKind::ECWM:
    case ModelKind::ECWM_RA: return ModelKind::ECWM;
    case ModelKind::OneSayers:
    case ModelKind::OneSayersRA: return ModelKind::OneSayers;
    case ModelKind::CWM: break;
  }
  throw domain_error("calibration base model must be ECWM or ONE_SAYERS");
}

ModelSpec base_spec(ModelKind base) {
  return base == ModelKind::ECWM ? ModelSpec::ecwm() : ModelSpec::one_sayers();
}

}  // namespace

std::string_view to_string(GammaMethod m) {
  return m == GammaMethod::Naive2ec ? "naive_2ec" : "delta_pi";
}

ControlOutcome control_error_rate(std::span<const Respondent> records) {
  ControlOutcome out;
  out.correct.reserve(records.size());
  for (const auto& r : records) {
    if (!r.control) {
      out.correct.emplace_back(std::nullopt);
      continue;
    }
    const ControlItem& c = *r.control;
    if (c.b_prob != 0.0 && c.b_prob != 1.0)
      throw design_error("respondent " + r.id + ": control statement B probability must be 0 or 1");
    const bool ok = c.answer == correct_control_answer(c.a_true, c.b_prob == 1.0);
    out.correct.emplace_back(ok);
    ++out.n_c;
    if (!ok) ++out.n_errors;
  }
  out.e_c = out.n_c > 0 ? static_cast<double>(out.n_errors) / static_cast<double>(out.n_c) : 0.0;
  return out;
}

GammaEstimate gamma_naive(const ControlOutcome& outcome) {
  GammaEstimate g;
  g.method = GammaMethod::Naive2ec;
  g.e_c = outcome.e_c;
  g.n_c = outcome.n_c;
  const double raw = 2.0 * outcome.e_c;
  g.gamma_hat = std::min(raw, 1.0);
  g.truncated = raw > 1.0;
  g.phi_implied = g.e_c - 0.5 * g.gamma_hat;
  return g;
}

GammaSolve solve_gamma_for_target(const ResponseCounts& counts, const DesignParams& design, ModelKind base,
                                  double pi_target, Solver solver) {
  base = base_of(base);
  const FitResult at_zero = fit_mle(ModelSpec::with_random_answering(base, 0.0), counts, design, solver);
  GammaSolve out;
  out.pi_at_gamma = at_zero.pi_hat;

  const double pi0 = at_zero.pi_hat;
  if (std::abs(pi0 - 0.5) <= 1e-12) {
    out.degenerate = true;
    out.boundary = std::abs(pi_target - 0.5) > 1e-12;
    return out;
  }
  if (pi0 == pi_target) return out;

  double target = pi_target;
  if (!(target >= 0.0 && target <= 1.0)) {
    out.boundary = true;
    target = std::clamp(target, 0.0, 1.0);
  }
  // The correction pushes the estimate away from .5 as gamma grows.
  const bool decreasing = pi0 < 0.5;
  if ((decreasing && target > pi0) || (!decreasing && target < pi0)) {
    out.boundary = true;
    return out;
  }

  // At gamma = 1 - theta_hat no attentive respondents remain and pi is unidentified.
  const double hi_gamma = std::max(0.0, 1.0 - at_zero.theta_hat.value_or(0.0) - 1e-9);
  auto pi_at = [&](double gamma) {
    return fit_mle(ModelSpec::with_random_answering(base, gamma), counts, design, solver).pi_hat;
  };
  // Short of target: the fitted pi has not yet moved past it.
  auto short_of = [&](double pi) { return decreasing ? pi > target : pi < target; };

  double lo = 0.0;
  double hi = hi_gamma;
  const double pi_hi = pi_at(hi);
  if (short_of(pi_hi)) {
    out.boundary = true;
    out.gamma = hi;
    out.pi_at_gamma = pi_hi;
    return out;
  }
  double mid = lo;
  double pi_mid = pi0;
  for (int it = 0; it < kMaxBisections; ++it) {
    mid = 0.5 * (lo + hi);
    pi_mid = pi_at(mid);
    out.iterations = it + 1;
    if (std::abs(pi_mid - target) <= kPiTolerance && !out.boundary) break;
    if (short_of(pi_mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
    if (hi - lo < kGammaWidth) {
      // Clamped targets: report the smallest gamma reaching the bound.
      mid = hi;
      pi_mid = pi_at(hi);
      break;
    }
  }
  out.gamma = mid;
  out.pi_at_gamma = pi_mid;
  return out;
}

GammaEstimate gamma_delta_pi(const ResponseCounts& all, const ResponseCounts& control_correct,
                             const DesignParams& design, ModelKind base, Solver solver) {
  base = base_of(base);
  const FitResult in = fit_mle(base_spec(base), all, design, solver);
  const FitResult out = fit_mle(base_spec(base), control_correct, design, solver);

  GammaEstimate g;
  g.method = GammaMethod::DeltaPi;
  g.pi_in = in.pi_hat;
  g.pi_out = out.pi_hat;
  g.delta_pi = in.pi_hat - out.pi_hat;
  g.pi_ra_target = g.pi_out - g.delta_pi;
  g.theta_hat = in.theta_hat.value_or(0.0);

  if (g.delta_pi < 0.0) {
    g.negative_delta = true;
    g.gamma_hat = 0.0;
  } else {
    const GammaSolve s = solve_gamma_for_target(all, design, base, g.pi_ra_target, solver);
    g.gamma_hat = s.gamma;
    g.boundary = s.boundary;
    g.degenerate = s.degenerate;
  }

  const double n_all = all.total();
  const double n_ok = control_correct.total();
  g.n_c = static_cast<std::size_t>(std::llround(n_all));
  g.e_c = n_all > 0.0 ? (n_all - n_ok) / n_all : 0.0;
  g.phi_implied = g.e_c - 0.5 * g.gamma_hat;
  g.exceeds_naive = g.gamma_hat > 2.0 * g.e_c;
  return g;
}

GammaEstimate gamma_delta_pi(std::span<const Respondent> records, const DesignParams& design, ModelKind base,
                             Solver solver) {
  const ControlOutcome control = control_error_rate(records);
  if (control.n_c != records.size()) throw data_error("delta-pi calibration needs control data for every respondent");

  std::array<double, 4> all{};
  std::array<double, 4> kept{};
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (r.subsample != 1 && r.subsample != 2)
      throw data_error("respondent " + r.id + ": sub-sample must be 1 or 2");
    const std::size_t cell = ResponseProbs::index(r.answer, r.subsample);
    all[cell] += 1.0;
    if (*control.correct[i]) kept[cell] += 1.0;
  }
  return gamma_delta_pi(ResponseCounts(all), ResponseCounts(kept), design, base, solver);
}

}  // namespace ecwm
