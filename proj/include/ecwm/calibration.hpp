#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ecwm/estimation.hpp"
#include "ecwm/model.hpp"
#include "ecwm/respondent.hpp"

namespace ecwm {

struct ControlOutcome {
  // Aligned with the input records; nullopt where a record has no control data.
  std::vector<std::optional<bool>> correct;
  std::size_t n_c = 0;
  std::size_t n_errors = 0;
  double e_c = 0.0;
};

// Scores every control answer against the answer implied by the known truth
// of statement A and the quasi-randomized statement B. Throws DesignError if a
// record's B probability is not 0 or 1.
ControlOutcome control_error_rate(std::span<const Respondent> records);

enum class GammaMethod { Naive2ec, DeltaPi };
std::string_view to_string(GammaMethod m);

struct GammaEstimate {
  double gamma_hat = 0.0;
  GammaMethod method = GammaMethod::Naive2ec;
  double e_c = 0.0;
  std::size_t n_c = 0;

  // Populated by the delta-pi procedure.
  double pi_in = 0.0;
  double pi_out = 0.0;
  double delta_pi = 0.0;
  double pi_ra_target = 0.0;  // pi_out - delta_pi
  double theta_hat = 0.0;

  double phi_implied = 0.0;  // e_c - gamma_hat / 2

  bool truncated = false;       // 2 e_c exceeded 1
  bool negative_delta = false;  // pi_in < pi_out: no detectable random answering
  bool boundary = false;        // target not reachable inside [0, 1 - theta]
  bool degenerate = false;      // fitted pi = .5, every gamma is a root
  bool exceeds_naive = false;   // gamma_hat > 2 e_c
};

// gamma = min(2 e_c, 1). Valid when every respondent knows the control answer.
GammaEstimate gamma_naive(const ControlOutcome& outcome);

struct GammaSolve {
  double gamma = 0.0;
  double pi_at_gamma = 0.0;
  int iterations = 0;
  bool boundary = false;
  bool degenerate = false;
};

// Finds the fixed gamma for which the random-answering variant of `base`
// (ECWM or ONE_SAYERS; RA kinds are accepted and mapped to their base) fitted
// to `counts` yields pi_target. Monotone bisection over [0, 1 - theta_hat].
GammaSolve solve_gamma_for_target(const ResponseCounts& counts, const DesignParams& design,
                                  ModelKind base, double pi_target, Solver solver = Solver::Exact);

// Delta-pi calibration on aggregated data: `all` holds every respondent,
// `control_correct` only those who answered the control item correctly.
GammaEstimate gamma_delta_pi(const ResponseCounts& all, const ResponseCounts& control_correct,
                             const DesignParams& design, ModelKind base, Solver solver = Solver::Exact);

// Delta-pi calibration on respondent records. Every record must carry control data.
GammaEstimate gamma_delta_pi(std::span<const Respondent> records, const DesignParams& design,
                             ModelKind base, Solver solver = Solver::Exact);

}  // namespace ecwm
