#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "ecwm/model.hpp"
#include "ecwm/respondent.hpp"

namespace ecwm {

// Observed (or expected, or weighted) cell totals n_{ys}, laid out like
// ResponseProbs. Real-valued so that exact expected counts and per-cell weight
// sums share the type with integer tallies.
class ResponseCounts {
 public:
  ResponseCounts() = default;
  // Cells in the order n_{1|1}, n_{2|1}, n_{1|2}, n_{2|2}.
  explicit ResponseCounts(std::array<double, 4> cells);

  static ResponseCounts tally(std::span<const Respondent> respondents);
  // Per-cell sums of respondent weights.
  static ResponseCounts tally_weighted(std::span<const Respondent> respondents,
                                       std::span<const double> weights);

  double at(Answer y, int s) const { return cells_[ResponseProbs::index(y, s)]; }
  double subsample_total(int s) const { return at(Answer::Different, s) + at(Answer::Same, s); }
  double total() const { return subsample_total(1) + subsample_total(2); }
  // n_{ys} / n_s. Throws DataError if sub-sample s is empty.
  double conditional(Answer y, int s) const;
  // n_{ys} / n.
  double unconditional(Answer y, int s) const;
  const std::array<double, 4>& cells() const { return cells_; }

 private:
  std::array<double, 4> cells_{};
};

enum class FitMethod { Moment, Mle, WeightedMle };
std::string_view to_string(FitMethod m);

// How fit_mle maximizes the likelihood. Numeric is the grid + golden-section
// optimizer; Exact uses the closed-form maximizer where one exists (ECWM
// family always, one-sayers family when the moment solution is admissible)
// and falls back to Numeric otherwise.
enum class Solver { Numeric, Exact };

struct Estimate {
  double value = 0.0;  // clipped to [0,1]
  double raw = 0.0;
  bool clipped = false;
};

struct GoodnessOfFit {
  double g2 = 0.0;
  int df = 0;
  double p_value = 1.0;
};

struct FitResult {
  ModelSpec spec;
  FitMethod method = FitMethod::Mle;
  double pi_hat = 0.0;
  double pi_raw = 0.0;
  bool pi_clipped = false;
  std::optional<double> theta_hat;
  double theta_raw = 0.0;
  bool theta_clipped = false;
  double gamma_fixed = 0.0;
  double loglik = 0.0;
  GoodnessOfFit gof;
  // Optimum touches a bound of the admissible region.
  bool boundary = false;
  ResponseProbs fitted;
};

// Plug-in estimator of pi under ECWM+RA with known gamma (gamma = 0 gives the
// plain ECWM estimator). Uses the unconditional proportions n_{ys}/n.
FitResult moment_ecwm_ra(const ResponseCounts& counts, const DesignParams& design, double gamma);

// One-sayer prevalence from the conditional DIFFERENT proportions; unaffected by gamma.
Estimate moment_theta(const ResponseCounts& counts);

// Plug-in estimator of pi under one-sayers+RA with known gamma, with theta from
// moment_theta.
FitResult moment_onesayers_ra(const ResponseCounts& counts, const DesignParams& design, double gamma);

// n' ln pi*(params). Returns -inf for inadmissible parameters or when an
// observed cell has zero model probability.
double log_likelihood(const ModelSpec& spec, const ModelParams& params,
                      const ResponseCounts& counts, const DesignParams& design);

FitResult fit_mle(const ModelSpec& spec, const ResponseCounts& counts, const DesignParams& design,
                  Solver solver = Solver::Numeric);

// Maximizes sum_i w_i ln pi*_i. `weights` is aligned with `respondents`.
FitResult fit_weighted_mle(const ModelSpec& spec, std::span<const Respondent> respondents,
                           std::span<const double> weights, const DesignParams& design,
                           Solver solver = Solver::Numeric);

// Likelihood-ratio statistic against the per-sub-sample saturated multinomial.
GoodnessOfFit gof_g2(const ModelSpec& spec, const ResponseCounts& counts, const FitResult& fit);

// Upper tail of the chi-square distribution; df = 0 is the point mass at 0.
double chi_square_sf(double x, int df);

struct BiasExpectation {
  double expected_pi_hat = 0.0;
  double bias = 0.0;
};

// Expectation of the uncorrected ECWM estimator under one-saying and random answering.
BiasExpectation expected_bias(double pi, double theta, double gamma);

}  // namespace ecwm
