#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecwm/estimation.hpp"
#include "ecwm/model.hpp"
#include "ecwm/respondent.hpp"

namespace ecwm {

inline constexpr double kDefaultTimeCutoff = 15.0;

struct TimeFilter {
  std::vector<double> included;
  std::vector<bool> keep;  // aligned with the input
  std::size_t excluded = 0;
};

// Drops completion times strictly above `cutoff` minutes. Included values are
// passed through untouched.
TimeFilter filter_times(std::span<const double> times, double cutoff = kDefaultTimeCutoff);

// Respondents whose time is at most `cutoff`. Every record must carry a time.
std::vector<Respondent> filter_respondents_by_time(std::span<const Respondent> records,
                                                   double cutoff = kDefaultTimeCutoff,
                                                   std::size_t* excluded = nullptr);

// Logistic weight curve logit(w) = beta0 + beta t, pinned at two anchors.
struct WeightParams {
  double beta0 = 0.0;
  double beta = 0.0;
  double t0 = 0.0;
  double t50 = 0.0;
  double w0 = 0.1;
  double w50 = 0.9;
};

double logit(double w);

// Exact solve of the 2x2 system through (t0, logit w0) and (t50, logit w50).
WeightParams solve_beta(double t0, double t50, double w0, double w50);

double weight(double t, const WeightParams& params);

// Even-length samples use the midpoint of the central pair.
double median(std::vector<double> values);

// Anchors at the fastest and median of `times`.
WeightParams weight_params_from_times(std::span<const double> times, double w0 = 0.1, double w50 = 0.9);

std::vector<double> respondent_weights(std::span<const Respondent> records, const WeightParams& params);

struct SensitivityCell {
  double w0 = 0.0;
  double w50 = 0.0;
  WeightParams params;
  std::optional<FitResult> fit;
  std::string error;  // set when the cell's fit failed
};

struct SensitivityGrid {
  std::vector<double> w0s;
  std::vector<double> w50s;
  std::vector<SensitivityCell> cells;  // row-major: w0 by row, w50 by column

  const SensitivityCell& at(std::size_t i_w0, std::size_t i_w50) const {
    return cells[i_w0 * w50s.size() + i_w50];
  }
};

inline const std::vector<double> kSensitivityW0{0.01, 0.1, 0.2};
inline const std::vector<double> kSensitivityW50{0.8, 0.9, 0.99};

// Weighted fits of `spec` over every anchor pair. `records` should already be
// time-filtered; t0 and t50 are taken from them. Per-cell failures are
// recorded in the cell and do not abort the grid.
SensitivityGrid sensitivity_grid(std::span<const Respondent> records, const DesignParams& design,
                                 const ModelSpec& spec, const std::vector<double>& w0s = kSensitivityW0,
                                 const std::vector<double>& w50s = kSensitivityW50,
                                 Solver solver = Solver::Exact);

}  // namespace ecwm
