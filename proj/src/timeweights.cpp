#include "ecwm/timeweights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ecwm/errors.hpp"

namespace ecwm {

namespace {

void require_time(double t) {
  if (!(std::isfinite(t) && t > 0.0)) throw data_error("completion times must be positive, got " + std::to_string(t));
}

}  // namespace

TimeFilter filter_times(std::span<const double> times, double cutoff) {
  TimeFilter out;
  out.keep.reserve(times.size());
  for (double t : times) {
    require_time(t);
    const bool keep = t <= cutoff;
    out.keep.push_back(keep);
    if (keep) {
      out.included.push_back(t);
    } else {
      ++out.excluded;
    }
  }
  return out;
}

std::vector<Respondent> filter_respondents_by_time(std::span<const Respondent> records, double cutoff,
                                                   std::size_t* excluded) {
  std::vector<Respondent> out;
  out.reserve(records.size());
  std::size_t dropped = 0;
  for (const auto& r : records) {
    if (!r.time_minutes) throw data_error("respondent " + r.id + " has no completion time");
    require_time(*r.time_minutes);
    if (*r.time_minutes <= cutoff) {
      out.push_back(r);
    } else {
      ++dropped;
    }
  }
  if (excluded) *excluded = dropped;
  return out;
}

double logit(double w) {
  if (!(w > 0.0 && w < 1.0)) throw domain_error("anchor weights must lie strictly inside (0,1); logit is infinite");
  return std::log(w / (1.0 - w));
}

WeightParams solve_beta(double t0, double t50, double w0, double w50) {
  if (t0 == t50) throw numerical_error("t0 = t50 makes the anchor system singular");
  const double l0 = logit(w0);
  const double l50 = logit(w50);
  WeightParams out;
  out.beta = (l50 - l0) / (t50 - t0);
  out.beta0 = l0 - out.beta * t0;
  out.t0 = t0;
  out.t50 = t50;
  out.w0 = w0;
  out.w50 = w50;
  return out;
}

double weight(double t, const WeightParams& params) {
  const double eta = params.beta0 + params.beta * t;
  // Written to stay finite for large |eta|.
  if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
  const double e = std::exp(eta);
  return e / (1.0 + e);
}

double median(std::vector<double> values) {
  if (values.empty()) throw data_error("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

WeightParams weight_params_from_times(std::span<const double> times, double w0, double w50) {
  if (times.empty()) throw data_error("no completion times to anchor the weights");
  for (double t : times) require_time(t);
  const double t0 = *std::min_element(times.begin(), times.end());
  const double t50 = median(std::vector<double>(times.begin(), times.end()));
  return solve_beta(t0, t50, w0, w50);
}

std::vector<double> respondent_weights(std::span<const Respondent> records, const WeightParams& params) {
  std::vector<double> w;
  w.reserve(records.size());
  for (const auto& r : records) {
    if (!r.time_minutes) throw data_error("respondent " + r.id + " has no completion time");
    w.push_back(weight(*r.time_minutes, params));
  }
  return w;
}

SensitivityGrid sensitivity_grid(std::span<const Respondent> records, const DesignParams& design,
                                 const ModelSpec& spec, const std::vector<double>& w0s,
                                 const std::vector<double>& w50s, Solver solver) {
  std::vector<double> times;
  times.reserve(records.size());
  for (const auto& r : records) {
    if (!r.time_minutes) throw data_error("respondent " + r.id + " has no completion time");
    times.push_back(*r.time_minutes);
  }

  SensitivityGrid grid{w0s, w50s, {}};
  grid.cells.reserve(w0s.size() * w50s.size());
  for (double w0 : w0s) {
    for (double w50 : w50s) {
      SensitivityCell cell;
      cell.w0 = w0;
      cell.w50 = w50;
      try {
        cell.params = weight_params_from_times(times, w0, w50);
        const auto w = respondent_weights(records, cell.params);
        cell.fit = fit_weighted_mle(spec, records, w, design, solver);
      } catch (const Error& e) {
        cell.error = e.what();
      }
      grid.cells.push_back(std::move(cell));
    }
  }
  return grid;
}

}  // namespace ecwm
