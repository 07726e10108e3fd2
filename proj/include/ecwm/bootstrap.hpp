#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ecwm/respondent.hpp"

namespace ecwm {

struct BootstrapConfig {
  std::size_t n_resamples = 10000;
  double level = 0.95;
  std::uint64_t seed = 1;
  unsigned threads = 1;      // 0: one per hardware thread
  bool stratified = false;   // resample within sub-samples instead of jointly
  double max_failed_fraction = 0.10;

  void validate() const;
};

struct IntervalEstimate {
  double point = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  std::size_t n_failed = 0;
};

// Maps a respondent list to estimates. Throwing ecwm::Error or returning a
// non-finite value marks the resample as failed.
using ScalarPipeline = std::function<double(std::span<const Respondent>)>;
using VectorPipeline = std::function<std::vector<double>(std::span<const Respondent>)>;

struct PercentileBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Order statistics ceil(a/2 B) and ceil((1 - a/2) B) (1-based) of the B
// estimates, a = 1 - level.
PercentileBounds percentile_interval(std::vector<double> estimates, double level);

// Independent seed for resample `index`, so resamples can run in any order.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index);

// Whole respondent rows drawn with replacement; answer, control and time stay linked.
void draw_resample(std::span<const Respondent> records, std::uint64_t seed, std::size_t index,
                   bool stratified, std::vector<Respondent>& out);

IntervalEstimate bootstrap_ci(std::span<const Respondent> records, const ScalarPipeline& pipeline,
                              const BootstrapConfig& config);

// One interval per pipeline output; the point estimates come from the full data.
std::vector<IntervalEstimate> bootstrap_ci(std::span<const Respondent> records, const VectorPipeline& pipeline,
                                           const BootstrapConfig& config);

}  // namespace ecwm
