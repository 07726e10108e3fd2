#include "ecwm/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <thread>

#include "ecwm/errors.hpp"

namespace ecwm {

void BootstrapConfig::validate() const {
  if (n_resamples < 1) throw config_error("bootstrap needs at least one resample");
  if (!(level > 0.0 && level < 1.0)) throw config_error("confidence level must lie in (0,1)");
  if (!(max_failed_fraction >= 0.0 && max_failed_fraction <= 1.0))
    throw config_error("max_failed_fraction must lie in [0,1]");
}

PercentileBounds percentile_interval(std::vector<double> estimates, double level) {
  if (estimates.empty()) throw numerical_error("no successful bootstrap resamples");
  if (!(level > 0.0 && level < 1.0)) throw config_error("confidence level must lie in (0,1)");
  std::sort(estimates.begin(), estimates.end());
  const double alpha = 1.0 - level;
  const double b = static_cast<double>(estimates.size());
  auto order_stat = [&](double fraction) {
    // Guard against fraction * B landing a hair above an integer.
    auto k = static_cast<std::size_t>(std::ceil(fraction * b - 1e-9));
    k = std::clamp<std::size_t>(k, 1, estimates.size());
    return estimates[k - 1];
  };
  return {order_stat(alpha / 2.0), order_stat(1.0 - alpha / 2.0)};
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over a combination of seed and index.
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void draw_resample(std::span<const Respondent> records, std::uint64_t seed, std::size_t index, bool stratified,
                   std::vector<Respondent>& out) {
  std::mt19937_64 rng(stream_seed(seed, index));
  out.resize(records.size());
  if (records.empty()) return;
  if (!stratified) {
    std::uniform_int_distribution<std::size_t> pick(0, records.size() - 1);
    for (auto& slot : out) slot = records[pick(rng)];
    return;
  }
  std::vector<std::size_t> by_arm[2];
  for (std::size_t i = 0; i < records.size(); ++i) by_arm[records[i].subsample == 1 ? 0 : 1].push_back(i);
  std::size_t pos = 0;
  for (const auto& arm : by_arm) {
    if (arm.empty()) continue;
    std::uniform_int_distribution<std::size_t> pick(0, arm.size() - 1);
    for (std::size_t k = 0; k < arm.size(); ++k) out[pos++] = records[arm[pick(rng)]];
  }
}

std::vector<IntervalEstimate> bootstrap_ci(std::span<const Respondent> records, const VectorPipeline& pipeline,
                                           const BootstrapConfig& config) {
  config.validate();
  const std::vector<double> point = pipeline(records);
  const std::size_t dims = point.size();
  const std::size_t b = config.n_resamples;

  // estimates[r * dims + d]; NaN marks a failed resample.
  std::vector<double> estimates(b * dims, std::nan(""));
  auto run_range = [&](std::size_t begin, std::size_t end) {
    std::vector<Respondent> sample;
    for (std::size_t r = begin; r < end; ++r) {
      draw_resample(records, config.seed, r, config.stratified, sample);
      try {
        const std::vector<double> v = pipeline(sample);
        if (v.size() != dims) continue;
        std::copy(v.begin(), v.end(), estimates.begin() + static_cast<std::ptrdiff_t>(r * dims));
      } catch (const Error&) {
        // Degenerate resample; stays NaN.
      }
    }
  };

  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, b));
  if (threads <= 1) {
    run_range(0, b);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (b + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(b, begin + chunk);
      if (begin < end) pool.emplace_back(run_range, begin, end);
    }
  }

  std::vector<IntervalEstimate> out(dims);
  for (std::size_t d = 0; d < dims; ++d) {
    std::vector<double> ok;
    ok.reserve(b);
    for (std::size_t r = 0; r < b; ++r) {
      const double v = estimates[r * dims + d];
      if (std::isfinite(v)) ok.push_back(v);
    }
    IntervalEstimate& e = out[d];
    e.point = point[d];
    e.n_failed = b - ok.size();
    if (static_cast<double>(e.n_failed) > config.max_failed_fraction * static_cast<double>(b))
      throw numerical_error("bootstrap unreliable: " + std::to_string(e.n_failed) + " of " + std::to_string(b) +
                            " resamples failed");
    const PercentileBounds bounds = percentile_interval(std::move(ok), config.level);
    e.lower = bounds.lower;
    e.upper = bounds.upper;
  }
  return out;
}

IntervalEstimate bootstrap_ci(std::span<const Respondent> records, const ScalarPipeline& pipeline,
                              const BootstrapConfig& config) {
  const VectorPipeline wrapped = [&](std::span<const Respondent> sample) {
    return std::vector<double>{pipeline(sample)};
  };
  return bootstrap_ci(records, wrapped, config).front();
}

}  // namespace ecwm
