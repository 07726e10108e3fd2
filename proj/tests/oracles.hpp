#pragma once

// Independent reference computations for the test suite. Nothing here calls
// into the library's estimation code.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>

#include <boost/rational.hpp>

namespace oracle {

using Rational = boost::rational<std::int64_t>;

// Response distribution built by enumerating latent class, sensitive status
// and innocuous outcome. Cells ordered 1|1, 2|1, 1|2, 2|2 with answer 1 =
// DIFFERENT. In sub-sample s the innocuous statement is "yes" with
// probability a_s (p, then 1 - p). An honest carrier answers DIFFERENT when
// the innocuous statement is "yes", a non-carrier when it is "no".
template <typename T>
std::array<T, 4> enumerate_probs(T pi, T theta, T gamma, T p) {
  const T one(1);
  const T half = one / T(2);
  std::array<T, 4> out{T(0), T(0), T(0), T(0)};
  for (int s = 1; s <= 2; ++s) {
    const T a = s == 1 ? p : one - p;
    T diff(0);
    // honest
    const T honest = one - theta - gamma;
    for (int carrier = 0; carrier <= 1; ++carrier) {
      const T pc = carrier ? pi : one - pi;
      for (int yes = 0; yes <= 1; ++yes) {
        const T py = yes ? a : one - a;
        const bool different = carrier ? (yes == 1) : (yes == 0);
        if (different) diff += honest * pc * py;
      }
    }
    diff += theta;          // one-sayers
    diff += gamma * half;   // random answering
    out[(s - 1) * 2] = diff;
    out[(s - 1) * 2 + 1] = one - diff;
  }
  return out;
}

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

// Uncorrected ECWM point estimate from unconditional shares with balanced
// sub-samples: ((P11 + P22) / 2 - q) / (p - q) evaluated on conditionals.
inline double naive_ecwm(const std::array<double, 4>& cond, double p) {
  const double q = 1.0 - p;
  const double agree = 0.5 * (cond[0] + cond[3]);
  return (agree - q) / (p - q);
}

// G^2 against a fitted conditional distribution.
inline double g2(const std::array<double, 4>& counts, const std::array<double, 4>& fitted) {
  double sum = 0.0;
  for (int s = 0; s < 2; ++s) {
    const double ns = counts[2 * s] + counts[2 * s + 1];
    for (int y = 0; y < 2; ++y) {
      const double n = counts[2 * s + y];
      if (n > 0) sum += n * std::log(n / (ns * fitted[2 * s + y]));
    }
  }
  return 2.0 * sum;
}

// Population-level delta-pi calibration for balanced sub-samples at p = .2.
// Values are computed offline with scipy (brentq on the closed form) and frozen.
struct DeltaPiPopulation {
  double pi, theta, gamma, phi, p;
  double pi_in, pi_out, gamma_hat;
};

inline constexpr std::array<DeltaPiPopulation, 3> kDeltaPiPopulation{{
    {0.25, 0.1, 0.15, 0.05, 0.2, 0.29166666666666663, 0.27401129943502833, 0.130434782608695},
    {0.25, 0.1, 0.15, 0.0, 0.2, 0.29166666666666663, 0.2727272727272726, 0.13846153846153922},
    {0.25, 0.1, 0.10, 0.0, 0.2, 0.27777777777777757, 0.2647058823529412, 0.09473684210526186},
}};

// G^2 of the ECWM fit to counts proportional to the one-sayers distribution at
// pi = .25, theta = .1, p = .8, n_s = 500; frozen from a bounded scalar search.
inline constexpr double kG2OneSayersData = 10.811985257137707;

inline double binomial_se(double prob, double n) { return std::sqrt(prob * (1.0 - prob) / n); }

}  // namespace oracle
