#include <array>
#include <random>

#include "doctest.h"
#include "ecwm/errors.hpp"
#include "ecwm/model.hpp"
#include "oracles.hpp"

using namespace ecwm;

namespace {

std::array<double, 4> probs_of(ModelSpec spec, double pi, double theta, double gamma, double p) {
  return response_probs(spec, {pi, theta, gamma}, DesignParams(p)).probs;
}

}  // namespace

TEST_SUITE("model") {
  TEST_CASE("ECWM probabilities at pi = .25, p = .8") {
    const auto pr = probs_of(ModelSpec::ecwm(), 0.25, 0.0, 0.0, 0.8);
    CHECK(pr[0] == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(pr[1] == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(pr[2] == doctest::Approx(0.65).epsilon(1e-15));
    CHECK(pr[3] == doctest::Approx(0.35).epsilon(1e-15));
  }

  TEST_CASE("ECWM_RA with gamma = .2 at pi = .25") {
    const auto pr = probs_of(ModelSpec::ecwm_ra(0.2), 0.25, 0.0, 0.2, 0.8);
    CHECK(pr[0] == doctest::Approx(0.38));
    CHECK(pr[3] == doctest::Approx(0.38));
    CHECK(pr[1] == doctest::Approx(0.62));
    CHECK(pr[2] == doctest::Approx(0.62));
  }

  TEST_CASE("one-sayers RA example") {
    const auto pr = probs_of(ModelSpec::one_sayers_ra(0.2), 0.25, 0.1, 0.2, 0.8);
    CHECK(pr[0] == doctest::Approx(0.445));
    CHECK(pr[1] == doctest::Approx(0.555));
    CHECK(pr[2] == doctest::Approx(0.655));
    CHECK(pr[3] == doctest::Approx(0.345));
  }

  TEST_CASE("CWM uses the p arm and mirrors it for sub-sample 2") {
    const auto pr = probs_of(ModelSpec::cwm(), 0.25, 0.0, 0.0, 0.8);
    CHECK(pr[0] == doctest::Approx(0.35));
    CHECK(pr[3] == doctest::Approx(0.35));
  }

  TEST_CASE("invalid designs and parameters") {
    CHECK_THROWS_AS(DesignParams(0.5), Error);
    CHECK_THROWS_AS(DesignParams(0.0), Error);
    CHECK_THROWS_AS(DesignParams(1.0), Error);
    try {
      DesignParams bad(0.5);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Design);
    }
    CHECK_THROWS_AS(validate_params({0.25, 0.6, 0.5}), Error);
    CHECK_THROWS_AS(validate_params({-0.1, 0.0, 0.0}), Error);
    CHECK_THROWS_AS(validate_params({0.2, 0.0, 1.1}), Error);
    CHECK_NOTHROW(validate_params({0.2, 0.4, 0.6}));
    CHECK_THROWS_AS(ModelSpec({ModelKind::ECWM_RA, std::nullopt}).validate(), Error);
    CHECK_THROWS_AS(ModelSpec({ModelKind::ECWM, 0.1}).validate(), Error);
  }

  TEST_CASE("free parameter counts") {
    CHECK(ModelSpec::cwm().free_parameters() == 1);
    CHECK(ModelSpec::ecwm().free_parameters() == 1);
    CHECK(ModelSpec::ecwm_ra(0.1).free_parameters() == 1);
    CHECK(ModelSpec::one_sayers().free_parameters() == 2);
    CHECK(ModelSpec::one_sayers_ra(0.1).free_parameters() == 2);
    CHECK(ModelSpec::with_random_answering(ModelKind::OneSayers, 0.3).kind == ModelKind::OneSayersRA);
    CHECK(ModelSpec::with_random_answering(ModelKind::ECWM, 0.3).kind == ModelKind::ECWM_RA);
  }

  TEST_CASE("exact agreement with rational enumeration") {
    using oracle::Rational;
    const std::array<std::array<Rational, 4>, 5> grid{{
        {Rational(1, 4), Rational(1, 10), Rational(1, 5), Rational(4, 5)},
        {Rational(3, 10), Rational(0), Rational(0), Rational(1, 5)},
        {Rational(1, 2), Rational(1, 3), Rational(1, 6), Rational(2, 3)},
        {Rational(0), Rational(1, 4), Rational(3, 4), Rational(1, 10)},
        {Rational(1), Rational(0), Rational(1, 2), Rational(7, 10)},
    }};
    for (const auto& g : grid) {
      const auto exact = oracle::enumerate_probs<Rational>(g[0], g[1], g[2], g[3]);
      const auto got = probs_of(ModelSpec::one_sayers_ra(oracle::to_double(g[2])), oracle::to_double(g[0]),
                                oracle::to_double(g[1]), oracle::to_double(g[2]), oracle::to_double(g[3]));
      for (int k = 0; k < 4; ++k) CHECK(got[k] == doctest::Approx(oracle::to_double(exact[k])).epsilon(1e-15));
    }
  }

  TEST_CASE("property: rows sum to one, nesting holds, symmetry") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 2000; ++rep) {
      const double pi = u(rng);
      const double gamma = u(rng);
      const double theta = (1.0 - gamma) * u(rng);
      double p = u(rng);
      if (std::abs(p - 0.5) < 1e-3 || p <= 0.0) p = 0.3;
      const DesignParams design(p);
      const ModelParams params{pi, theta, gamma};

      for (const auto& spec : {ModelSpec::ecwm(), ModelSpec::ecwm_ra(gamma), ModelSpec::one_sayers(),
                               ModelSpec::one_sayers_ra(gamma), ModelSpec::cwm()}) {
        const auto pr = reduce_check(spec, params, design);
        CHECK(pr.probs[0] + pr.probs[1] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pr.probs[2] + pr.probs[3] == doctest::Approx(1.0).epsilon(1e-12));
        for (double x : pr.probs) {
          CHECK(x >= -1e-15);
          CHECK(x <= 1.0 + 1e-15);
        }
      }

      const auto ra = response_probs(ModelSpec::ecwm_ra(gamma), params, design).probs;
      CHECK(std::abs(ra[0] - ra[3]) < 1e-12);
      CHECK(std::abs(ra[1] - ra[2]) < 1e-12);

      const auto os = response_probs(ModelSpec::one_sayers_ra(gamma), params, design).probs;
      // One-saying shifts mass towards DIFFERENT in both sub-samples, so the
      // ECWM symmetry breaks by exactly theta.
      CHECK(os[0] - os[3] == doctest::Approx(theta).epsilon(1e-9));

      const auto same = oracle::enumerate_probs<double>(pi, theta, gamma, p);
      for (int k = 0; k < 4; ++k) CHECK(os[k] == doctest::Approx(same[k]).epsilon(1e-12));
    }
  }

  TEST_CASE("honest answering convention") {
    const DesignParams d(0.8);
    CHECK(honest_different_prob(true, 1, d) == doctest::Approx(0.8));
    CHECK(honest_different_prob(false, 1, d) == doctest::Approx(0.2));
    CHECK(honest_different_prob(true, 2, d) == doctest::Approx(0.2));
    CHECK(honest_different_prob(false, 2, d) == doctest::Approx(0.8));
  }
}
