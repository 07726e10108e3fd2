#include <cmath>
#include <sstream>

#include "doctest.h"
#include "ecwm/calibration.hpp"
#include "ecwm/errors.hpp"
#include "ecwm/estimation.hpp"
#include "ecwm/simulator.hpp"
#include "ecwm/survey_io.hpp"
#include "oracles.hpp"

using namespace ecwm;

namespace {

PopulationSpec base(std::size_t n, double pi, double theta, double gamma, double p) {
  PopulationSpec spec;
  spec.n = n;
  spec.pi = pi;
  spec.theta = theta;
  spec.gamma = gamma;
  spec.design = DesignParams(p);
  return spec;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("only one-sayers answer DIFFERENT") {
    const auto people = to_respondents(simulate(base(2000, 0.3, 1.0, 0.0, 0.2), 1));
    for (const auto& r : people) CHECK(r.answer == Answer::Different);
  }

  TEST_CASE("only random responders give a coin flip") {
    const auto sim = simulate(base(100000, 0.3, 0.0, 1.0, 0.2), 2);
    const auto counts = ResponseCounts::tally(to_respondents(sim));
    for (int s = 1; s <= 2; ++s) {
      const double f = counts.conditional(Answer::Different, s);
      CHECK(std::abs(f - 0.5) < 3 * oracle::binomial_se(0.5, counts.subsample_total(s)));
    }
    const double ec = control_error_rate(to_respondents(sim)).e_c;
    CHECK(std::abs(ec - 0.5) < 3 * oracle::binomial_se(0.5, 100000));
  }

  TEST_CASE("cell frequencies match the model") {
    const auto sim = simulate(base(1000000, 0.25, 0.1, 0.2, 0.8), 3);
    const auto counts = ResponseCounts::tally(to_respondents(sim));
    const std::array<double, 4> expect{0.445, 0.555, 0.655, 0.345};
    for (int s = 1; s <= 2; ++s) {
      for (Answer y : {Answer::Different, Answer::Same}) {
        const double e = expect[ResponseProbs::index(y, s)];
        CHECK(std::abs(counts.conditional(y, s) - e) < 3 * oracle::binomial_se(e, counts.subsample_total(s)));
      }
    }
  }

  TEST_CASE("control error rate equals gamma / 2 + phi") {
    auto spec = base(200000, 0.25, 0.1, 0.2, 0.2);
    spec.phi = 0.05;
    const double ec = control_error_rate(to_respondents(simulate(spec, 4))).e_c;
    CHECK(std::abs(ec - 0.15) < 3 * oracle::binomial_se(0.15, 200000));
  }

  TEST_CASE("oracle counts") {
    auto spec = base(1000, 0.25, 0.1, 0.2, 0.8);
    spec.force_balance = true;
    const auto c = oracle_counts(spec);
    CHECK(c.cells()[0] == doctest::Approx(222.5));
    CHECK(c.cells()[1] == doctest::Approx(277.5));
    CHECK(c.cells()[2] == doctest::Approx(327.5));
    CHECK(c.cells()[3] == doctest::Approx(172.5));
  }

  TEST_CASE("invalid specs") {
    CHECK_THROWS_AS(base(100, 0.2, 0.6, 0.5, 0.2).validate(), Error);
    auto spec = base(100, 0.2, 0.1, 0.5, 0.2);
    spec.phi = 0.6;
    CHECK_THROWS_AS(spec.validate(), Error);
    spec.phi = 0.0;
    spec.subsample_split = 1.5;
    CHECK_THROWS_AS(spec.validate(), Error);
  }

  TEST_CASE("same seed, same records") {
    auto spec = base(3000, 0.25, 0.1, 0.15, 0.2);
    spec.link_random_to_speed = true;
    spec.phi = 0.03;
    std::ostringstream a, b, c;
    write_survey_csv(a, to_respondents(simulate(spec, 7)));
    write_survey_csv(b, to_respondents(simulate(spec, 7)));
    write_survey_csv(c, to_respondents(simulate(spec, 8)));
    CHECK(a.str() == b.str());
    CHECK(a.str() != c.str());
  }

  TEST_CASE("balanced assignment") {
    auto spec = base(1001, 0.25, 0.1, 0.15, 0.2);
    spec.force_balance = true;
    const auto c = ResponseCounts::tally(to_respondents(simulate(spec, 9)));
    CHECK(c.subsample_total(1) == 501);
    CHECK(c.subsample_total(2) == 500);
  }

  TEST_CASE("property: noiseless recovery") {
    int n = 0;
    for (double pi : {0.05, 0.25, 0.4, 0.7})
      for (double theta : {0.0, 0.1, 0.3})
        for (double gamma : {0.0, 0.15, 0.4})
          for (double p : {0.2, 0.8}) {
            auto spec = base(1000, pi, theta, gamma, p);
            spec.force_balance = true;
            const auto c = oracle_counts(spec);
            const auto fit = moment_onesayers_ra(c, spec.design, gamma);
            CHECK(std::abs(fit.pi_raw - pi) < 1e-12);
            CHECK(std::abs(moment_theta(c).raw - theta) < 1e-12);
            ++n;
          }
    CHECK(n == 72);
  }

  TEST_CASE("property: sampled recovery at n = 100000") {
    std::uint64_t seed = 500;
    for (double pi : {0.1, 0.3})
      for (double theta : {0.0, 0.1})
        for (double gamma : {0.0, 0.2}) {
          auto spec = base(100000, pi, theta, gamma, 0.2);
          spec.with_time = false;
          const auto c = ResponseCounts::tally(to_respondents(simulate(spec, seed++)));
          const auto fit = fit_mle(ModelSpec::one_sayers_ra(gamma), c, spec.design, Solver::Exact);
          CHECK(std::abs(fit.pi_hat - pi) < 0.015);
          CHECK(std::abs(*fit.theta_hat - theta) < 0.01);
        }
  }
}
