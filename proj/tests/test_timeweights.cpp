#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ecwm/errors.hpp"
#include "ecwm/simulator.hpp"
#include "ecwm/timeweights.hpp"

using namespace ecwm;

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

TEST_SUITE("timeweights") {
  TEST_CASE("filter times") {
    const std::vector<double> t{1.4, 3.4, 16.0};
    const auto f = filter_times(t);
    CHECK(f.included == std::vector<double>{1.4, 3.4});
    CHECK(f.excluded == 1);
    CHECK(f.keep == std::vector<bool>{true, true, false});
    const std::vector<double> edge{15.0, 2.0};
    CHECK(filter_times(edge).excluded == 0);
    const std::vector<double> bad{1.0, 0.0};
    try {
      filter_times(bad);
      FAIL("expected a data error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Data);
    }
  }

  TEST_CASE("simulated timer failures show up as attrition") {
    PopulationSpec spec;
    spec.n = 1000;
    spec.time_model.timer_failure_rate = 0.05;
    const auto people = to_respondents(simulate(spec, 31));
    std::size_t excluded = 0;
    const auto kept = filter_respondents_by_time(people, kDefaultTimeCutoff, &excluded);
    CHECK(kept.size() + excluded == 1000);
    const double rate = excluded / 1000.0;
    CHECK(std::abs(rate - 0.05) < 3 * std::sqrt(0.05 * 0.95 / 1000.0));
  }

  TEST_CASE("solve beta examples") {
    const auto a = solve_beta(1.4, 3.4, 0.1, 0.9);
    CHECK(a.beta0 == doctest::Approx(-5.2733).epsilon(1e-4));
    CHECK(a.beta == doctest::Approx(2.1972).epsilon(1e-4));
    const auto flat = solve_beta(1, 3, 0.5, 0.5);
    CHECK(flat.beta0 == 0.0);
    CHECK(flat.beta == 0.0);
    try {
      solve_beta(2, 2, 0.1, 0.9);
      FAIL("expected a numerical error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Numerical);
    }
    CHECK_THROWS_AS(solve_beta(1, 3, 0.0, 0.9), Error);
    CHECK_THROWS_AS(solve_beta(1, 3, 0.1, 1.0), Error);
  }

  TEST_CASE("weight examples") {
    const auto anchors = solve_beta(1, 3, 0.1, 0.9);
    CHECK(weight(3, anchors) == doctest::Approx(0.9).epsilon(1e-9));
    CHECK(weight(1, anchors) == doctest::Approx(0.1).epsilon(1e-9));
    WeightParams rounded;
    rounded.beta0 = -4.39;
    rounded.beta = 2.19;
    CHECK(std::abs(weight(1, rounded) - 0.1) < 0.005);
    CHECK(weight(15, anchors) > 0.999);
    CHECK(weight(1e6, anchors) == 1.0);
    CHECK(weight(-1e6, anchors) == 0.0);
  }

  TEST_CASE("median and parameters from a sample") {
    CHECK(median({3.0, 1.0, 2.0}) == 2.0);
    CHECK(median({4.0, 1.0, 2.0, 3.0}) == 2.5);
    const std::vector<double> t{1.4, 2.0, 3.4, 5.0, 9.0};
    const auto w = weight_params_from_times(t);
    CHECK(w.t0 == 1.4);
    CHECK(w.t50 == 3.4);
    CHECK(w.beta == doctest::Approx(2.1972).epsilon(1e-4));
  }

  TEST_CASE("property: anchors are reproduced exactly") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.001, 0.999);
    for (int rep = 0; rep < 1000; ++rep) {
      const double t0 = 10 * u(rng), t50 = t0 + 0.01 + 10 * u(rng);
      const double w0 = u(rng), w50 = u(rng);
      const auto params = solve_beta(t0, t50, w0, w50);
      CHECK(std::abs(weight(t0, params) - w0) < 1e-9);
      CHECK(std::abs(weight(t50, params) - w50) < 1e-9);
      CHECK(weight(t0, params) == doctest::Approx(logistic(params.beta0 + params.beta * t0)).epsilon(1e-12));
    }
  }

  TEST_CASE("property: weights are monotone in time") {
    std::mt19937_64 rng(18);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 200; ++rep) {
      WeightParams params;
      params.beta0 = -5 + 10 * u(rng);
      params.beta = rep % 10 == 0 ? 0.0 : 3 * u(rng);
      double prev = weight(0.0, params);
      for (double t = 0.05; t < 20; t += 0.05) {
        const double w = weight(t, params);
        CHECK(w >= prev);
        if (params.beta > 0 && prev < 1.0 - 1e-12) CHECK(w > prev);
        prev = w;
      }
    }
  }

  TEST_CASE("property: rescaling time units leaves weights unchanged") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.2, 12.0);
    std::vector<double> minutes(200);
    for (auto& t : minutes) t = u(rng);
    const auto pm = weight_params_from_times(minutes, 0.05, 0.95);
    std::vector<double> seconds;
    for (double t : minutes) seconds.push_back(60 * t);
    const auto ps = weight_params_from_times(seconds, 0.05, 0.95);
    for (std::size_t i = 0; i < minutes.size(); ++i)
      CHECK(std::abs(weight(minutes[i], pm) - weight(seconds[i], ps)) < 1e-9);
  }

  TEST_CASE("property: filtering never alters included values") {
    std::mt19937_64 rng(20);
    std::uniform_real_distribution<double> u(0.1, 30.0);
    std::vector<double> t(500);
    for (auto& x : t) x = u(rng);
    const auto f = filter_times(t, 15.0);
    std::size_t j = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      CHECK(f.keep[i] == (t[i] <= 15.0));
      if (f.keep[i]) CHECK(f.included[j++] == t[i]);
    }
    CHECK(j == f.included.size());
  }

  TEST_CASE("sensitivity grid without random answering is flat") {
    PopulationSpec spec;
    spec.n = 100000;
    spec.theta = 0.1;
    spec.design = DesignParams(0.2);
    const auto people = to_respondents(simulate(spec, 101));
    const auto grid = sensitivity_grid(people, spec.design, ModelSpec::one_sayers());
    REQUIRE(grid.cells.size() == 9);
    double lo = 1, hi = 0;
    for (const auto& c : grid.cells) {
      REQUIRE(c.fit);
      lo = std::min(lo, c.fit->pi_hat);
      hi = std::max(hi, c.fit->pi_hat);
    }
    CHECK(hi - lo < 0.02);
    CHECK(std::abs(grid.at(1, 1).fit->pi_hat - 0.25) < 0.01);

    std::vector<double> times;
    for (const auto& r : people) times.push_back(*r.time_minutes);
    const auto w = respondent_weights(people, weight_params_from_times(times, 0.1, 0.9));
    const auto standalone = fit_weighted_mle(ModelSpec::one_sayers(), people, w, spec.design, Solver::Exact);
    CHECK(grid.at(1, 1).fit->pi_hat == standalone.pi_hat);
    CHECK(grid.at(1, 1).w0 == 0.1);
    CHECK(grid.at(1, 1).w50 == 0.9);
  }

  TEST_CASE("fast random responders: lower w0 moves the estimate towards the truth") {
    PopulationSpec spec;
    spec.n = 100000;
    spec.theta = 0.1;
    spec.gamma = 0.1;
    spec.design = DesignParams(0.2);
    auto sim = simulate(spec, 202);
    // Random responders occupy the fastest decile; everyone else takes 2 to 8 minutes.
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> fast(0.3, 1.0), slow(2.0, 8.0);
    for (auto& r : sim) r.respondent.time_minutes = r.latent == LatentClass::Random ? fast(rng) : slow(rng);
    const auto people = to_respondents(sim);
    const auto grid = sensitivity_grid(people, spec.design, ModelSpec::one_sayers());
    for (std::size_t k = 0; k < grid.w50s.size(); ++k) {
      const double err_02 = std::abs(grid.at(2, k).fit->pi_hat - spec.pi);
      const double err_01 = std::abs(grid.at(1, k).fit->pi_hat - spec.pi);
      const double err_001 = std::abs(grid.at(0, k).fit->pi_hat - spec.pi);
      CHECK(err_001 < err_01);
      CHECK(err_01 < err_02);
    }
  }
}
