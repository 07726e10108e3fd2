#include <sstream>
#include <string>

#include "doctest.h"
#include "ecwm/analysis.hpp"
#include "ecwm/errors.hpp"
#include "ecwm/survey_io.hpp"

using namespace ecwm;

namespace {

std::vector<Respondent> survey(double gamma, bool fast_random, std::size_t n, std::uint64_t seed) {
  PopulationSpec spec;
  spec.n = n;
  spec.pi = 0.25;
  spec.theta = 0.1;
  spec.gamma = gamma;
  spec.design = DesignParams(0.2);
  spec.link_random_to_speed = fast_random;
  return to_respondents(simulate(spec, seed));
}

RunConfig defaults() {
  RunConfig cfg;
  cfg.p = 0.2;
  return cfg;
}

}  // namespace

TEST_SUITE("analysis") {
  TEST_CASE("null correction: every rung near the truth") {
    const auto people = survey(0.0, false, 100000, 61);
    const auto report = run_fit(people, defaults());
    REQUIRE(report.ladder.rows.size() == 4);
    CHECK(report.ladder.rows[0].label == "ECWM");
    CHECK(report.ladder.rows[3].label == "+ weights");
    CHECK(report.ladder.calibration.gamma_hat < 0.02);
    // The uncorrected ECWM row carries the one-saying bias theta * (.5 - pi).
    CHECK(std::abs(report.ladder.rows[0].fit.pi_hat - 0.275) < 0.01);
    for (std::size_t i = 1; i < 4; ++i) CHECK(std::abs(report.ladder.rows[i].fit.pi_hat - 0.25) < 0.015);
  }

  TEST_CASE("fast random responders: corrections move towards the truth") {
    const auto people = survey(0.15, true, 100000, 62);
    const auto report = run_fit(people, defaults());
    const auto& rows = report.ladder.rows;
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].fit.pi_hat > 0.28);
    CHECK(std::abs(rows[2].fit.pi_hat - 0.25) < std::abs(rows[0].fit.pi_hat - 0.25));
    CHECK(std::abs(rows[3].fit.pi_hat - 0.25) < std::abs(rows[0].fit.pi_hat - 0.25));
    for (std::size_t i = 1; i < rows.size(); ++i) CHECK(*rows[i].pct_of_ecwm < *rows[i - 1].pct_of_ecwm);
    CHECK(*rows[0].pct_of_ecwm == doctest::Approx(100.0));
  }

  TEST_CASE("fixed zero gamma is the identity correction") {
    const auto people = survey(0.1, true, 5000, 63);
    RunConfig cfg = defaults();
    parse_gamma_method("fixed:0", cfg);
    parse_weights("off", cfg);
    const auto report = run_fit(people, cfg);
    REQUIRE(report.ladder.rows.size() == 3);
    CHECK(report.ladder.rows[2].fit.pi_hat == report.ladder.rows[1].fit.pi_hat);
    CHECK(*report.ladder.rows[2].fit.theta_hat == *report.ladder.rows[1].fit.theta_hat);
  }

  TEST_CASE("sensitivity default cell equals the weighted ladder row") {
    const auto people = survey(0.1, true, 5000, 64);
    const auto fit = run_fit(people, defaults());
    const auto grid = run_sensitivity(people, defaults());
    REQUIRE(grid.grid.cells.size() == 9);
    CHECK(grid.grid.at(1, 1).fit->pi_hat == fit.ladder.rows[3].fit.pi_hat);
  }

  TEST_CASE("bootstrap intervals bracket the point estimates and are reproducible") {
    const auto people = survey(0.1, true, 2000, 65);
    RunConfig cfg = defaults();
    BootstrapConfig b;
    b.n_resamples = 200;
    b.seed = 9;
    cfg.bootstrap = b;
    const auto a = run_fit(people, cfg);
    const auto again = run_fit(people, cfg);
    CHECK(to_json(a).dump() == to_json(again).dump());
    REQUIRE(a.gamma_ci);
    for (const auto& row : a.ladder.rows) {
      REQUIRE(row.pi_ci);
      CHECK(row.pi_ci->lower <= row.pi_ci->upper);
    }
    const auto j = to_json(a);
    CHECK(j.contains("calibration"));
    CHECK(j.contains("ladder"));
    CHECK(j.contains("attrition"));
    CHECK(j["provenance"]["tool_version"] == kToolVersion);
    CHECK(render_text(a).find("+ weights") != std::string::npos);
  }

  TEST_CASE("configuration requirements") {
    std::vector<Respondent> bare{{"a", Answer::Same, 1, std::nullopt, std::nullopt},
                                 {"b", Answer::Different, 2, std::nullopt, std::nullopt}};
    try {
      run_fit(bare, defaults());
      FAIL("expected a configuration error");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::Config);
    }
    RunConfig cfg = defaults();
    CHECK_THROWS_AS(parse_gamma_method("sometimes", cfg), Error);
    CHECK_THROWS_AS(parse_weights("0.1", cfg), Error);
    CHECK_THROWS_AS(parse_weights("0,0.9", cfg), Error);
    std::istringstream in("p = 0.5\n");
    CHECK_THROWS_AS(RunConfig::from(KeyValueConfig::parse(in)), Error);
    std::istringstream unknown("p = 0.2\ncolour = red\n");
    CHECK_THROWS_AS(RunConfig::from(KeyValueConfig::parse(unknown)), Error);
  }

  TEST_CASE("bias surface rows") {
    const auto rows = bias_surface();
    auto find = [&](double pi, double theta, double gamma) {
      for (const auto& r : rows)
        if (std::abs(r.pi - pi) < 1e-9 && std::abs(r.theta - theta) < 1e-9 && std::abs(r.gamma - gamma) < 1e-9)
          return r.expected_pi_hat;
      return -1.0;
    };
    CHECK(find(0.25, 0.0, 0.75) == doctest::Approx(0.4375));
    CHECK(find(0.25, 0.1, 0.75) == doctest::Approx(0.4625));
    for (const auto& r : rows) {
      CHECK(r.theta + r.gamma <= 1.0 + 1e-9);
      if (std::abs(r.pi - 0.5) < 1e-12) CHECK(r.expected_pi_hat == doctest::Approx(0.5));
    }
    std::ostringstream out;
    write_bias_surface_csv(out, rows);
    CHECK(out.str().rfind("pi,theta,gamma,expected_pi_hat,bias\n", 0) == 0);
  }
}
