#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "bellaudit/core.hpp"
#include "bellaudit/quantum.hpp"
#include "bellaudit/rng.hpp"

using namespace bellaudit;

namespace {

constexpr std::array<Outcome, 3> kOutcomes = {Outcome::Plus, Outcome::Minus,
                                              Outcome::NoDetect};

double table_sum(const OutcomeTable& t) {
  double sum = 0.0;
  for (Outcome o1 : kOutcomes) {
    for (Outcome o2 : kOutcomes) sum += t.prob(o1, o2);
  }
  return sum;
}

}  // namespace

TEST_CASE("detector parameters live in the unit box") {
  CHECK_NOTHROW(DetectorParams(0.0, 1.0, 0.5, 0.3));
  CHECK_THROWS_AS(DetectorParams(1.2, 1.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(DetectorParams(1.0, 1.0, 1.0, -0.1), std::invalid_argument);
}

TEST_CASE("ideal outcome table at zero difference is perfectly correlated") {
  const OutcomeTable t = outcome_table({1.0, 1.0, 1.0, 1.0}, Angle(0.0));
  CHECK(t.prob(Outcome::Plus, Outcome::Plus) == Catch::Approx(0.5));
  CHECK(t.prob(Outcome::Minus, Outcome::Minus) == Catch::Approx(0.5));
  CHECK(t.prob(Outcome::Plus, Outcome::Minus) == 0.0);
  CHECK(t.prob(Outcome::Minus, Outcome::Plus) == 0.0);
  for (Outcome o : kOutcomes) {
    CHECK(t.prob(o, Outcome::NoDetect) == 0.0);
    CHECK(t.prob(Outcome::NoDetect, o) == 0.0);
  }
}

TEST_CASE("a blind side-1 detector removes all side-1 detections") {
  const OutcomeTable t = outcome_table({0.0, 0.7, 0.8, 0.9}, Angle(0.3));
  for (Outcome o2 : kOutcomes) {
    CHECK(t.prob(Outcome::Plus, o2) == 0.0);
    CHECK(t.prob(Outcome::Minus, o2) == 0.0);
  }
  CHECK(table_sum(t) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("coincidence entry matches hand arithmetic") {
  const OutcomeTable t = outcome_table({0.8, 0.8, 0.9, 0.95}, Angle(kPi / 8));
  const double expected =
      0.25 * 0.8 * 0.8 * 0.9 * (1.0 + 0.95 * std::cos(kPi / 4));
  CHECK(t.prob(Outcome::Plus, Outcome::Plus) == Catch::Approx(expected));
  CHECK(t.prob(Outcome::Plus, Outcome::Plus) ==
        Catch::Approx(0.240732207666).epsilon(1e-9));
}

TEST_CASE("outcome tables are distributions with fixed coincidence mass") {
  SplitMix64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    const DetectorParams dp(rng.next_double(), rng.next_double(),
                            rng.next_double(), rng.next_double());
    const double mass = dp.eta1 * dp.eta2 * dp.f;
    for (int i = 0; i <= 16; ++i) {
      const OutcomeTable t = outcome_table(dp, Angle(kPi * i / 16.0));
      for (Outcome o1 : kOutcomes) {
        for (Outcome o2 : kOutcomes) CHECK(t.prob(o1, o2) >= 0.0);
      }
      CHECK(table_sum(t) == Catch::Approx(1.0).margin(1e-12));
      CHECK(t.coincidence_mass() == Catch::Approx(mass).margin(1e-12));
    }
  }
}

TEST_CASE("closed form on hand-picked points") {
  const DetectorParams ideal{};
  CHECK(extended_ch_closed_form(ideal, 0.0) == 0.0);
  CHECK(extended_ch_closed_form(ideal, kPi / 4) ==
        Catch::Approx((2.0 * std::sqrt(2.0) - 2.0) / 4.0));
  CHECK(extended_ch_closed_form(ideal, kPi / 4) ==
        Catch::Approx(0.207106781187).epsilon(1e-9));
  CHECK(extended_ch_closed_form(ideal, kPi / 2) == Catch::Approx(-0.5));
}

TEST_CASE("assembled prediction matches the closed form across phi") {
  SplitMix64 rng(19);
  std::vector<DetectorParams> params = {{1.0, 1.0, 1.0, 1.0}};
  for (int i = 0; i < 3; ++i) {
    params.emplace_back(rng.next_double(), rng.next_double(),
                        rng.next_double(), rng.next_double());
  }
  for (const auto& dp : params) {
    for (int i = 0; i <= 250; ++i) {
      const double phi = kPi * i / 250.0;
      const double assembled =
          extended_ch_qm(dp, AngleConfig::from_phi(phi));
      CHECK(assembled ==
            Catch::Approx(extended_ch_closed_form(dp, phi)).margin(1e-12));
    }
  }
}

TEST_CASE("zero correlation flattens the prediction to zero") {
  const DetectorParams dp(0.8, 0.9, 0.7, 0.0);
  for (const OutcomeSelector sel :
       {OutcomeSelector{+1, +1}, OutcomeSelector{+1, -1},
        OutcomeSelector{-1, -1}}) {
    for (double phi : {0.0, 0.3, kPi / 4, 1.9}) {
      CHECK(extended_ch_qm(dp, AngleConfig::from_phi(phi), sel) ==
            Catch::Approx(0.0).margin(1e-12));
    }
  }
}

TEST_CASE("prediction divided by its prefactor is parameter-free") {
  const std::vector<DetectorParams> params = {
      {1.0, 1.0, 1.0, 1.0}, {0.8, 0.7, 0.9, 0.95}, {0.1, 0.1, 0.5, 0.5}};
  for (int i = 0; i <= 200; ++i) {
    const double phi = kPi * i / 200.0;
    const double reference =
        extended_ch_closed_form(params[0], phi) /
        (params[0].eta1 * params[0].eta2 * params[0].f * params[0].F);
    for (const auto& dp : params) {
      const double normalized = extended_ch_closed_form(dp, phi) /
                                (dp.eta1 * dp.eta2 * dp.f * dp.F);
      CHECK(normalized == Catch::Approx(reference).margin(1e-12));
    }
  }
}

TEST_CASE("violation margin on hand-picked points and symmetry") {
  CHECK(violation_margin(0.0) == 0.0);
  CHECK(violation_margin(kPi / 4) ==
        Catch::Approx(2.0 * std::sqrt(2.0) - 2.0));
  CHECK(violation_margin(kPi / 2) == Catch::Approx(-2.0));
  for (int i = 0; i <= 32; ++i) {
    const double phi = kPi * i / 32.0;
    CHECK(violation_margin(phi) == Catch::Approx(violation_margin(-phi)));
  }
}

TEST_CASE("violation interval endpoints located to tolerance") {
  const ViolationInterval interval = find_violation_interval(1e-10);
  // upper endpoint: cos phi solves 2 c^3 - 3 c + 1 = 0, the root below 1
  // being (sqrt(3) - 1) / 2
  const double expected_hi = std::acos((std::sqrt(3.0) - 1.0) / 2.0);
  CHECK(interval.phi_lo == Catch::Approx(0.0).margin(1e-9));
  CHECK(interval.phi_hi == Catch::Approx(expected_hi).margin(1e-9));
  CHECK(interval.phi_hi == Catch::Approx(1.1960614).margin(1e-6));

  CHECK(violation_margin(interval.phi_hi + 0.01) < 0.0);
  CHECK(violation_margin(0.5 * (interval.phi_lo + interval.phi_hi)) > 0.0);
}

TEST_CASE("maximum violation sits at pi/4") {
  const MaxViolation peak = find_max_violation(1e-10);
  CHECK(peak.phi_star == Catch::Approx(kPi / 4).margin(1e-9));
  CHECK(peak.g_star ==
        Catch::Approx(2.0 * std::sqrt(2.0) - 2.0).margin(1e-9));

  // dense-grid oracle
  double best = 0.0;
  for (int i = 0; i <= 100000; ++i) {
    best = std::max(best, violation_margin(kPi * i / 100000.0));
  }
  CHECK(peak.g_star >= best - 1e-9);

  // refinement study: a finer starting grid moves nothing beyond tolerance
  const MaxViolation coarse = find_max_violation(1e-8);
  CHECK(coarse.phi_star == Catch::Approx(peak.phi_star).margin(1e-7));
}

TEST_CASE("scan tabulates margins and predictions") {
  const DetectorParams ideal{};
  const ViolationScan scan =
      scan_violation(ideal, {0.0, kPi / 4, kPi / 2});
  REQUIRE(scan.points.size() == 3);
  CHECK(scan.points[0].margin_g == Catch::Approx(0.0).margin(1e-15));
  CHECK(scan.points[1].margin_g == Catch::Approx(0.8284271247));
  CHECK(scan.points[2].margin_g == Catch::Approx(-2.0));
  for (const auto& point : scan.points) {
    CHECK(point.sprime ==
          Catch::Approx(point.margin_g / 4.0).margin(1e-12));
  }
  REQUIRE(scan.peak.has_value());
  CHECK(scan.peak->phi_star == Catch::Approx(kPi / 4));

  CHECK_THROWS_AS(scan_violation(ideal, {}), std::invalid_argument);
  CHECK_THROWS_AS(scan_violation(ideal, {0.5, 0.25}), std::invalid_argument);
  CHECK_THROWS_AS(scan_violation(ideal, {0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("scan predictions are constant when correlation vanishes") {
  const DetectorParams dp(0.9, 0.8, 0.7, 0.0);
  std::vector<double> grid;
  for (int i = 0; i < 20; ++i) grid.push_back(i * 0.1);
  const ViolationScan scan = scan_violation(dp, grid);
  for (const auto& point : scan.points) {
    CHECK(point.sprime == Catch::Approx(scan.points[0].sprime).margin(1e-12));
  }
}
