#include <doctest.h>

#include <bit>
#include <cmath>

#include "shiftlearn/cvtt.hpp"
#include "shiftlearn/rng.hpp"

using namespace shiftlearn;

namespace {

// The model always answers 0, so a point counts as correct iff its label is 0.
const Predictor kZero = [](std::span<const double>) { return Label{0}; };

std::vector<LabeledExample> round_with(std::size_t correct, std::size_t wrong) {
  std::vector<LabeledExample> v;
  for (std::size_t i = 0; i < correct; ++i) v.push_back({{static_cast<double>(i)}, 0});
  for (std::size_t i = 0; i < wrong; ++i) v.push_back({{-static_cast<double>(i)}, 1});
  return v;
}

HoldoutStore store_from(const std::vector<std::pair<std::size_t, std::size_t>>& rounds,
                        std::optional<std::size_t> cap = std::nullopt) {
  HoldoutStore s(cap);
  std::int64_t t = 0;
  for (auto [c, w] : rounds) s.append(++t, round_with(c, w));
  return s;
}

CvttConfig unit_slack_config(std::int64_t T = 64) { return {0.1, T, 1.0}; }

}  // namespace

TEST_CASE("append counts points") {
  const auto s = store_from({{1, 1}, {2, 0}, {0, 2}});
  CHECK(s.latest() == 3);
  CHECK(s.count(3, 2) == 4);
  CHECK(s.count(3, 3) == 6);
}

TEST_CASE("retention evicts old rounds") {
  const auto s = store_from({{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}}, 2);
  CHECK(s.earliest() == 4);
  CHECK(s.latest() == 5);
  CHECK_NOTHROW(s.round(4));
  CHECK_THROWS_AS(s.round(3), InsufficientHistory);
  CHECK_THROWS_AS(empirical_accuracy(kZero, s, 5, 3), InsufficientHistory);
}

TEST_CASE("append must be in order and non-empty") {
  auto s = store_from({{1, 0}, {1, 0}, {1, 0}});
  CHECK_THROWS_AS(s.append(5, round_with(1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(s.append(3, round_with(1, 0)), std::invalid_argument);
  CHECK_THROWS_AS(s.append(4, round_with(0, 0)), std::invalid_argument);
  CHECK_NOTHROW(s.append(4, round_with(1, 0)));
  CHECK_THROWS_AS(HoldoutStore(0), std::invalid_argument);
}

TEST_CASE("threshold values") {
  const double s100 = threshold_S(100, unit_slack_config());
  CHECK(s100 == doctest::Approx(std::sqrt(std::log(640.0) / 100) + std::sqrt(20 * std::log(64.0) / 100)));
  CHECK(s100 == doctest::Approx(1.1662).epsilon(1e-4));
  CHECK(threshold_S(400, unit_slack_config()) == doctest::Approx(s100 / 2).epsilon(1e-14));
  CHECK(4 * threshold_S(40000, unit_slack_config()) == doctest::Approx(0.233).epsilon(3e-3));
  CHECK_THROWS_AS(threshold_S(0, unit_slack_config()), std::invalid_argument);
}

TEST_CASE("threshold with delta = 1") {
  // Outside the valid config range; threshold_S itself only needs the numbers.
  CHECK(threshold_S(9, CvttConfig{1.0, 1, 1.0}) == 0.0);
  const double n = 25;
  const double second = std::sqrt(20 * std::log(64.0) / n);
  CHECK(threshold_S(n, CvttConfig{1.0, 64, 1.0}) - second == doctest::Approx(std::sqrt(std::log(64.0) / n)));
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(unit_slack_config().validate());
  CHECK_THROWS_AS((CvttConfig{0.0, 64, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CvttConfig{1.0, 64, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CvttConfig{0.1, 0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((CvttConfig{0.1, 64, 0}.validate()), std::invalid_argument);
}

TEST_CASE("empirical accuracy") {
  const auto s = store_from({{4, 0}, {3, 1}, {1, 1}, {2, 1}});
  CHECK(empirical_accuracy(kZero, s, 1, 1).value == 1.0);
  CHECK(empirical_accuracy(kZero, s, 2, 1).value == 0.75);
  const auto two = empirical_accuracy(kZero, s, 4, 2);
  CHECK(two.points == 5);
  CHECK(two.value == 3.0 / 5.0);
  const auto all = empirical_accuracy(kZero, s, 4, 4);
  CHECK(all.points == 13);
  CHECK(all.value == 10.0 / 13.0);
  CHECK_THROWS_AS(empirical_accuracy(kZero, s, 4, 5), InsufficientHistory);
  CHECK_THROWS_AS(empirical_accuracy(kZero, s, 4, 0), std::invalid_argument);
}

TEST_CASE("refine with a single round") {
  const auto s = store_from({{3, 1}});
  std::vector<RefineStep> trace;
  const auto est = refine_accuracy(kZero, s, 1, unit_slack_config(), "m", &trace);
  CHECK(trace.empty());
  CHECK(est.window_rounds == 1);
  CHECK(est.value == 0.75);
  CHECK(est.points_used == 4);
  CHECK(est.model_id == "m");
}

TEST_CASE("constant accuracy grows to the full window") {
  std::vector<std::pair<std::size_t, std::size_t>> rounds(64, {7, 3});
  const auto s = store_from(rounds);
  std::vector<RefineStep> trace;
  const auto est = refine_accuracy(kZero, s, 64, unit_slack_config(), {}, &trace);
  CHECK(est.window_rounds == 64);
  CHECK(est.value == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(trace.size() == 6);
  for (const auto& step : trace) {
    CHECK(step.passed);
    CHECK(std::abs(step.u_r - step.u_2r) < 1e-15);
  }
  CHECK_FALSE(est.cap_truncated);
}

TEST_CASE("recent shift stops the window at 2") {
  std::vector<std::pair<std::size_t, std::size_t>> rounds(62, {0, 20000});
  rounds.push_back({20000, 0});
  rounds.push_back({20000, 0});
  const auto s = store_from(rounds);
  std::vector<RefineStep> trace;
  const auto est = refine_accuracy(kZero, s, 64, unit_slack_config(), {}, &trace);
  CHECK(est.value == 1.0);
  CHECK(est.window_rounds == 2);
  REQUIRE(trace.size() == 2);
  CHECK(trace[0].passed);
  CHECK_FALSE(trace[1].passed);
  CHECK(trace[1].u_2r == 0.5);
  CHECK(trace[1].threshold == doctest::Approx(0.233).epsilon(3e-3));
  CHECK(trace[1].threshold_by_rounds > trace[1].threshold);
}

TEST_CASE("returned value equals the accuracy at the returned window") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    CounterRng rng(seed, RngPurpose::kTest, 0);
    const std::int64_t tau = 1 + static_cast<std::int64_t>(rng.below(70));
    std::vector<std::pair<std::size_t, std::size_t>> rounds;
    for (std::int64_t t = 1; t <= tau; ++t) {
      const std::size_t m = 1 + rng.below(12);
      const std::size_t c = rng.below(m + 1);
      rounds.push_back({c, m - c});
    }
    const auto s = store_from(rounds);
    const CvttConfig cfg{0.1, 128, 0.05 + rng.uniform()};
    const auto est = refine_accuracy(kZero, s, tau, cfg);
    CHECK(std::has_single_bit(static_cast<std::uint64_t>(est.window_rounds)));
    CHECK(est.window_rounds <= tau);
    CHECK(2 * est.window_rounds > tau / 2);
    const auto direct = empirical_accuracy(kZero, s, tau, est.window_rounds);
    CHECK(est.value == direct.value);
    CHECK(est.points_used == direct.points);
    CHECK(est.value >= 0.0);
    CHECK(est.value <= 1.0);
  }
}

TEST_CASE("window never exceeds the first power of two above tau/2") {
  for (std::int64_t tau = 1; tau <= 70; ++tau) {
    std::vector<std::pair<std::size_t, std::size_t>> rounds(static_cast<std::size_t>(tau), {1, 1});
    const auto est = refine_accuracy(kZero, store_from(rounds), tau, unit_slack_config(128));
    std::int64_t cap = 1;
    while (2 * cap <= tau) cap *= 2;
    CHECK(est.window_rounds == cap);
  }
}

TEST_CASE("retention truncates the doubling") {
  std::vector<std::pair<std::size_t, std::size_t>> rounds(40, {5, 5});
  const auto s = store_from(rounds, 10);
  const auto est = refine_accuracy(kZero, s, 40, unit_slack_config());
  CHECK(est.cap_truncated);
  CHECK(est.window_rounds == 8);
  CHECK(est.value == 0.5);
  CHECK_THROWS_AS(refine_accuracy(kZero, s, 41, unit_slack_config()), InsufficientHistory);
}

TEST_CASE("refine is deterministic") {
  std::vector<std::pair<std::size_t, std::size_t>> rounds;
  for (int t = 0; t < 33; ++t) rounds.push_back({static_cast<std::size_t>(t % 5), 3});
  const auto s = store_from(rounds);
  const CvttConfig cfg{0.1, 64, 0.1};
  const auto a = refine_accuracy(kZero, s, 33, cfg);
  const auto b = refine_accuracy(kZero, s, 33, cfg);
  CHECK(a.value == b.value);
  CHECK(a.window_rounds == b.window_rounds);
}
