#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shiftlearn/baselines.hpp"
#include "shiftlearn/config.hpp"

using namespace shiftlearn;

namespace {

StreamSpec stream_of(std::int64_t T, std::vector<std::int64_t> boundaries, std::uint64_t seed = 1) {
  auto s = reference_stream(seed);
  s.rounds = T;
  s.train_per_round = 40;
  s.holdout_per_round = 20;
  auto& pw = std::get<PiecewiseDrift>(s.drift);
  pw.boundaries = std::move(boundaries);
  pw.means.resize(pw.boundaries.size() + 1);
  return s;
}

AweConfig awe_config(const StreamSpec& s) {
  AweConfig c;
  c.horizon = Horizon(s.rounds);
  c.learner.num_classes = s.num_classes;
  c.learner.dim = s.dim;
  c.learner.learning_rate = 0.05;
  c.learner.epochs = 2;
  c.cvtt = {0.1, s.rounds, 0.1};
  return c;
}

}  // namespace

TEST_CASE("baseline names parse") {
  CHECK(parse_baseline("base_ol").kind == BaselineKind::BaseOl);
  CHECK(parse_baseline("oracle_restart").kind == BaselineKind::OracleRestart);
  CHECK(parse_baseline("saol_gc").kind == BaselineKind::Saol);
  CHECK(parse_baseline("saol").kind == BaselineKind::Saol);
  CHECK(parse_baseline("majority_vote").kind == BaselineKind::MajorityVote);
  const auto sr = parse_baseline("single_resolution(3)");
  CHECK(sr.kind == BaselineKind::SingleResolution);
  CHECK(sr.resolution == 3);
  CHECK(parse_baseline("single_resolution_5").resolution == 5);
  CHECK(sr.name() == "single_resolution_3");
  CHECK_THROWS_AS(parse_baseline("ensemble"), std::invalid_argument);
  CHECK_THROWS_AS(parse_baseline("single_resolution()"), std::invalid_argument);
}

TEST_CASE("base_ol matches the AWE root instance") {
  const auto s = stream_of(16, {9});
  const auto cfg = awe_config(s);
  BaseOl base(cfg.learner, cfg.learner_seed);
  Awe awe(cfg);
  const IntervalId root{Family::R, 1, 1};
  for (const auto& batch : generate(s)) {
    base.step(batch);
    awe.step(batch);
    const auto& inst = *awe.pool().get(root).learner;
    Fnv1a a, b;
    inst.digest(a);
    base.learner().digest(b);
    CHECK(a.value() == b.value());
    for (const auto& ex : batch.holdout) CHECK(inst.predict(ex.x) == base.learner().predict(ex.x));
  }
}

TEST_CASE("baselines reject empty or out-of-order rounds") {
  const auto s = stream_of(8, {});
  const auto cfg = awe_config(s);
  const auto batches = generate(s);
  for (auto spec : {"base_ol", "oracle_restart", "saol_gc", "majority_vote", "single_resolution(2)"}) {
    auto m = make_baseline(parse_baseline(spec), cfg);
    auto empty = batches[0];
    empty.train.clear();
    CHECK_THROWS_AS(m->step(empty), std::invalid_argument);
    CHECK_THROWS_AS(m->step(batches[2]), std::invalid_argument);
    CHECK_NOTHROW(m->step(batches[0]));
    CHECK_THROWS_AS(m->step(batches[0]), std::invalid_argument);
  }
}

TEST_CASE("oracle restart equals base_ol on one segment") {
  const auto s = stream_of(12, {});
  const auto cfg = awe_config(s);
  BaseOl base(cfg.learner, 3);
  OracleRestart oracle(cfg.learner, 3);
  for (const auto& batch : generate(s)) CHECK(base.step(batch).accuracy == oracle.step(batch).accuracy);
}

TEST_CASE("oracle restart resets at the boundary") {
  const auto s = stream_of(24, {17});
  const auto cfg = awe_config(s);
  OracleRestart oracle(cfg.learner, 3);
  const auto batches = generate(s);
  for (std::size_t i = 0; i < 16; ++i) oracle.step(batches[i]);
  CHECK(oracle.learner().batches_seen() == 16);
  auto fresh = new_instance(cfg.learner, 3);
  const auto m = oracle.step(batches[16]);
  CHECK(oracle.learner().batches_seen() == 1);
  // The round-17 accuracy was measured by a fresh learner.
  std::size_t hits = 0;
  for (const auto* fold : {&batches[16].train, &batches[16].holdout})
    for (const auto& ex : *fold) hits += fresh->predict(ex.x) == ex.y;
  CHECK(m.accuracy == static_cast<double>(hits) / static_cast<double>(batches[16].size()));

  auto unlabeled = batches[17];
  unlabeled.distribution_id.reset();
  CHECK_THROWS_AS(oracle.step(unlabeled), std::invalid_argument);
}

TEST_CASE("saol with a single expert predicts like it") {
  const auto s = stream_of(1, {});
  const auto cfg = awe_config(s);
  Saol saol(Horizon(1), cfg.learner, 0);
  REQUIRE(saol.pool().live().size() == 1);
  CHECK(saol.normalized_weights() == std::vector<double>{1.0});
  const auto batch = generate_round(s, 1);
  const auto& only = *saol.pool().live().front().learner;
  const auto labels = saol.predict(batch.holdout);
  for (std::size_t i = 0; i < labels.size(); ++i) CHECK(labels[i] == only.predict(batch.holdout[i].x));
}

TEST_CASE("saol experts at round 9 of 10") {
  const auto s = stream_of(10, {2});
  const auto cfg = awe_config(s);
  Saol saol(Horizon(10), cfg.learner, 0);
  const auto batches = generate(s);
  for (std::size_t i = 0; i < 8; ++i) saol.step(batches[i]);
  std::vector<std::pair<std::int64_t, std::int64_t>> got;
  for (const auto& rec : saol.pool().live()) got.push_back({rec.interval.start, rec.interval.nominal_end});
  std::sort(got.begin(), got.end());
  CHECK(got == std::vector<std::pair<std::int64_t, std::int64_t>>{{8, 9}, {8, 11}, {8, 15}, {9, 9}});
}

TEST_CASE("post-shift data seen by the best expert") {
  // Shift after round 1, N points per round, state entering round 9.
  const auto s = stream_of(10, {2});
  const auto cfg = awe_config(s);
  const auto N = s.train_per_round;
  Saol saol(Horizon(10), cfg.learner, 0);
  Awe awe(cfg);
  const auto batches = generate(s);
  for (std::size_t i = 0; i < 8; ++i) {
    saol.step(batches[i]);
    awe.step(batches[i]);
  }
  std::size_t saol_best = 0, awe_best = 0;
  for (const auto& rec : saol.pool().live())
    if (rec.interval.start >= 2) saol_best = std::max(saol_best, rec.points_trained);
  for (const auto& rec : awe.pool().live())
    if (rec.interval.start >= 2) awe_best = std::max(awe_best, rec.points_trained);
  CHECK(saol_best <= N);
  CHECK(4 * awe_best >= 7 * N);
}

TEST_CASE("saol weights stay positive and normalized") {
  const auto s = stream_of(40, {11, 25});
  const auto cfg = awe_config(s);
  Saol saol(Horizon(40), cfg.learner, 2);
  for (const auto& batch : generate(s)) {
    saol.step(batch);
    const auto w = saol.normalized_weights();
    CHECK(w.size() == saol.pool().live().size());
    for (double v : w) {
      CHECK(v > 0.0);
      CHECK(std::isfinite(v));
    }
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0));
    for (const auto& rec : saol.pool().live()) CHECK(saol.raw_weight(rec.id()) > 0.0);
  }
}

TEST_CASE("saol learning rates") {
  CHECK(Saol::learning_rate(Interval{{Family::GC, 0, 1}, 1, 1, 1}) == 0.5);
  CHECK(Saol::learning_rate(Interval{{Family::GC, 2, 1}, 4, 7, 7}) == 0.5);
  CHECK(Saol::learning_rate(Interval{{Family::GC, 4, 1}, 16, 20, 31}) == 0.25);
}

TEST_CASE("saol multiplicative update") {
  const auto s = stream_of(8, {});
  const auto cfg = awe_config(s);
  Saol saol(Horizon(8), cfg.learner, 0);
  const auto batches = generate(s);
  for (std::size_t i = 0; i < 4; ++i) saol.step(batches[i]);
  // [4,7] entered at round 4 and is still live after round 5.
  const IntervalId four_seven{Family::GC, 2, 1};
  const double w_before = saol.raw_weight(four_seven);
  const auto& rec = saol.pool().get(four_seven);
  std::size_t hits = 0;
  for (const auto* fold : {&batches[4].train, &batches[4].holdout})
    for (const auto& ex : *fold) hits += rec.learner->predict(ex.x) == ex.y;
  const double expert = static_cast<double>(hits) / static_cast<double>(batches[4].size());
  const double eta = Saol::learning_rate(rec.interval);
  const auto m = saol.step(batches[4]);
  CHECK(saol.raw_weight(four_seven) == doctest::Approx(w_before * (1 + eta * std::clamp(expert - m.accuracy, -1.0, 1.0))));
}

TEST_CASE("single resolution keeps at most three instances") {
  const auto s = stream_of(64, {17, 33, 49});
  const auto cfg = awe_config(s);
  for (int i = 1; i <= 6; ++i) {
    auto m = make_baseline({BaselineKind::SingleResolution, i}, cfg);
    CHECK(m->name() == "single_resolution_" + std::to_string(i));
    const auto& awe = dynamic_cast<const Awe&>(*m);
    for (const auto& batch : generate(s)) {
      const auto metrics = m->step(batch);
      CHECK(metrics.active_size <= 3);
      for (const auto& rec : awe.pool().live()) CHECK(rec.interval.resolution() == i);
    }
  }
}

TEST_CASE("single resolution 1 uses the root and its offset twin") {
  const auto s = stream_of(16, {});
  auto cfg = awe_config(s);
  cfg.single_resolution = 1;
  Awe awe(cfg);
  const auto batches = generate(s);
  for (std::size_t i = 0; i < 9; ++i) awe.step(batches[i]);
  std::vector<Family> fams;
  for (const auto& rec : awe.pool().live()) fams.push_back(rec.interval.family());
  CHECK(fams == std::vector<Family>{Family::R, Family::B});
}

TEST_CASE("plurality") {
  CHECK(plurality(std::vector<Label>{0, 0, 1}, 2) == 0);
  CHECK(plurality(std::vector<Label>{2, 2, 2}, 3) == 2);
  CHECK(plurality(std::vector<Label>{1, 2}, 3) == 1);
  CHECK(plurality(std::vector<Label>{3, 1, 3, 1, 0}, 4) == 1);
}

TEST_CASE("majority vote follows the live instances") {
  const auto s = stream_of(16, {9});
  const auto cfg = awe_config(s);
  MajorityVote mv(Horizon(16), cfg.learner, 0);
  for (const auto& batch : generate(s)) {
    for (const auto& ex : batch.holdout) {
      std::vector<Label> votes;
      for (const auto& rec : mv.pool().live()) votes.push_back(rec.learner->predict(ex.x));
      std::vector<std::size_t> counts(4, 0);
      for (auto v : votes) ++counts[v];
      const auto top = *std::max_element(counts.begin(), counts.end());
      Label want = 0;
      while (counts[want] != top) ++want;
      CHECK(mv.predict_one(ex.x) == want);
    }
    mv.step(batch);
  }
}

TEST_CASE("baselines are deterministic") {
  const auto s = stream_of(32, {9, 20});
  const auto cfg = awe_config(s);
  for (auto spec : {"base_ol", "oracle_restart", "saol_gc", "majority_vote", "single_resolution(3)"}) {
    auto a = make_baseline(parse_baseline(spec), cfg);
    auto b = make_baseline(parse_baseline(spec), cfg);
    for (const auto& batch : generate(s)) CHECK(a->step(batch).accuracy == b->step(batch).accuracy);
  }
}
