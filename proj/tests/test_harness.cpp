#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "shiftlearn/config.hpp"
#include "shiftlearn/harness.hpp"

using namespace shiftlearn;

namespace {

ExperimentConfig small_experiment() {
  auto cfg = reference_experiment();
  cfg.stream.rounds = 16;
  cfg.stream.train_per_round = 30;
  cfg.stream.holdout_per_round = 15;
  auto& pw = std::get<PiecewiseDrift>(cfg.stream.drift);
  pw.boundaries = {9};
  pw.means.resize(2);
  cfg.awe.horizon = Horizon(16);
  cfg.awe.cvtt.horizon = 16;
  cfg.seeds = {4, 2};
  cfg.baselines = {parse_baseline("base_ol"), parse_baseline("oracle_restart"), parse_baseline("majority_vote")};
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("shiftlearn_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

std::string config_error(const std::string& text) {
  try {
    parse(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "<no error>";
}

const char* kMinimal =
    "[stream]\nrounds = 8\ntrain_per_round = 10\nholdout_per_round = 5\nclasses = 2\ndrift = piecewise\n"
    "means_0 = 1, 1, -1, -1\n";

}  // namespace

TEST_CASE("win draw lose") {
  const std::vector<double> d{1.0, 0.0, -2.0};
  const auto w = count_win_draw_lose(d);
  CHECK(w.wins == 1);
  CHECK(w.draws == 1);
  CHECK(w.losses == 1);
}

TEST_CASE("mean and standard error") {
  const auto one = mean_stderr(std::vector<double>{3.0});
  CHECK(one.mean == 3.0);
  CHECK(one.stderr_ == 0.0);
  CHECK(one.single);
  const auto three = mean_stderr(std::vector<double>{1, 2, 3});
  CHECK(three.mean == 2.0);
  CHECK(three.stderr_ == doctest::Approx(0.57735).epsilon(1e-5));
  CHECK_FALSE(three.single);
}

TEST_CASE("single seed summary") {
  MetricsLog log;
  log.methods = {"base_ol", "x"};
  log.seeds = {1};
  log.rounds = 2;
  for (auto [m, a1, a2] : {std::tuple{"base_ol", 0.5, 0.5}, std::tuple{"x", 0.52, 0.54}}) {
    log.records.push_back({m, 1, {1, a1}});
    log.records.push_back({m, 1, {2, a2}});
  }
  const auto s = summarize(log);
  REQUIRE(s.size() == 2);
  CHECK(s[1].mean_diff_pp == doctest::Approx(3.0));
  CHECK(s[1].stderr_diff_pp == 0.0);
  CHECK(s[1].single_seed);
  CHECK(s[1].wdl.wins == 2);
  CHECK_FALSE(s[1].mean_regret);
}

TEST_CASE("experiment runs every method on every seed") {
  const auto cfg = small_experiment();
  const auto log = run_experiment(cfg);
  CHECK(log.methods == std::vector<std::string>{"awe", "base_ol", "oracle_restart", "majority_vote"});
  CHECK(log.seeds == std::vector<std::uint64_t>{4, 2});
  CHECK(log.records.size() == 4 * 2 * 16);
  for (const auto& r : log.records) {
    CHECK(r.round.accuracy >= 0.0);
    CHECK(r.round.accuracy <= 1.0);
  }
  const auto summary = summarize(log);
  REQUIRE(summary.size() == 4);
  const auto& base = summary[1];
  CHECK(base.method == "base_ol");
  CHECK(base.mean_diff_pp == 0.0);
  CHECK(base.wdl.draws == 2 * 16);
  for (const auto& s : summary) CHECK(s.wdl.wins + s.wdl.draws + s.wdl.losses == 2 * 16);
  REQUIRE(summary[2].mean_regret);
  CHECK(*summary[2].mean_regret == 0.0);
}

TEST_CASE("base_ol is added when missing") {
  auto cfg = small_experiment();
  cfg.baselines = {parse_baseline("majority_vote")};
  cfg.seeds = {1};
  const auto log = run_experiment(cfg);
  CHECK(log.methods == std::vector<std::string>{"awe", "base_ol", "majority_vote"});
}

TEST_CASE("stationary stream keeps AWE close to base_ol") {
  auto cfg = small_experiment();
  auto& pw = std::get<PiecewiseDrift>(cfg.stream.drift);
  pw.boundaries.clear();
  pw.means.resize(1);
  cfg.baselines = {parse_baseline("base_ol")};
  cfg.seeds = {1, 2, 3};
  const auto summary = summarize(run_experiment(cfg));
  CHECK(std::abs(summary[0].mean_diff_pp) < 3.0);
}

TEST_CASE("empty log gives header-only files") {
  const auto dir = scratch("empty");
  emit(MetricsLog{}, dir);
  CHECK(slurp(dir / "per_round.csv") == "method,seed,t,accuracy,window_rounds,active_size,model_id\n");
  CHECK(slurp(dir / "summary.csv") ==
        "method,seeds,mean_accuracy,mean_diff_pp,stderr_diff_pp,single_seed,wins,draws,losses,mean_regret\n");
  std::filesystem::remove_all(dir);
}

TEST_CASE("emitted files are deterministic and complete") {
  const auto cfg = small_experiment();
  const auto a = scratch("a"), b = scratch("b");
  emit(run_experiment(cfg), a);
  emit(run_experiment(cfg), b);
  for (auto name : {"per_round.csv", "summary.csv", "diff.svg"}) CHECK(slurp(a / name) == slurp(b / name));
  const auto text = slurp(a / "per_round.csv");
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 2 * 16);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(slurp(a / "diff.svg").find("<polyline") != std::string::npos);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("summary recomputes from per_round.csv") {
  const auto log = run_experiment(small_experiment());
  std::stringstream csv;
  write_per_round_csv(csv, log);
  const auto back = read_per_round_csv(csv);
  CHECK(back.methods == log.methods);
  CHECK(back.seeds == log.seeds);
  CHECK(back.rounds == 16);
  const auto want = summarize(log);
  const auto got = summarize(back);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].mean_accuracy == doctest::Approx(want[i].mean_accuracy).epsilon(1e-5));
    CHECK(got[i].mean_diff_pp == doctest::Approx(want[i].mean_diff_pp).epsilon(1e-4).scale(1));
    CHECK(got[i].wdl.wins + got[i].wdl.draws + got[i].wdl.losses == 32);
    CHECK(*got[i].mean_regret == doctest::Approx(*want[i].mean_regret).epsilon(1e-4).scale(1));
  }
  // Independent recount straight from the rows.
  std::map<std::pair<std::string, std::uint64_t>, double> total;
  for (const auto& r : back.records) total[{r.method, r.seed}] += r.round.accuracy;
  for (const auto& s : got) {
    double mean = 0.0;
    for (auto seed : back.seeds) mean += total[{s.method, seed}] / 16.0 / 2.0;
    CHECK(s.mean_accuracy == doctest::Approx(mean));
  }
}

TEST_CASE("incomplete logs are rejected") {
  auto log = run_experiment(small_experiment());
  auto missing_round = log;
  missing_round.records.erase(missing_round.records.begin() + 5);
  CHECK_THROWS_AS(summarize(missing_round), IncompleteLog);
  auto short_series = log;
  short_series.records.pop_back();
  CHECK_THROWS_AS(summarize(short_series), IncompleteLog);
  auto no_base = log;
  std::erase(no_base.methods, "base_ol");
  std::erase_if(no_base.records, [](const MetricRecord& r) { return r.method == "base_ol"; });
  CHECK_THROWS_AS(summarize(no_base), IncompleteLog);
}

TEST_CASE("per_round.csv reader rejects bad input") {
  std::istringstream bad_header("a,b,c\n");
  CHECK_THROWS(read_per_round_csv(bad_header));
  std::istringstream short_row("method,seed,t,accuracy,window_rounds,active_size,model_id\nawe,1,1\n");
  CHECK_THROWS(read_per_round_csv(short_row));
}

TEST_CASE("minimal config uses defaults") {
  const auto cfg = parse(kMinimal);
  CHECK(cfg.stream.rounds == 8);
  CHECK(cfg.stream.dim == 2);
  CHECK(cfg.awe.learner.kind == LearnerKind::LogisticSgd);
  CHECK(cfg.awe.learner.learning_rate == 0.1);
  CHECK(cfg.awe.cvtt.slack == 1.0);
  CHECK(cfg.awe.cvtt.delta == 0.1);
  CHECK(cfg.awe.horizon.rounds() == 8);
  CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
  CHECK(cfg.emit_svg);
}

TEST_CASE("shipped configs parse") {
  const auto dir = std::filesystem::path(SHIFTLEARN_SOURCE_DIR) / "configs";
  const auto ref = load_config(dir / "reference.ini");
  const auto built_in = reference_experiment();
  CHECK(ref.stream.rounds == built_in.stream.rounds);
  CHECK(ref.awe.learner.learning_rate == built_in.awe.learner.learning_rate);
  CHECK(ref.awe.cvtt.slack == built_in.awe.cvtt.slack);
  CHECK(ref.seeds == built_in.seeds);
  auto a = ref.stream, b = built_in.stream;
  a.seed = b.seed = 3;
  CHECK(generate_round(a, 20).train == generate_round(b, 20).train);
  const auto rot = load_config(dir / "rotating.ini");
  CHECK(std::holds_alternative<RotatingDrift>(rot.stream.drift));
  CHECK(rot.awe.learner.kind == LearnerKind::NearestCentroid);
}

TEST_CASE("config errors name the problem") {
  const std::string base = kMinimal;
  CHECK(config_error(base + "bogus = 1\n") == "[stream] unknown key 'bogus'");
  CHECK(config_error(base + "[extra]\nx = 1\n") == "unknown section [extra]");
  CHECK(config_error("[stream]\nclasses = 2\n").find("missing required key") != std::string::npos);
  CHECK(config_error(base + "[learner]\nkind = resnet\n").find("[learner] kind") == 0);
  CHECK(config_error(base + "[learner]\nepochs = two\n").find("expected an integer") != std::string::npos);
  CHECK(config_error(base + "[awe]\nslack = fast\n").find("expected a number") != std::string::npos);
  CHECK(config_error(base + "[awe]\nscores = max\n").find("[awe] scores") == 0);
  CHECK(config_error(base + "[experiment]\nseeds = -3\n").find("[experiment] seeds") == 0);
  CHECK(config_error(base + "[experiment]\nbaselines = best\n").find("[experiment] baselines") == 0);
  CHECK(config_error(base + "[experiment]\nbaselines = single_resolution(9)\n").find("resolution outside") !=
        std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/cfg.ini"), ConfigError);
}
