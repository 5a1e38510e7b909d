#include "shiftlearn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string.hpp>

#include "shiftlearn/awe.hpp"
#include "shiftlearn/format.hpp"

namespace shiftlearn {

namespace {
constexpr double kDrawTolerance = 1e-12;
}

std::vector<double> MetricsLog::accuracies(const std::string& method, std::uint64_t seed) const {
  std::vector<double> out;
  for (const auto& r : records)
    if (r.method == method && r.seed == seed) out.push_back(r.round.accuracy);
  return out;
}

namespace {

std::vector<BaselineSpec> baselines_with_base(const ExperimentConfig& config) {
  auto specs = config.baselines;
  const bool has_base = std::any_of(specs.begin(), specs.end(),
                                    [](const BaselineSpec& b) { return b.kind == BaselineKind::BaseOl; });
  if (!has_base) specs.insert(specs.begin(), BaselineSpec{BaselineKind::BaseOl});
  return specs;
}

}  // namespace

MetricsLog run_on_stream(const ExperimentConfig& config, const std::vector<RoundBatch>& stream, std::uint64_t seed,
                         MetricsLog log) {
  AweConfig awe_cfg = config.awe;
  awe_cfg.learner_seed = seed;
  awe_cfg.horizon = Horizon(static_cast<std::int64_t>(stream.size()));
  awe_cfg.cvtt.horizon = awe_cfg.horizon.rounds();

  std::vector<std::unique_ptr<OnlineMethod>> methods;
  methods.push_back(std::make_unique<Awe>(awe_cfg));
  for (const auto& b : baselines_with_base(config)) methods.push_back(make_baseline(b, awe_cfg));

  if (log.methods.empty())
    for (const auto& m : methods) log.methods.push_back(m->name());
  log.rounds = static_cast<std::int64_t>(stream.size());
  log.seeds.push_back(seed);
  for (auto& method : methods)
    for (const auto& batch : stream) log.records.push_back({method->name(), seed, method->step(batch)});
  return log;
}

MetricsLog run_experiment(const ExperimentConfig& config) {
  config.validate();
  MetricsLog log;
  std::optional<std::vector<RoundBatch>> ingested;
  for (const auto seed : config.seeds) {
    if (config.stream_file) {
      LoadOptions opts{config.stream.num_classes, config.awe.split_fraction, seed};
      log = run_on_stream(config, load_stream(*config.stream_file, opts), seed, std::move(log));
    } else {
      StreamSpec spec = config.stream;
      spec.seed = seed;
      log = run_on_stream(config, generate(spec), seed, std::move(log));
    }
  }
  // Records were appended seed-major; store them method-major.
  std::map<std::string, std::size_t> rank;
  for (std::size_t i = 0; i < log.methods.size(); ++i) rank[log.methods[i]] = i;
  std::map<std::uint64_t, std::size_t> seed_rank;
  for (std::size_t i = 0; i < log.seeds.size(); ++i) seed_rank.emplace(log.seeds[i], i);
  std::stable_sort(log.records.begin(), log.records.end(), [&](const MetricRecord& a, const MetricRecord& b) {
    if (rank[a.method] != rank[b.method]) return rank[a.method] < rank[b.method];
    return seed_rank[a.seed] < seed_rank[b.seed];
  });
  return log;
}

WinDrawLose count_win_draw_lose(std::span<const double> diffs) {
  WinDrawLose w;
  for (double d : diffs) {
    if (d > kDrawTolerance) ++w.wins;
    else if (d < -kDrawTolerance) ++w.losses;
    else ++w.draws;
  }
  return w;
}

MeanStderr mean_stderr(std::span<const double> values) {
  MeanStderr out;
  if (values.empty()) return out;
  const double n = static_cast<double>(values.size());
  out.mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  out.single = values.size() == 1;
  if (!out.single) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::vector<MethodSummary> summarize(const MetricsLog& log) {
  std::vector<MethodSummary> out;
  if (log.records.empty()) return out;
  const bool has_base = std::find(log.methods.begin(), log.methods.end(), "base_ol") != log.methods.end();
  if (!has_base) throw IncompleteLog("log has no base_ol series to compare against");
  const bool has_oracle = std::find(log.methods.begin(), log.methods.end(), "oracle_restart") != log.methods.end();

  std::map<std::pair<std::string, std::uint64_t>, std::vector<double>> series;
  for (const auto& r : log.records) {
    auto& s = series[{r.method, r.seed}];
    if (r.round.t != static_cast<std::int64_t>(s.size()) + 1)
      throw IncompleteLog("series " + r.method + "/seed " + std::to_string(r.seed) + " is missing round " +
                          std::to_string(s.size() + 1));
    s.push_back(r.round.accuracy);
  }
  for (const auto& m : log.methods)
    for (auto seed : log.seeds) {
      auto it = series.find({m, seed});
      if (it == series.end() || static_cast<std::int64_t>(it->second.size()) != log.rounds)
        throw IncompleteLog("series " + m + "/seed " + std::to_string(seed) + " does not cover all " +
                            std::to_string(log.rounds) + " rounds");
    }

  for (const auto& m : log.methods) {
    MethodSummary s;
    s.method = m;
    s.seeds = log.seeds.size();
    std::vector<double> seed_diffs;
    std::vector<double> seed_regrets;
    double acc_total = 0.0;
    for (auto seed : log.seeds) {
      const auto& acc = series.at({m, seed});
      const auto& base = series.at({"base_ol", seed});
      std::vector<double> diffs(acc.size());
      for (std::size_t i = 0; i < acc.size(); ++i) diffs[i] = 100.0 * (acc[i] - base[i]);
      const auto w = count_win_draw_lose(diffs);
      s.wdl.wins += w.wins;
      s.wdl.draws += w.draws;
      s.wdl.losses += w.losses;
      seed_diffs.push_back(mean_stderr(diffs).mean);
      acc_total += std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
      if (has_oracle) {
        const auto& oracle = series.at({"oracle_restart", seed});
        double regret = 0.0;
        for (std::size_t i = 0; i < acc.size(); ++i) regret += oracle[i] - acc[i];
        seed_regrets.push_back(regret);
      }
    }
    s.mean_accuracy = acc_total / static_cast<double>(log.seeds.size());
    const auto ms = mean_stderr(seed_diffs);
    s.mean_diff_pp = ms.mean;
    s.stderr_diff_pp = ms.stderr_;
    s.single_seed = ms.single;
    if (has_oracle) s.mean_regret = mean_stderr(seed_regrets).mean;
    out.push_back(s);
  }
  return out;
}

void write_per_round_csv(std::ostream& out, const MetricsLog& log) {
  out << "method,seed,t,accuracy,window_rounds,active_size,model_id\n";
  for (const auto& r : log.records)
    out << r.method << ',' << r.seed << ',' << r.round.t << ',' << format_sig(r.round.accuracy) << ','
        << r.round.window_rounds << ',' << r.round.active_size << ',' << r.round.model_id << '\n';
}

void write_summary_csv(std::ostream& out, const std::vector<MethodSummary>& summary) {
  out << "method,seeds,mean_accuracy,mean_diff_pp,stderr_diff_pp,single_seed,wins,draws,losses,mean_regret\n";
  for (const auto& s : summary) {
    out << s.method << ',' << s.seeds << ',' << format_sig(s.mean_accuracy) << ',' << format_sig(s.mean_diff_pp) << ','
        << format_sig(s.stderr_diff_pp) << ',' << (s.single_seed ? 1 : 0) << ',' << s.wdl.wins << ',' << s.wdl.draws
        << ',' << s.wdl.losses << ',' << (s.mean_regret ? format_sig(*s.mean_regret) : "") << '\n';
  }
}

void write_diff_svg(std::ostream& out, const MetricsLog& log) {
  constexpr double kWidth = 640, kHeight = 360, kPad = 40;
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf",
                                  "#7f7f7f"};
  std::map<std::string, std::vector<double>> mean_diff;
  const auto rounds = static_cast<std::size_t>(log.rounds);
  for (const auto& m : log.methods) {
    if (m == "base_ol") continue;
    std::vector<double> d(rounds, 0.0);
    for (auto seed : log.seeds) {
      const auto acc = log.accuracies(m, seed);
      const auto base = log.accuracies("base_ol", seed);
      for (std::size_t i = 0; i < std::min({rounds, acc.size(), base.size()}); ++i)
        d[i] += 100.0 * (acc[i] - base[i]) / static_cast<double>(log.seeds.size());
    }
    mean_diff[m] = std::move(d);
  }
  double lo = -1.0, hi = 1.0;
  for (const auto& [m, d] : mean_diff)
    for (double v : d) lo = std::min(lo, v), hi = std::max(hi, v);
  const auto px = [&](std::size_t i) {
    return kPad + (rounds > 1 ? static_cast<double>(i) / static_cast<double>(rounds - 1) : 0.0) * (kWidth - 2 * kPad);
  };
  const auto py = [&](double v) { return kHeight - kPad - (v - lo) / (hi - lo) * (kHeight - 2 * kPad); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << kHeight - kPad << "\" x2=\"" << kWidth - kPad << "\" y2=\""
      << kHeight - kPad << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << kPad << "\" x2=\"" << kPad << "\" y2=\"" << kHeight - kPad
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << kPad << "\" y1=\"" << format_sig(py(0.0)) << "\" x2=\"" << kWidth - kPad << "\" y2=\""
      << format_sig(py(0.0)) << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 4\"/>\n";
  out << "<text x=\"4\" y=\"" << kPad << "\" font-size=\"10\">" << format_sig(hi, 3) << "</text>\n";
  out << "<text x=\"4\" y=\"" << kHeight - kPad << "\" font-size=\"10\">" << format_sig(lo, 3) << "</text>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 8 << "\" font-size=\"11\">round</text>\n";
  std::size_t c = 0;
  for (const auto& m : log.methods) {
    auto it = mean_diff.find(m);
    if (it == mean_diff.end()) continue;
    const char* color = kColors[c % std::size(kColors)];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (std::size_t i = 0; i < it->second.size(); ++i)
      out << (i ? " " : "") << format_sig(px(i)) << ',' << format_sig(py(it->second[i]));
    out << "\"/>\n";
    out << "<text x=\"" << kWidth - kPad + 4 - 120 << "\" y=\"" << kPad + 12 * static_cast<double>(c) << "\" fill=\""
        << color << "\" font-size=\"10\">" << m << "</text>\n";
    ++c;
  }
  out << "</svg>\n";
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void emit(const MetricsLog& log, const std::filesystem::path& dir, bool svg) {
  std::filesystem::create_directories(dir);
  std::ostringstream per_round, summary;
  write_per_round_csv(per_round, log);
  write_summary_csv(summary, summarize(log));
  write_file(dir / "per_round.csv", per_round.str());
  write_file(dir / "summary.csv", summary.str());
  if (svg) {
    std::ostringstream chart;
    write_diff_svg(chart, log);
    write_file(dir / "diff.svg", chart.str());
  }
}

MetricsLog read_per_round_csv(std::istream& in) {
  MetricsLog log;
  std::string line;
  if (!std::getline(in, line) || line != "method,seed,t,accuracy,window_rounds,active_size,model_id")
    throw std::runtime_error("per_round.csv: unexpected header");
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    boost::split(f, line, boost::is_any_of(","));
    if (f.size() != 7) throw std::runtime_error("per_round.csv line " + std::to_string(lineno) + ": expected 7 fields");
    MetricRecord r;
    r.method = f[0];
    r.seed = std::stoull(f[1]);
    r.round.t = std::stoll(f[2]);
    r.round.accuracy = std::stod(f[3]);
    r.round.window_rounds = std::stoll(f[4]);
    r.round.active_size = std::stoull(f[5]);
    r.round.model_id = f[6];
    if (std::find(log.methods.begin(), log.methods.end(), r.method) == log.methods.end()) log.methods.push_back(r.method);
    if (std::find(log.seeds.begin(), log.seeds.end(), r.seed) == log.seeds.end()) log.seeds.push_back(r.seed);
    log.rounds = std::max(log.rounds, r.round.t);
    log.records.push_back(std::move(r));
  }
  return log;
}

void print_summary(std::ostream& out, const std::vector<MethodSummary>& summary) {
  out << std::left << std::setw(22) << "method" << std::right << std::setw(10) << "mean_acc" << std::setw(12)
      << "diff_pp" << std::setw(10) << "stderr" << std::setw(16) << "win/draw/lose" << std::setw(12) << "regret"
      << '\n';
  for (const auto& s : summary) {
    std::ostringstream wdl;
    wdl << s.wdl.wins << '/' << s.wdl.draws << '/' << s.wdl.losses;
    out << std::left << std::setw(22) << s.method << std::right << std::setw(10) << format_sig(s.mean_accuracy, 4)
        << std::setw(12) << format_sig(s.mean_diff_pp, 4) << std::setw(10) << format_sig(s.stderr_diff_pp, 3)
        << std::setw(16) << wdl.str() << std::setw(12) << (s.mean_regret ? format_sig(*s.mean_regret, 4) : "-")
        << '\n';
  }
}

}  // namespace shiftlearn
