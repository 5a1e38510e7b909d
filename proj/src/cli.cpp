#include "shiftlearn/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <ostream>

#include <CLI11.hpp>

#include "shiftlearn/baselines.hpp"
#include "shiftlearn/config.hpp"
#include "shiftlearn/format.hpp"
#include "shiftlearn/harness.hpp"
#include "shiftlearn/intervals.hpp"

namespace shiftlearn {

namespace {

std::filesystem::path output_dir(const std::string& flag, const ExperimentConfig& cfg, const std::string& fallback) {
  if (!flag.empty()) return flag;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputDirEnv); env && *env) return env;
  return fallback;
}

void run_and_report(const ExperimentConfig& cfg, const std::filesystem::path& dir, std::ostream& out) {
  const auto log = run_experiment(cfg);
  emit(log, dir, cfg.emit_svg);
  print_summary(out, summarize(log));
  out << "wrote " << (dir / "per_round.csv").string() << " and " << (dir / "summary.csv").string() << '\n';
}

std::string describe(const Interval& u) {
  return "[" + std::to_string(u.start) + "," + std::to_string(u.nominal_end) + "]";
}

int verify_mri(std::int64_t max_t, std::ostream& out) {
  if (max_t < 2) throw CLI::ValidationError("--max-t", "must be >= 2");
  bool all_passed = true;
  double worst = 1.0;
  for (std::int64_t T = 2; T <= max_t; T *= 2) {
    const auto report = verify_coverage(Horizon(T));
    const auto bound = static_cast<std::size_t>(3 * report.horizon.resolutions());
    const bool card_ok = report.max_active <= bound;
    all_passed = all_passed && report.passed && card_ok;
    worst = std::min(worst, report.worst_case.fraction);
    out << "T=" << T << " pairs=" << report.pairs_checked << " worst=(t0=" << report.worst_case.t0
        << ",t=" << report.worst_case.t << ") fraction=" << format_sig(report.worst_case.fraction)
        << " half_clause=" << report.pairs_half << '/' << report.pairs_checked << " max_active=" << report.max_active
        << " bound=" << bound << ' ' << (report.passed && card_ok ? "PASS" : "FAIL") << '\n';
  }
  out << "verify-mri: " << (all_passed ? "PASS" : "FAIL") << " worst-case fraction " << format_sig(worst)
      << " (threshold 0.25)\n";
  return all_passed ? 0 : 1;
}

int gc_counterexample(std::ostream& out) {
  const Horizon horizon(10);
  const auto gc = gc_schedule(horizon);
  const auto mri = mri_schedule(horizon);
  out << "horizon T=10, shift after round 1 (t0=2), entering round 9 (t=8)\n";
  out << "GC ACTIVE(9):";
  for (const auto& u : gc.active(9)) out << ' ' << describe(u);
  out << "\nMRI ACTIVE(9):";
  for (const auto& u : mri.active(9)) out << ' ' << describe(u) << '/' << to_string(u.id);
  const double gc_frac = coverage_fraction(gc, 2, 8);
  const double mri_frac = coverage_fraction(mri, 2, 8);
  out << "\nGC best post-shift fraction: " << std::lround(gc_frac * 7) << "/7 (" << format_sig(gc_frac) << ")\n";
  out << "MRI best post-shift fraction: " << std::lround(mri_frac * 7) << "/7 (" << format_sig(mri_frac) << ")\n";
  const auto report = verify_coverage(gc);
  out << "GC pairs below 1/4:";
  for (const auto& f : report.failures) out << " (t0=" << f.t0 << ",t=" << f.t << ")";
  out << "\nGC coverage guarantee: " << (report.passed ? "holds" : "fails") << "; MRI coverage guarantee: "
      << (verify_coverage(mri).passed ? "holds" : "fails") << '\n';
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Accuracy-weighted ensembling over multi-resolution learner instances", "shiftlearn"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment and write per_round.csv, summary.csv, diff.svg");
  std::string config_path, stream_path, out_dir;
  std::optional<std::uint64_t> seed;
  bool no_svg = false;
  run->add_option("--config", config_path, "Experiment config file")->required();
  run->add_option("--seed", seed, "Run a single seed instead of the configured list");
  run->add_option("--stream", stream_path, "JSONL stream to ingest instead of generating one");
  run->add_option("--out", out_dir, std::string("Output directory (default: config, then $") + kOutputDirEnv + ")");
  run->add_flag("--no-svg", no_svg, "Skip diff.svg");

  auto* verify = app.add_subcommand("verify-mri", "Exhaustively check the MRI data-coverage guarantee");
  std::int64_t max_t = 256;
  verify->add_option("--max-t", max_t, "Largest power-of-two horizon to check")->capture_default_str();

  app.add_subcommand("gc-counterexample", "Compare GC and MRI post-shift coverage at T=10");

  auto* ablate = app.add_subcommand("ablate", "Run an ablation sweep against AWE");
  std::string mode;
  std::string ablate_config;
  ablate->add_option("--mode", mode, "resolution, voting or saol")
      ->required()
      ->check(CLI::IsMember({"resolution", "voting", "saol"}));
  ablate->add_option("--config", ablate_config, "Experiment config (default: reference stream)");
  ablate->add_option("--seed", seed, "Run a single seed");
  ablate->add_option("--out", out_dir, "Output directory");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return 2;
  }

  try {
    if (*run) {
      if (!std::filesystem::exists(config_path)) {
        err << "error: config file not found: " << config_path << '\n';
        return 2;
      }
      auto cfg = load_config(config_path);
      if (seed) cfg.seeds = {*seed};
      if (!stream_path.empty()) cfg.stream_file = stream_path;
      if (no_svg) cfg.emit_svg = false;
      run_and_report(cfg, output_dir(out_dir, cfg, "shiftlearn_out"), out);
      return 0;
    }
    if (*verify) return verify_mri(max_t, out);
    if (app.got_subcommand("gc-counterexample")) return gc_counterexample(out);
    if (*ablate) {
      ExperimentConfig cfg;
      if (ablate_config.empty()) {
        cfg = reference_experiment();
      } else {
        if (!std::filesystem::exists(ablate_config)) {
          err << "error: config file not found: " << ablate_config << '\n';
          return 2;
        }
        cfg = load_config(ablate_config);
      }
      if (seed) cfg.seeds = {*seed};
      cfg.baselines = {{BaselineKind::BaseOl}};
      if (!cfg.stream_file) cfg.baselines.push_back({BaselineKind::OracleRestart});
      if (mode == "resolution") {
        for (int i = 1; i <= cfg.awe.horizon.resolutions(); ++i)
          cfg.baselines.push_back({BaselineKind::SingleResolution, i});
      } else if (mode == "voting") {
        cfg.baselines.push_back({BaselineKind::MajorityVote});
      } else {
        cfg.baselines.push_back({BaselineKind::Saol});
      }
      run_and_report(cfg, output_dir(out_dir, cfg, "shiftlearn_out") / ("ablate_" + mode), out);
      return 0;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace shiftlearn
