#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "shiftlearn/config.hpp"
#include "shiftlearn/method.hpp"

namespace shiftlearn {

struct MetricRecord {
  std::string method;
  std::uint64_t seed = 0;
  RoundMetrics round;
};

struct MetricsLog {
  std::vector<std::string> methods;  // run order
  std::vector<std::uint64_t> seeds;
  std::int64_t rounds = 0;
  std::vector<MetricRecord> records;  // method-major, then seed, then t

  /// Per-round accuracies for (method, seed); empty when absent.
  std::vector<double> accuracies(const std::string& method, std::uint64_t seed) const;
};

/// Runs AWE and every baseline on identical batches for each seed. base_ol is
/// added when the config does not list it.
MetricsLog run_experiment(const ExperimentConfig& config);
/// Same, on a pre-built stream (seed still drives learners and fold splits).
MetricsLog run_on_stream(const ExperimentConfig& config, const std::vector<RoundBatch>& stream, std::uint64_t seed,
                         MetricsLog log = {});

struct WinDrawLose {
  std::size_t wins = 0;
  std::size_t draws = 0;
  std::size_t losses = 0;
};

/// Counts positive, zero and negative differences.
WinDrawLose count_win_draw_lose(std::span<const double> diffs);

struct MeanStderr {
  double mean = 0.0;
  /// Sample standard deviation over sqrt(count); 0 for a single value.
  double stderr_ = 0.0;
  bool single = false;
};

MeanStderr mean_stderr(std::span<const double> values);

struct MethodSummary {
  std::string method;
  std::size_t seeds = 0;
  double mean_accuracy = 0.0;
  /// Percentage points versus base_ol.
  double mean_diff_pp = 0.0;
  double stderr_diff_pp = 0.0;
  bool single_seed = false;
  WinDrawLose wdl;
  /// Mean over seeds of sum_t (acc_oracle - acc_method); absent without oracle_restart.
  std::optional<double> mean_regret;
};

class IncompleteLog : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Throws IncompleteLog when base_ol is missing or any (method, seed)
/// series lacks a round.
std::vector<MethodSummary> summarize(const MetricsLog& log);

void write_per_round_csv(std::ostream& out, const MetricsLog& log);
void write_summary_csv(std::ostream& out, const std::vector<MethodSummary>& summary);
/// Across-seed mean accuracy difference versus base_ol per round, one
/// polyline per method.
void write_diff_svg(std::ostream& out, const MetricsLog& log);

/// Writes per_round.csv, summary.csv and optionally diff.svg into dir.
void emit(const MetricsLog& log, const std::filesystem::path& dir, bool svg = true);

/// Parses a per_round.csv back into a log.
MetricsLog read_per_round_csv(std::istream& in);

/// Plain-text table for terminals.
void print_summary(std::ostream& out, const std::vector<MethodSummary>& summary);

}  // namespace shiftlearn
