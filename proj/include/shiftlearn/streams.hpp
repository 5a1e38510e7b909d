#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

#include "shiftlearn/types.hpp"

namespace shiftlearn {

/// Class means are constant within segments. `boundaries` lists the first
/// round of every segment after the first; `means[s]` is a row-major K x D
/// matrix for segment s.
struct PiecewiseDrift {
  std::vector<std::int64_t> boundaries;
  std::vector<std::vector<double>> means;
  double noise = 1.0;
};

/// Two-dimensional stream whose class means sit evenly spaced on a circle
/// that turns by `angular_velocity` radians per round.
struct RotatingDrift {
  double angular_velocity = 0.0;
  double radius = 1.0;
  double noise = 1.0;
};

struct StreamSpec {
  std::int64_t rounds = 1;
  std::size_t train_per_round = 1;
  std::size_t holdout_per_round = 1;
  std::size_t num_classes = 2;
  std::size_t dim = 2;
  std::variant<PiecewiseDrift, RotatingDrift> drift;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument on the first bad field.
  void validate() const;
  /// Segment index generating round t (0 for rotating streams).
  int distribution_id(std::int64_t t) const;
  /// Mean of class k at round t.
  std::vector<double> class_mean(std::int64_t t, Label k) const;
};

struct RoundBatch {
  std::int64_t t = 0;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> holdout;
  /// Ground-truth generating segment; evaluation only.
  std::optional<int> distribution_id;

  std::size_t size() const { return train.size() + holdout.size(); }
};

/// Round t of the stream; a pure function of (spec, t).
RoundBatch generate_round(const StreamSpec& spec, std::int64_t t);
/// All rounds 1..T.
std::vector<RoundBatch> generate(const StreamSpec& spec);

struct FoldSplit {
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> holdout;
};

/// Seeded shuffle keyed on (seed, t); train size round(p * N) clamped so both
/// folds are non-empty. Throws std::invalid_argument for fewer than two
/// points or p outside (0, 1).
FoldSplit split_folds(std::span<const LabeledExample> points, double p, std::uint64_t seed, std::int64_t t);

/// Raised for malformed stream files; `line` is 1-based, 0 when not tied to a line.
class StreamFormatError : public std::runtime_error {
 public:
  StreamFormatError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

struct LoadOptions {
  std::size_t num_classes = 2;
  double split_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Reads JSONL records {"t": int, "x": [float], "y": int, "fold": "train"|"holdout"}.
/// Rounds must be contiguous from 1. Rounds without fold tags are split with
/// split_folds; a round must not mix tagged and untagged records.
std::vector<RoundBatch> load_stream(std::istream& in, const LoadOptions& options);
std::vector<RoundBatch> load_stream(const std::filesystem::path& path, const LoadOptions& options);

void write_stream_jsonl(std::ostream& out, std::span<const RoundBatch> batches);
/// Columns: t,fold,y,x0..x{D-1}.
void write_stream_csv(std::ostream& out, std::span<const RoundBatch> batches);

}  // namespace shiftlearn
