#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <vector>

#include "shiftlearn/awe.hpp"
#include "shiftlearn/baselines.hpp"
#include "shiftlearn/streams.hpp"

namespace shiftlearn {

struct ExperimentConfig {
  StreamSpec stream;
  AweConfig awe;
  std::vector<BaselineSpec> baselines;
  std::vector<std::uint64_t> seeds{1};
  std::filesystem::path output_dir;
  bool emit_svg = true;
  /// Ingest this JSONL stream instead of generating one.
  std::optional<std::filesystem::path> stream_file;

  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses the INI-style experiment file. Every section and key is checked;
/// unknown keys, missing required keys and bad values raise ConfigError.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Piecewise K=4, D=2 Gaussian stream: four segments of 16 rounds in which
/// the class-to-corner assignment is rotated, n=100, m=50, noise 0.7.
StreamSpec reference_stream(std::uint64_t seed = 1);
/// reference_stream with logistic SGD (rate 0.005, 3 epochs), slack 0.1,
/// seeds 1..5 and the base_ol / oracle_restart comparators.
ExperimentConfig reference_experiment();

}  // namespace shiftlearn
