#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "shiftlearn/types.hpp"

namespace shiftlearn {

/// Any frozen classifier: maps a covariate to a label.
using Predictor = std::function<Label(std::span<const double>)>;

/// One round of holdout points in row-major form.
struct HoldoutRound {
  std::int64_t t = 0;
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<Label> labels;

  std::size_t size() const { return labels.size(); }
  std::span<const double> x(std::size_t i) const { return {features.data() + i * dim, dim}; }
};

class InsufficientHistory : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Append-only archive of holdout folds, optionally keeping only the
/// trailing `retention` rounds.
class HoldoutStore {
 public:
  explicit HoldoutStore(std::optional<std::size_t> retention = std::nullopt);

  /// Requires t == latest() + 1 and a non-empty, dimension-consistent fold.
  void append(std::int64_t t, std::span<const LabeledExample> examples);

  /// Latest appended round (0 when empty).
  std::int64_t latest() const { return latest_; }
  /// Oldest round still retained (latest() + 1 when empty).
  std::int64_t earliest() const { return latest_ - static_cast<std::int64_t>(rounds_.size()) + 1; }
  std::optional<std::size_t> retention() const { return retention_; }

  bool has_window(std::int64_t tau, std::int64_t r) const;
  /// Throws InsufficientHistory when t is not retained.
  const HoldoutRound& round(std::int64_t t) const;
  /// n(r): points in rounds [tau - r + 1, tau].
  std::size_t count(std::int64_t tau, std::int64_t r) const;

 private:
  std::optional<std::size_t> retention_;
  std::deque<HoldoutRound> rounds_;
  std::int64_t latest_ = 0;
};

struct CvttConfig {
  double delta = 0.1;
  std::int64_t horizon = 1;
  /// Multiplies the stopping threshold; 1 keeps the published constants.
  double slack = 1.0;

  void validate() const;
};

struct AccuracyEstimate {
  double value = 0.0;
  std::int64_t window_rounds = 0;
  std::size_t points_used = 0;
  std::string model_id;
  /// The doubling stopped because older rounds were evicted.
  bool cap_truncated = false;
};

/// One comparison of the doubling loop.
struct RefineStep {
  std::int64_t r = 0;
  double u_r = 0.0;
  double u_2r = 0.0;
  std::size_t n_r = 0;
  /// slack * 4 * S(n(r)) with the point count, as used by the rule.
  double threshold = 0.0;
  /// slack * 4 * S(r) with the round count, logged for comparison only.
  double threshold_by_rounds = 0.0;
  bool passed = false;
};

/// S(n, delta) = sqrt(ln(T/delta)/n) + sqrt(20 ln(T)/n).
double threshold_S(double count, const CvttConfig& config);

struct WindowAccuracy {
  double value = 0.0;
  std::size_t points = 0;
};

/// Point-weighted accuracy of the predictor over rounds [tau - r + 1, tau].
WindowAccuracy empirical_accuracy(const Predictor& model, const HoldoutStore& store, std::int64_t tau, std::int64_t r);

/// Adaptive doubling window: grow r while |u(r) - u(2r)| <= slack * 4 * S(n(r)),
/// and report u at the last accepted window.
AccuracyEstimate refine_accuracy(const Predictor& model, const HoldoutStore& store, std::int64_t tau,
                                 const CvttConfig& config, std::string model_id = {},
                                 std::vector<RefineStep>* trace = nullptr);

}  // namespace shiftlearn
