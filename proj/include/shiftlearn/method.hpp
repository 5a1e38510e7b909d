#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "shiftlearn/streams.hpp"

namespace shiftlearn {

/// What one method reports about one protocol round.
struct RoundMetrics {
  std::int64_t t = 0;
  /// Accuracy of the deployed model on the whole round batch, measured
  /// before any of the round's labels were used.
  double accuracy = 0.0;
  /// Refined-accuracy window of the deployed model (0 when not applicable).
  std::int64_t window_rounds = 0;
  std::size_t active_size = 0;
  std::string model_id;
  std::size_t instances_trained = 0;
  std::size_t instances_queried = 0;
};

/// A meta-algorithm or baseline driven through the batched protocol.
class OnlineMethod {
 public:
  virtual ~OnlineMethod() = default;
  virtual std::string name() const = 0;
  /// Labels for a round's covariates using the currently deployed model.
  virtual std::vector<Label> predict(std::span<const LabeledExample> covariates) const = 0;
  /// Runs one full round: evaluate, then learn from the revealed labels.
  virtual RoundMetrics step(const RoundBatch& batch) = 0;
};

/// Fraction of examples in both folds whose label matches the prediction.
double batch_accuracy(const OnlineMethod& method, const RoundBatch& batch);

}  // namespace shiftlearn
