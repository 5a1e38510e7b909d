#pragma once

#include <optional>
#include <variant>

#include "shiftlearn/cvtt.hpp"
#include "shiftlearn/instance_pool.hpp"
#include "shiftlearn/method.hpp"

namespace shiftlearn {

enum class EnsembleScores { Raw, Softmax };

struct AweConfig {
  Horizon horizon{2};
  /// Fraction of each round's labels given to the training fold. Batches
  /// arrive already split; this value drives ingestion of unsplit streams.
  double split_fraction = 2.0 / 3.0;
  LearnerSpec learner;
  std::uint64_t learner_seed = 0;
  /// delta and slack for refined accuracy; its horizon is taken from `horizon`.
  CvttConfig cvtt;
  EnsembleScores scores = EnsembleScores::Raw;
  /// Floor ensemble weights at 1/K.
  bool floor_weights = false;
  std::optional<std::size_t> holdout_retention;
  /// Restrict the schedule to one resolution (ablation).
  std::optional<int> single_resolution;

  void validate() const;
};

/// Weighted logit combination: argmax_k sum_i w_i * score_i[k].
class EnsembleModel {
 public:
  EnsembleModel() = default;
  EnsembleModel(std::vector<IntervalId> ids, std::vector<const OnlineLearner*> members, std::vector<double> weights,
                EnsembleScores mode);

  void combined_scores(std::span<const double> x, std::span<double> out) const;
  Label predict(std::span<const double> x) const;
  Predictor predictor() const;

  const std::vector<IntervalId>& member_ids() const { return ids_; }
  const std::vector<double>& weights() const { return weights_; }
  std::size_t num_classes() const;

 private:
  std::vector<IntervalId> ids_;
  std::vector<const OnlineLearner*> members_;
  std::vector<double> weights_;
  EnsembleScores mode_ = EnsembleScores::Raw;
};

/// Refined accuracy with the ensemble's weighted argmax as the predictor.
AccuracyEstimate refine_accuracy_of_ensemble(const EnsembleModel& ensemble, const HoldoutStore& store,
                                             std::int64_t tau, const CvttConfig& config);

/// Predictor backed by a single learner.
Predictor learner_predictor(const OnlineLearner& learner);

/// Selection made at the end of a round for the next one.
struct SelectionRecord {
  std::int64_t for_round = 0;
  std::vector<IntervalId> members;
  std::vector<AccuracyEstimate> member_estimates;
  IntervalId best_single;
  AccuracyEstimate best_single_estimate;
  AccuracyEstimate ensemble_estimate;
  bool ensemble_chosen = false;
};

/// Accuracy-weighted ensembling over multi-resolution instances.
class Awe final : public OnlineMethod {
 public:
  explicit Awe(AweConfig config);

  std::string name() const override;
  std::vector<Label> predict(std::span<const LabeledExample> covariates) const override;
  RoundMetrics step(const RoundBatch& batch) override;

  Label predict_one(std::span<const double> x) const;

  /// Next round to be played.
  std::int64_t cursor() const { return pool_.cursor(); }
  const InstancePool& pool() const { return pool_; }
  const HoldoutStore& store() const { return store_; }
  const AweConfig& config() const { return config_; }
  bool ensemble_deployed() const { return std::holds_alternative<EnsembleModel>(current_); }
  /// Interval id of the deployed single instance, or nothing for the ensemble.
  std::optional<IntervalId> deployed_instance() const;
  const EnsembleModel* deployed_ensemble() const { return std::get_if<EnsembleModel>(&current_); }
  std::string deployed_id() const;
  /// Empty before the first round completes.
  const std::optional<SelectionRecord>& last_selection() const { return last_selection_; }

  /// Hash of the cursor, every live learner's parameters, and the deployed model.
  std::uint64_t state_digest() const;

 private:
  AweConfig config_;
  InstancePool pool_;
  HoldoutStore store_;
  std::variant<IntervalId, EnsembleModel> current_;
  std::int64_t current_window_ = 0;
  std::optional<SelectionRecord> last_selection_;
};

}  // namespace shiftlearn
