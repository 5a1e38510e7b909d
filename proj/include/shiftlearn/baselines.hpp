#pragma once

#include <map>
#include <memory>
#include <optional>

#include "shiftlearn/awe.hpp"

namespace shiftlearn {

enum class BaselineKind { BaseOl, OracleRestart, Saol, SingleResolution, MajorityVote };

struct BaselineSpec {
  BaselineKind kind = BaselineKind::BaseOl;
  /// Resolution for SingleResolution, in [1, M].
  int resolution = 1;

  /// Stable method name used in metrics files.
  std::string name() const;
};

/// Parses "base_ol", "oracle_restart", "saol_gc", "majority_vote" or
/// "single_resolution(i)". Throws std::invalid_argument otherwise.
BaselineSpec parse_baseline(const std::string& text);

/// One learner trained on every round's training fold.
class BaseOl final : public OnlineMethod {
 public:
  BaseOl(const LearnerSpec& spec, std::uint64_t seed);

  std::string name() const override { return "base_ol"; }
  std::vector<Label> predict(std::span<const LabeledExample> covariates) const override;
  RoundMetrics step(const RoundBatch& batch) override;

  const OnlineLearner& learner() const { return *learner_; }

 private:
  std::unique_ptr<OnlineLearner> learner_;
  std::int64_t last_round_ = 0;
};

/// Base learner reset whenever the ground-truth segment changes.
/// Evaluation-only comparator standing in for the best-in-class model.
class OracleRestart final : public OnlineMethod {
 public:
  OracleRestart(const LearnerSpec& spec, std::uint64_t seed);

  std::string name() const override { return "oracle_restart"; }
  std::vector<Label> predict(std::span<const LabeledExample> covariates) const override;
  RoundMetrics step(const RoundBatch& batch) override;

  const OnlineLearner& learner() const { return *learner_; }

 private:
  LearnerSpec spec_;
  std::uint64_t seed_;
  std::unique_ptr<OnlineLearner> learner_;
  std::optional<int> segment_;
  std::int64_t last_round_ = 0;
};

/// Multiplicative-weights aggregation over geometric covering intervals.
///
/// Each interval I enters with weight eta_I = min(1/2, 1/sqrt(|I|)), |I| the
/// untruncated length. After each round every active expert gets reward
/// r = clip(acc_expert - acc_meta, -1, 1) on the revealed batch and its
/// weight is multiplied by (1 + eta_I r). Predictions combine expert scores
/// with weights normalized over the active set.
class Saol final : public OnlineMethod {
 public:
  Saol(const Horizon& horizon, const LearnerSpec& spec, std::uint64_t seed);

  std::string name() const override { return "saol_gc"; }
  std::vector<Label> predict(std::span<const LabeledExample> covariates) const override;
  RoundMetrics step(const RoundBatch& batch) override;

  const InstancePool& pool() const { return pool_; }
  /// Normalized weights of the live experts in canonical order.
  std::vector<double> normalized_weights() const;
  double raw_weight(const IntervalId& id) const { return weights_.at(id); }

  static double learning_rate(const Interval& interval);

 private:
  EnsembleModel combiner() const;
  InstancePool pool_;
  std::map<IntervalId, double> weights_;
  std::int64_t last_round_ = 0;
};

/// Multi-resolution schedule and training, prediction by plurality vote of
/// the live instances' labels (ties to the smallest label). No CVTT.
class MajorityVote final : public OnlineMethod {
 public:
  MajorityVote(const Horizon& horizon, const LearnerSpec& spec, std::uint64_t seed);

  std::string name() const override { return "majority_vote"; }
  std::vector<Label> predict(std::span<const LabeledExample> covariates) const override;
  RoundMetrics step(const RoundBatch& batch) override;

  Label predict_one(std::span<const double> x) const;
  const InstancePool& pool() const { return pool_; }

 private:
  InstancePool pool_;
  std::int64_t last_round_ = 0;
};

/// Plurality over labels; ties go to the smallest label.
Label plurality(std::span<const Label> votes, std::size_t num_classes);

/// Builds a baseline for a run. SingleResolution is AWE restricted to one
/// resolution, so it takes the full AWE configuration.
std::unique_ptr<OnlineMethod> make_baseline(const BaselineSpec& spec, const AweConfig& awe);

}  // namespace shiftlearn
