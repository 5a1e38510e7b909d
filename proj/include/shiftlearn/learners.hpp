#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "shiftlearn/rng.hpp"
#include "shiftlearn/types.hpp"

namespace shiftlearn {

enum class LearnerKind { LogisticSgd, NearestCentroid, PriorCount };

std::string to_string(LearnerKind kind);
/// Throws std::invalid_argument naming the unsupported kind.
LearnerKind parse_learner_kind(const std::string& name);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::LogisticSgd;
  std::size_t num_classes = 2;
  std::size_t dim = 1;
  double learning_rate = 0.1;
  int epochs = 5;
  /// Standard deviation of the seeded Gaussian initial weights; 0 means zero init.
  double weight_scale = 0.0;

  /// Throws std::invalid_argument on the first bad field.
  void validate() const;
};

/// Black-box incremental classifier. Instances only ever see training folds.
class OnlineLearner {
 public:
  virtual ~OnlineLearner() = default;

  /// Advances the hypothesis by one batch. Throws std::invalid_argument on a
  /// dimension or label mismatch, leaving the learner untouched.
  void observe(std::span<const LabeledExample> batch);

  /// Writes K raw scores for x into out. Does not mutate the learner.
  virtual void score_into(std::span<const double> x, std::span<double> out) const = 0;

  ScoreVector scores(std::span<const double> x) const;
  Label predict(std::span<const double> x) const;

  virtual std::unique_ptr<OnlineLearner> clone() const = 0;
  /// Folds every parameter into the digest.
  virtual void digest(Fnv1a& h) const = 0;

  const LearnerSpec& spec() const { return spec_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t batches_seen() const { return batches_; }

 protected:
  LearnerSpec spec_;
  std::uint64_t seed_;
  std::size_t batches_ = 0;

  OnlineLearner(const LearnerSpec& spec, std::uint64_t seed) : spec_(spec), seed_(seed) {}
  virtual void do_observe(std::span<const LabeledExample> batch) = 0;
  void check_dim(std::span<const double> x) const;
};

/// Fresh learner with seeded initial state. Throws on an invalid spec.
std::unique_ptr<OnlineLearner> new_instance(const LearnerSpec& spec, std::uint64_t seed);

/// Multinomial logistic regression trained by per-example SGD. Each batch is
/// visited `epochs` times, each time in a freshly shuffled order.
class LogisticSgd final : public OnlineLearner {
 public:
  LogisticSgd(const LearnerSpec& spec, std::uint64_t seed);

  void score_into(std::span<const double> x, std::span<double> out) const override;
  std::unique_ptr<OnlineLearner> clone() const override { return std::make_unique<LogisticSgd>(*this); }
  void digest(Fnv1a& h) const override;

  /// Row-major K x (D + 1); the last column is the bias.
  std::span<double> weights() { return weights_; }
  std::span<const double> weights() const { return weights_; }

 private:
  void do_observe(std::span<const LabeledExample> batch) override;
  std::vector<double> weights_;
};

/// Scores are negative squared distances to per-class means.
/// Before any data all scores are 0. Classes without data score one below
/// the worst seen class so they never win while any class has data.
class NearestCentroid final : public OnlineLearner {
 public:
  NearestCentroid(const LearnerSpec& spec, std::uint64_t seed);

  void score_into(std::span<const double> x, std::span<double> out) const override;
  std::unique_ptr<OnlineLearner> clone() const override { return std::make_unique<NearestCentroid>(*this); }
  void digest(Fnv1a& h) const override;

  /// Per-class sum divided by count; zeros for an unseen class.
  std::vector<double> centroid(Label k) const;
  std::size_t count(Label k) const { return counts_[k]; }

 private:
  void do_observe(std::span<const LabeledExample> batch) override;
  std::vector<double> sums_;  // K x D
  std::vector<std::size_t> counts_;
};

/// Predicts the majority class seen so far; scores are the raw class counts.
class PriorCount final : public OnlineLearner {
 public:
  PriorCount(const LearnerSpec& spec, std::uint64_t seed);

  void score_into(std::span<const double> x, std::span<double> out) const override;
  std::unique_ptr<OnlineLearner> clone() const override { return std::make_unique<PriorCount>(*this); }
  void digest(Fnv1a& h) const override;

  std::size_t count(Label k) const { return counts_[k]; }

 private:
  void do_observe(std::span<const LabeledExample> batch) override;
  std::vector<std::size_t> counts_;
};

}  // namespace shiftlearn
