#pragma once

#include <memory>
#include <vector>

#include "shiftlearn/intervals.hpp"
#include "shiftlearn/learners.hpp"

namespace shiftlearn {

/// One learner bound to one schedule interval.
struct InstanceRecord {
  Interval interval;
  std::unique_ptr<OnlineLearner> learner;
  std::size_t rounds_trained = 0;
  std::size_t points_trained = 0;
  /// Rounds whose training folds this learner has observed.
  std::int64_t first_trained = 0;
  std::int64_t last_trained = 0;

  const IntervalId& id() const { return interval.id; }
};

/// Keeps exactly the instances whose intervals contain the cursor round,
/// spawning fresh learners on entry and dropping them after their last round.
class InstancePool {
 public:
  InstancePool(Schedule schedule, LearnerSpec spec, std::uint64_t learner_seed);

  /// Moves the cursor to round t (must be cursor() + 1 and <= T).
  void advance_to(std::int64_t t);
  /// Feeds one training fold to every live instance.
  void train(std::span<const LabeledExample> fold);

  std::int64_t cursor() const { return cursor_; }
  const Schedule& schedule() const { return schedule_; }
  const LearnerSpec& learner_spec() const { return spec_; }
  std::uint64_t learner_seed() const { return seed_; }

  /// Live instances in canonical interval order.
  const std::vector<InstanceRecord>& live() const { return live_; }
  /// Throws std::out_of_range for an id that is not live.
  const InstanceRecord& get(const IntervalId& id) const;

  void digest(Fnv1a& h) const;

 private:
  Schedule schedule_;
  LearnerSpec spec_;
  std::uint64_t seed_;
  std::int64_t cursor_ = 0;
  std::vector<InstanceRecord> live_;
};

}  // namespace shiftlearn
