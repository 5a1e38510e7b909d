#include "shiftlearn/cvtt.hpp"

#include <cmath>

namespace shiftlearn {

HoldoutStore::HoldoutStore(std::optional<std::size_t> retention) : retention_(retention) {
  if (retention_ && *retention_ == 0) throw std::invalid_argument("holdout retention must be >= 1 round");
}

void HoldoutStore::append(std::int64_t t, std::span<const LabeledExample> examples) {
  if (t != latest_ + 1)
    throw std::invalid_argument("out-of-order holdout append: expected round " + std::to_string(latest_ + 1) +
                                ", got " + std::to_string(t));
  if (examples.empty()) throw std::invalid_argument("holdout fold for round " + std::to_string(t) + " is empty");
  HoldoutRound round;
  round.t = t;
  round.dim = examples.front().x.size();
  if (!rounds_.empty() && round.dim != rounds_.back().dim)
    throw std::invalid_argument("holdout dimension changed between rounds");
  round.features.reserve(examples.size() * round.dim);
  round.labels.reserve(examples.size());
  for (const auto& ex : examples) {
    if (ex.x.size() != round.dim) throw std::invalid_argument("holdout examples disagree on dimension");
    round.features.insert(round.features.end(), ex.x.begin(), ex.x.end());
    round.labels.push_back(ex.y);
  }
  rounds_.push_back(std::move(round));
  latest_ = t;
  if (retention_)
    while (rounds_.size() > *retention_) rounds_.pop_front();
}

bool HoldoutStore::has_window(std::int64_t tau, std::int64_t r) const {
  return r >= 1 && tau <= latest_ && tau - r + 1 >= earliest();
}

const HoldoutRound& HoldoutStore::round(std::int64_t t) const {
  if (t < earliest() || t > latest_)
    throw InsufficientHistory("insufficient history: round " + std::to_string(t) + " is not retained (have [" +
                              std::to_string(earliest()) + ", " + std::to_string(latest_) + "])");
  return rounds_[static_cast<std::size_t>(t - earliest())];
}

std::size_t HoldoutStore::count(std::int64_t tau, std::int64_t r) const {
  std::size_t n = 0;
  for (std::int64_t t = tau - r + 1; t <= tau; ++t) n += round(t).size();
  return n;
}

void CvttConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("cvtt: delta must lie in (0, 1)");
  if (horizon < 1) throw std::invalid_argument("cvtt: horizon must be >= 1");
  if (!(slack > 0.0) || !std::isfinite(slack)) throw std::invalid_argument("cvtt: slack must be positive");
}

double threshold_S(double count, const CvttConfig& config) {
  if (!(count >= 1.0)) throw std::invalid_argument("threshold_S needs a count >= 1");
  const double T = static_cast<double>(config.horizon);
  return std::sqrt(std::log(T / config.delta) / count) + std::sqrt(20.0 * std::log(T) / count);
}

namespace {

std::size_t correct_in_round(const Predictor& model, const HoldoutRound& round) {
  std::size_t hits = 0;
  for (std::size_t i = 0; i < round.size(); ++i)
    if (model(round.x(i)) == round.labels[i]) ++hits;
  return hits;
}

/// Per-round hit counts, filled from tau backwards on demand.
class WindowTally {
 public:
  WindowTally(const Predictor& model, const HoldoutStore& store, std::int64_t tau)
      : model_(model), store_(store), tau_(tau) {}

  WindowAccuracy accuracy(std::int64_t r) {
    while (static_cast<std::int64_t>(hits_.size()) < r) {
      const auto& round = store_.round(tau_ - static_cast<std::int64_t>(hits_.size()));
      hits_.push_back(hits_.empty() ? 0 : hits_.back());
      points_.push_back(points_.empty() ? 0 : points_.back());
      hits_.back() += correct_in_round(model_, round);
      points_.back() += round.size();
    }
    const auto i = static_cast<std::size_t>(r - 1);
    return {static_cast<double>(hits_[i]) / static_cast<double>(points_[i]), points_[i]};
  }

 private:
  const Predictor& model_;
  const HoldoutStore& store_;
  std::int64_t tau_;
  std::vector<std::size_t> hits_;    // cumulative
  std::vector<std::size_t> points_;  // cumulative
};

}  // namespace

WindowAccuracy empirical_accuracy(const Predictor& model, const HoldoutStore& store, std::int64_t tau, std::int64_t r) {
  if (r < 1) throw std::invalid_argument("window must span at least one round");
  if (!store.has_window(tau, r))
    throw InsufficientHistory("insufficient history for window [" + std::to_string(tau - r + 1) + ", " +
                              std::to_string(tau) + "]");
  return WindowTally(model, store, tau).accuracy(r);
}

AccuracyEstimate refine_accuracy(const Predictor& model, const HoldoutStore& store, std::int64_t tau,
                                 const CvttConfig& config, std::string model_id, std::vector<RefineStep>* trace) {
  if (tau < 1) throw std::invalid_argument("refine_accuracy needs tau >= 1");
  if (!store.has_window(tau, 1))
    throw InsufficientHistory("insufficient history: round " + std::to_string(tau) + " is not in the holdout store");
  WindowTally tally(model, store, tau);
  AccuracyEstimate est;
  est.model_id = std::move(model_id);

  std::int64_t r = 1;
  while (2 * r <= tau) {
    if (!store.has_window(tau, 2 * r)) {
      est.cap_truncated = true;
      break;
    }
    const auto short_window = tally.accuracy(r);
    const auto long_window = tally.accuracy(2 * r);
    RefineStep step;
    step.r = r;
    step.u_r = short_window.value;
    step.u_2r = long_window.value;
    step.n_r = short_window.points;
    step.threshold = config.slack * 4.0 * threshold_S(static_cast<double>(short_window.points), config);
    step.threshold_by_rounds = config.slack * 4.0 * threshold_S(static_cast<double>(r), config);
    step.passed = std::abs(step.u_r - step.u_2r) <= step.threshold;
    if (trace) trace->push_back(step);
    if (!step.passed) break;
    r *= 2;
  }
  const auto final_window = tally.accuracy(r);
  est.value = final_window.value;
  est.window_rounds = r;
  est.points_used = final_window.points;
  return est;
}

}  // namespace shiftlearn
