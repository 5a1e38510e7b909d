#include "shiftlearn/learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace shiftlearn {

std::string to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::LogisticSgd: return "logistic_sgd";
    case LearnerKind::NearestCentroid: return "nearest_centroid";
    case LearnerKind::PriorCount: return "prior_count";
  }
  return "?";
}

LearnerKind parse_learner_kind(const std::string& name) {
  if (name == "logistic_sgd") return LearnerKind::LogisticSgd;
  if (name == "nearest_centroid") return LearnerKind::NearestCentroid;
  if (name == "prior_count") return LearnerKind::PriorCount;
  throw std::invalid_argument("unsupported learner kind '" + name + "'");
}

void LearnerSpec::validate() const {
  if (num_classes < 1) throw std::invalid_argument("learner: num_classes must be >= 1");
  if (dim < 1) throw std::invalid_argument("learner: dim must be >= 1");
  if (kind == LearnerKind::LogisticSgd) {
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw std::invalid_argument("learner: learning_rate must be positive");
    if (epochs < 1) throw std::invalid_argument("learner: epochs must be >= 1");
    if (!(weight_scale >= 0.0) || !std::isfinite(weight_scale))
      throw std::invalid_argument("learner: weight_scale must be >= 0");
  }
}

void OnlineLearner::check_dim(std::span<const double> x) const {
  if (x.size() != spec_.dim)
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) + " does not match learner dimension " +
                                std::to_string(spec_.dim));
}

void OnlineLearner::observe(std::span<const LabeledExample> batch) {
  for (const auto& ex : batch) {
    check_dim(ex.x);
    if (ex.y >= spec_.num_classes)
      throw std::invalid_argument("label " + std::to_string(ex.y) + " outside [0, " +
                                  std::to_string(spec_.num_classes) + ")");
    for (double v : ex.x)
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite feature value");
  }
  do_observe(batch);
  ++batches_;
}

ScoreVector OnlineLearner::scores(std::span<const double> x) const {
  check_dim(x);
  ScoreVector out(spec_.num_classes, 0.0);
  score_into(x, out);
  return out;
}

Label OnlineLearner::predict(std::span<const double> x) const { return argmax(scores(x)); }

std::unique_ptr<OnlineLearner> new_instance(const LearnerSpec& spec, std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case LearnerKind::LogisticSgd: return std::make_unique<LogisticSgd>(spec, seed);
    case LearnerKind::NearestCentroid: return std::make_unique<NearestCentroid>(spec, seed);
    case LearnerKind::PriorCount: return std::make_unique<PriorCount>(spec, seed);
  }
  throw std::invalid_argument("unsupported learner kind");
}

// ---- LogisticSgd ----

LogisticSgd::LogisticSgd(const LearnerSpec& spec, std::uint64_t seed)
    : OnlineLearner(spec, seed), weights_(spec.num_classes * (spec.dim + 1), 0.0) {
  if (spec.weight_scale > 0.0) {
    CounterRng rng(seed, RngPurpose::kLearnerInit, 0);
    for (auto& w : weights_) w = spec.weight_scale * rng.normal();
  }
}

void LogisticSgd::score_into(std::span<const double> x, std::span<double> out) const {
  const std::size_t stride = spec_.dim + 1;
  for (std::size_t k = 0; k < spec_.num_classes; ++k) {
    const double* row = weights_.data() + k * stride;
    double s = row[spec_.dim];
    for (std::size_t j = 0; j < spec_.dim; ++j) s += row[j] * x[j];
    out[k] = s;
  }
}

void LogisticSgd::do_observe(std::span<const LabeledExample> batch) {
  const std::size_t K = spec_.num_classes;
  const std::size_t stride = spec_.dim + 1;
  std::vector<std::size_t> order(batch.size());
  std::vector<double> p(K);
  CounterRng rng(seed_, RngPurpose::kLearnerShuffle, batches_);
  for (int epoch = 0; epoch < spec_.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);
    for (std::size_t idx : order) {
      const auto& ex = batch[idx];
      score_into(ex.x, p);
      const double top = *std::max_element(p.begin(), p.end());
      double z = 0.0;
      for (auto& v : p) z += (v = std::exp(v - top));
      for (std::size_t k = 0; k < K; ++k) {
        const double g = p[k] / z - (k == ex.y ? 1.0 : 0.0);
        double* row = weights_.data() + k * stride;
        const double step = spec_.learning_rate * g;
        for (std::size_t j = 0; j < spec_.dim; ++j) row[j] -= step * ex.x[j];
        row[spec_.dim] -= step;
      }
    }
  }
}

void LogisticSgd::digest(Fnv1a& h) const { h.add(std::span<const double>(weights_)); }

// ---- NearestCentroid ----

NearestCentroid::NearestCentroid(const LearnerSpec& spec, std::uint64_t seed)
    : OnlineLearner(spec, seed), sums_(spec.num_classes * spec.dim, 0.0), counts_(spec.num_classes, 0) {}

std::vector<double> NearestCentroid::centroid(Label k) const {
  std::vector<double> c(spec_.dim, 0.0);
  if (counts_[k] == 0) return c;
  for (std::size_t j = 0; j < spec_.dim; ++j) c[j] = sums_[k * spec_.dim + j] / static_cast<double>(counts_[k]);
  return c;
}

void NearestCentroid::score_into(std::span<const double> x, std::span<double> out) const {
  bool any = false;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < spec_.num_classes; ++k) {
    if (counts_[k] == 0) continue;
    any = true;
    const double* sum = sums_.data() + k * spec_.dim;
    const double n = static_cast<double>(counts_[k]);
    double d2 = 0.0;
    for (std::size_t j = 0; j < spec_.dim; ++j) {
      const double diff = x[j] - sum[j] / n;
      d2 += diff * diff;
    }
    out[k] = -d2;
    worst = std::min(worst, -d2);
  }
  for (std::size_t k = 0; k < spec_.num_classes; ++k)
    if (counts_[k] == 0) out[k] = any ? worst - 1.0 : 0.0;
}

void NearestCentroid::do_observe(std::span<const LabeledExample> batch) {
  for (const auto& ex : batch) {
    ++counts_[ex.y];
    double* sum = sums_.data() + ex.y * spec_.dim;
    for (std::size_t j = 0; j < spec_.dim; ++j) sum[j] += ex.x[j];
  }
}

void NearestCentroid::digest(Fnv1a& h) const {
  h.add(std::span<const double>(sums_));
  for (auto c : counts_) h.add(static_cast<std::uint64_t>(c));
}

// ---- PriorCount ----

PriorCount::PriorCount(const LearnerSpec& spec, std::uint64_t seed)
    : OnlineLearner(spec, seed), counts_(spec.num_classes, 0) {}

void PriorCount::score_into(std::span<const double>, std::span<double> out) const {
  for (std::size_t k = 0; k < spec_.num_classes; ++k) out[k] = static_cast<double>(counts_[k]);
}

void PriorCount::do_observe(std::span<const LabeledExample> batch) {
  for (const auto& ex : batch) ++counts_[ex.y];
}

void PriorCount::digest(Fnv1a& h) const {
  for (auto c : counts_) h.add(static_cast<std::uint64_t>(c));
}

}  // namespace shiftlearn
