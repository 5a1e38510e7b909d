#include "shiftlearn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <regex>
#include <stdexcept>

namespace shiftlearn {

std::string BaselineSpec::name() const {
  switch (kind) {
    case BaselineKind::BaseOl: return "base_ol";
    case BaselineKind::OracleRestart: return "oracle_restart";
    case BaselineKind::Saol: return "saol_gc";
    case BaselineKind::SingleResolution: return "single_resolution_" + std::to_string(resolution);
    case BaselineKind::MajorityVote: return "majority_vote";
  }
  return "?";
}

BaselineSpec parse_baseline(const std::string& text) {
  if (text == "base_ol") return {BaselineKind::BaseOl};
  if (text == "oracle_restart") return {BaselineKind::OracleRestart};
  if (text == "saol_gc" || text == "saol") return {BaselineKind::Saol};
  if (text == "majority_vote") return {BaselineKind::MajorityVote};
  static const std::regex single(R"(single_resolution[(_](\d+)\)?)");
  std::smatch m;
  if (std::regex_match(text, m, single)) return {BaselineKind::SingleResolution, std::stoi(m[1].str())};
  throw std::invalid_argument("unknown baseline '" + text + "'");
}

namespace {

void check_order(std::int64_t last, const RoundBatch& batch) {
  if (batch.t != last + 1)
    throw std::invalid_argument("round " + std::to_string(batch.t) + " is out of order (expected " +
                                std::to_string(last + 1) + ")");
  if (batch.train.empty()) throw std::invalid_argument("empty training fold in round " + std::to_string(batch.t));
}

std::vector<Label> predict_with(const OnlineLearner& learner, std::span<const LabeledExample> covariates) {
  std::vector<Label> out;
  out.reserve(covariates.size());
  for (const auto& ex : covariates) out.push_back(learner.predict(ex.x));
  return out;
}

double learner_accuracy(const OnlineLearner& learner, const RoundBatch& batch) {
  std::size_t hits = 0;
  for (const auto* fold : {&batch.train, &batch.holdout})
    for (const auto& ex : *fold) hits += learner.predict(ex.x) == ex.y;
  return static_cast<double>(hits) / static_cast<double>(batch.size());
}

}  // namespace

// ---- BaseOl ----

BaseOl::BaseOl(const LearnerSpec& spec, std::uint64_t seed) : learner_(new_instance(spec, seed)) {}

std::vector<Label> BaseOl::predict(std::span<const LabeledExample> covariates) const {
  return predict_with(*learner_, covariates);
}

RoundMetrics BaseOl::step(const RoundBatch& batch) {
  check_order(last_round_, batch);
  RoundMetrics m;
  m.t = batch.t;
  m.accuracy = batch_accuracy(*this, batch);
  m.active_size = 1;
  m.model_id = "base";
  learner_->observe(batch.train);
  m.instances_trained = 1;
  last_round_ = batch.t;
  return m;
}

// ---- OracleRestart ----

OracleRestart::OracleRestart(const LearnerSpec& spec, std::uint64_t seed)
    : spec_(spec), seed_(seed), learner_(new_instance(spec, seed)) {}

std::vector<Label> OracleRestart::predict(std::span<const LabeledExample> covariates) const {
  return predict_with(*learner_, covariates);
}

RoundMetrics OracleRestart::step(const RoundBatch& batch) {
  check_order(last_round_, batch);
  if (!batch.distribution_id)
    throw std::invalid_argument("oracle_restart needs ground-truth distribution ids (round " +
                                std::to_string(batch.t) + " has none)");
  // The reset happens before predicting: the oracle knows where segments start.
  if (segment_ && *segment_ != *batch.distribution_id) learner_ = new_instance(spec_, seed_);
  segment_ = batch.distribution_id;

  RoundMetrics m;
  m.t = batch.t;
  m.accuracy = batch_accuracy(*this, batch);
  m.active_size = 1;
  m.model_id = "segment" + std::to_string(*segment_);
  learner_->observe(batch.train);
  m.instances_trained = 1;
  last_round_ = batch.t;
  return m;
}

// ---- Saol ----

Saol::Saol(const Horizon& horizon, const LearnerSpec& spec, std::uint64_t seed)
    : pool_(gc_schedule(horizon), spec, seed) {
  pool_.advance_to(1);
  for (const auto& rec : pool_.live()) weights_[rec.id()] = learning_rate(rec.interval);
}

double Saol::learning_rate(const Interval& interval) {
  return std::min(0.5, 1.0 / std::sqrt(static_cast<double>(interval.nominal_length())));
}

std::vector<double> Saol::normalized_weights() const {
  std::vector<double> w;
  double total = 0.0;
  for (const auto& rec : pool_.live()) total += w.emplace_back(weights_.at(rec.id()));
  for (auto& v : w) v /= total;
  return w;
}

EnsembleModel Saol::combiner() const {
  std::vector<IntervalId> ids;
  std::vector<const OnlineLearner*> members;
  for (const auto& rec : pool_.live()) {
    ids.push_back(rec.id());
    members.push_back(rec.learner.get());
  }
  return EnsembleModel(std::move(ids), std::move(members), normalized_weights(), EnsembleScores::Raw);
}

std::vector<Label> Saol::predict(std::span<const LabeledExample> covariates) const {
  const auto model = combiner();
  std::vector<Label> out;
  out.reserve(covariates.size());
  for (const auto& ex : covariates) out.push_back(model.predict(ex.x));
  return out;
}

RoundMetrics Saol::step(const RoundBatch& batch) {
  check_order(last_round_, batch);
  RoundMetrics m;
  m.t = batch.t;
  m.accuracy = batch_accuracy(*this, batch);
  m.active_size = pool_.live().size();
  m.model_id = "weighted";

  for (const auto& rec : pool_.live()) {
    const double reward = std::clamp(learner_accuracy(*rec.learner, batch) - m.accuracy, -1.0, 1.0);
    weights_[rec.id()] *= 1.0 + learning_rate(rec.interval) * reward;
  }
  pool_.train(batch.train);
  m.instances_trained = pool_.live().size();
  last_round_ = batch.t;

  if (batch.t < pool_.schedule().horizon.rounds()) {
    pool_.advance_to(batch.t + 1);
    std::erase_if(weights_, [this](const auto& kv) {
      return std::none_of(pool_.live().begin(), pool_.live().end(),
                          [&](const InstanceRecord& rec) { return rec.id() == kv.first; });
    });
    for (const auto& rec : pool_.live())
      if (!weights_.contains(rec.id())) weights_[rec.id()] = learning_rate(rec.interval);
  }
  return m;
}

// ---- MajorityVote ----

Label plurality(std::span<const Label> votes, std::size_t num_classes) {
  std::vector<std::size_t> counts(num_classes, 0);
  for (auto v : votes) ++counts.at(v);
  return static_cast<Label>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

MajorityVote::MajorityVote(const Horizon& horizon, const LearnerSpec& spec, std::uint64_t seed)
    : pool_(mri_schedule(horizon), spec, seed) {
  pool_.advance_to(1);
}

Label MajorityVote::predict_one(std::span<const double> x) const {
  std::vector<Label> votes;
  votes.reserve(pool_.live().size());
  for (const auto& rec : pool_.live()) votes.push_back(rec.learner->predict(x));
  return plurality(votes, pool_.learner_spec().num_classes);
}

std::vector<Label> MajorityVote::predict(std::span<const LabeledExample> covariates) const {
  std::vector<Label> out;
  out.reserve(covariates.size());
  for (const auto& ex : covariates) out.push_back(predict_one(ex.x));
  return out;
}

RoundMetrics MajorityVote::step(const RoundBatch& batch) {
  check_order(last_round_, batch);
  RoundMetrics m;
  m.t = batch.t;
  m.accuracy = batch_accuracy(*this, batch);
  m.active_size = pool_.live().size();
  m.model_id = "vote";
  pool_.train(batch.train);
  m.instances_trained = pool_.live().size();
  last_round_ = batch.t;
  if (batch.t < pool_.schedule().horizon.rounds()) pool_.advance_to(batch.t + 1);
  return m;
}

std::unique_ptr<OnlineMethod> make_baseline(const BaselineSpec& spec, const AweConfig& awe) {
  switch (spec.kind) {
    case BaselineKind::BaseOl: return std::make_unique<BaseOl>(awe.learner, awe.learner_seed);
    case BaselineKind::OracleRestart: return std::make_unique<OracleRestart>(awe.learner, awe.learner_seed);
    case BaselineKind::Saol: return std::make_unique<Saol>(awe.horizon, awe.learner, awe.learner_seed);
    case BaselineKind::MajorityVote: return std::make_unique<MajorityVote>(awe.horizon, awe.learner, awe.learner_seed);
    case BaselineKind::SingleResolution: {
      AweConfig cfg = awe;
      cfg.single_resolution = spec.resolution;
      return std::make_unique<Awe>(cfg);
    }
  }
  throw std::invalid_argument("unknown baseline kind");
}

}  // namespace shiftlearn
