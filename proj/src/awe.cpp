#include "shiftlearn/awe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace shiftlearn {

double batch_accuracy(const OnlineMethod& method, const RoundBatch& batch) {
  const auto train_pred = method.predict(batch.train);
  const auto holdout_pred = method.predict(batch.holdout);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < batch.train.size(); ++i) hits += train_pred[i] == batch.train[i].y;
  for (std::size_t i = 0; i < batch.holdout.size(); ++i) hits += holdout_pred[i] == batch.holdout[i].y;
  const std::size_t total = batch.size();
  return total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
}

void AweConfig::validate() const {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw std::invalid_argument("awe: split fraction must lie in (0, 1)");
  learner.validate();
  CvttConfig c = cvtt;
  c.horizon = horizon.rounds();
  c.validate();
  if (horizon.rounds() < 2) throw std::invalid_argument("awe: horizon must have at least 2 rounds");
  if (single_resolution && (*single_resolution < 1 || *single_resolution > horizon.resolutions()))
    throw std::invalid_argument("awe: single resolution outside [1, " + std::to_string(horizon.resolutions()) + "]");
}

// ---- EnsembleModel ----

EnsembleModel::EnsembleModel(std::vector<IntervalId> ids, std::vector<const OnlineLearner*> members,
                             std::vector<double> weights, EnsembleScores mode)
    : ids_(std::move(ids)), members_(std::move(members)), weights_(std::move(weights)), mode_(mode) {
  if (members_.empty()) throw std::invalid_argument("ensemble needs at least one member");
  if (members_.size() != weights_.size() || ids_.size() != members_.size())
    throw std::invalid_argument("ensemble members, ids and weights must have equal length");
}

std::size_t EnsembleModel::num_classes() const { return members_.front()->spec().num_classes; }

void EnsembleModel::combined_scores(std::span<const double> x, std::span<double> out) const {
  const std::size_t K = num_classes();
  std::vector<double> s(K);
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < members_.size(); ++i) {
    members_[i]->score_into(x, s);
    if (mode_ == EnsembleScores::Softmax) {
      const double top = *std::max_element(s.begin(), s.end());
      double z = 0.0;
      for (auto& v : s) z += (v = std::exp(v - top));
      for (auto& v : s) v /= z;
    }
    for (std::size_t k = 0; k < K; ++k) out[k] += weights_[i] * s[k];
  }
}

Label EnsembleModel::predict(std::span<const double> x) const {
  std::vector<double> combined(num_classes());
  combined_scores(x, combined);
  return argmax(combined);
}

Predictor EnsembleModel::predictor() const {
  return [this](std::span<const double> x) { return predict(x); };
}

Predictor learner_predictor(const OnlineLearner& learner) {
  return [&learner, buf = std::vector<double>(learner.spec().num_classes)](std::span<const double> x) mutable {
    learner.score_into(x, buf);
    return argmax(buf);
  };
}

AccuracyEstimate refine_accuracy_of_ensemble(const EnsembleModel& ensemble, const HoldoutStore& store,
                                             std::int64_t tau, const CvttConfig& config) {
  return refine_accuracy(ensemble.predictor(), store, tau, config, "ensemble");
}

// ---- Awe ----

namespace {

Schedule build_schedule(const AweConfig& config) {
  return config.single_resolution ? single_resolution_schedule(config.horizon, *config.single_resolution)
                                  : mri_schedule(config.horizon);
}

AweConfig checked(AweConfig config) {
  config.validate();
  config.cvtt.horizon = config.horizon.rounds();
  return config;
}

}  // namespace

Awe::Awe(AweConfig config)
    : config_(checked(std::move(config))),
      pool_(build_schedule(config_), config_.learner, config_.learner_seed),
      store_(config_.holdout_retention) {
  pool_.advance_to(1);
  // Deploy the longest-lived R instance starting at round 1.
  for (const auto& rec : pool_.live()) {
    if (rec.interval.family() == Family::R && rec.interval.start == 1) {
      current_ = rec.id();
      return;
    }
  }
  throw std::logic_error("schedule has no R interval starting at round 1");
}

std::string Awe::name() const {
  return config_.single_resolution ? "single_resolution_" + std::to_string(*config_.single_resolution) : "awe";
}

Label Awe::predict_one(std::span<const double> x) const {
  if (const auto* ens = std::get_if<EnsembleModel>(&current_)) return ens->predict(x);
  return pool_.get(std::get<IntervalId>(current_)).learner->predict(x);
}

std::vector<Label> Awe::predict(std::span<const LabeledExample> covariates) const {
  std::vector<Label> out;
  out.reserve(covariates.size());
  for (const auto& ex : covariates) out.push_back(predict_one(ex.x));
  return out;
}

std::optional<IntervalId> Awe::deployed_instance() const {
  if (const auto* id = std::get_if<IntervalId>(&current_)) return *id;
  return std::nullopt;
}

std::string Awe::deployed_id() const {
  if (const auto* id = std::get_if<IntervalId>(&current_)) return to_string(*id);
  return "ensemble";
}

RoundMetrics Awe::step(const RoundBatch& batch) {
  const std::int64_t T = config_.horizon.rounds();
  if (batch.t > T) throw std::out_of_range("round " + std::to_string(batch.t) + " is beyond the horizon");
  if (batch.t != pool_.cursor() || store_.latest() >= batch.t)
    throw std::invalid_argument("round " + std::to_string(batch.t) + " is out of order (expected " +
                                std::to_string(store_.latest() + 1) + ")");
  if (batch.train.empty()) throw std::invalid_argument("empty training fold");

  const std::int64_t t = batch.t;
  RoundMetrics metrics;
  metrics.t = t;
  metrics.accuracy = batch_accuracy(*this, batch);
  metrics.window_rounds = current_window_;
  metrics.active_size = pool_.live().size();
  metrics.model_id = deployed_id();

  store_.append(t, batch.holdout);
  pool_.train(batch.train);
  metrics.instances_trained = pool_.live().size();
  if (t == T) return metrics;

  pool_.advance_to(t + 1);
  const auto& live = pool_.live();
  metrics.instances_queried = live.size();

  SelectionRecord sel;
  sel.for_round = t + 1;
  std::vector<const OnlineLearner*> members;
  std::vector<double> weights;
  std::size_t best = 0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    const auto& rec = live[i];
    auto est = refine_accuracy(learner_predictor(*rec.learner), store_, t, config_.cvtt, to_string(rec.id()));
    sel.members.push_back(rec.id());
    members.push_back(rec.learner.get());
    double w = est.value;
    if (config_.floor_weights) w = std::max(w, 1.0 / static_cast<double>(config_.learner.num_classes));
    weights.push_back(w);
    sel.member_estimates.push_back(std::move(est));
    // Ties: more rounds trained, then canonical order (earlier index).
    if (i > 0) {
      const auto& cand = sel.member_estimates[i];
      const auto& incumbent = sel.member_estimates[best];
      if (cand.value > incumbent.value ||
          (cand.value == incumbent.value && rec.rounds_trained > live[best].rounds_trained))
        best = i;
    }
  }
  EnsembleModel ensemble(sel.members, std::move(members), std::move(weights), config_.scores);
  sel.best_single = live[best].id();
  sel.best_single_estimate = sel.member_estimates[best];
  sel.ensemble_estimate = refine_accuracy_of_ensemble(ensemble, store_, t, config_.cvtt);
  sel.ensemble_chosen = sel.ensemble_estimate.value > sel.best_single_estimate.value;

  if (sel.ensemble_chosen) {
    current_window_ = sel.ensemble_estimate.window_rounds;
    current_ = std::move(ensemble);
  } else {
    current_window_ = sel.best_single_estimate.window_rounds;
    current_ = sel.best_single;
  }
  last_selection_ = std::move(sel);
  return metrics;
}

std::uint64_t Awe::state_digest() const {
  Fnv1a h;
  pool_.digest(h);
  h.add(static_cast<std::uint64_t>(store_.latest()));
  if (const auto* ens = std::get_if<EnsembleModel>(&current_)) {
    h.add(std::uint64_t{1});
    h.add(std::span<const double>(ens->weights()));
  } else {
    const auto& id = std::get<IntervalId>(current_);
    h.add(std::uint64_t{0});
    h.add(static_cast<std::uint64_t>(id.family));
    h.add(static_cast<std::uint64_t>(id.resolution));
    h.add(static_cast<std::uint64_t>(id.k));
  }
  return h.value();
}

}  // namespace shiftlearn
