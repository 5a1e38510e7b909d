#include "shiftlearn/streams.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>

#include <json.hpp>

#include "shiftlearn/format.hpp"
#include "shiftlearn/rng.hpp"

namespace shiftlearn {

void StreamSpec::validate() const {
  if (rounds < 1) throw std::invalid_argument("stream: rounds must be >= 1");
  if (train_per_round < 1) throw std::invalid_argument("stream: n (train points per round) must be >= 1");
  if (holdout_per_round < 1) throw std::invalid_argument("stream: m (holdout points per round) must be >= 1");
  if (num_classes < 1) throw std::invalid_argument("stream: num_classes must be >= 1");
  if (dim < 1) throw std::invalid_argument("stream: dim must be >= 1");
  if (const auto* pw = std::get_if<PiecewiseDrift>(&drift)) {
    for (std::size_t i = 0; i < pw->boundaries.size(); ++i) {
      const auto b = pw->boundaries[i];
      if (b < 1 || b > rounds) throw std::invalid_argument("stream: segment boundary outside [1, T]");
      if (i > 0 && b <= pw->boundaries[i - 1])
        throw std::invalid_argument("stream: segment boundaries must be strictly increasing");
    }
    if (pw->means.size() != pw->boundaries.size() + 1)
      throw std::invalid_argument("stream: need one mean matrix per segment (" +
                                  std::to_string(pw->boundaries.size() + 1) + "), got " +
                                  std::to_string(pw->means.size()));
    for (const auto& m : pw->means)
      if (m.size() != num_classes * dim)
        throw std::invalid_argument("stream: each mean matrix must have K*D = " + std::to_string(num_classes * dim) +
                                    " entries");
    if (!(pw->noise >= 0.0)) throw std::invalid_argument("stream: noise must be >= 0");
  } else {
    const auto& rot = std::get<RotatingDrift>(drift);
    if (dim != 2) throw std::invalid_argument("stream: rotating drift requires dim = 2");
    if (!(rot.noise >= 0.0)) throw std::invalid_argument("stream: noise must be >= 0");
    if (!std::isfinite(rot.angular_velocity) || !std::isfinite(rot.radius))
      throw std::invalid_argument("stream: rotating parameters must be finite");
  }
}

int StreamSpec::distribution_id(std::int64_t t) const {
  if (const auto* pw = std::get_if<PiecewiseDrift>(&drift))
    return static_cast<int>(std::upper_bound(pw->boundaries.begin(), pw->boundaries.end(), t) - pw->boundaries.begin());
  return 0;
}

std::vector<double> StreamSpec::class_mean(std::int64_t t, Label k) const {
  if (const auto* pw = std::get_if<PiecewiseDrift>(&drift)) {
    const auto& m = pw->means[static_cast<std::size_t>(distribution_id(t))];
    return {m.begin() + static_cast<std::ptrdiff_t>(k * dim), m.begin() + static_cast<std::ptrdiff_t>((k + 1) * dim)};
  }
  const auto& rot = std::get<RotatingDrift>(drift);
  const double angle = rot.angular_velocity * static_cast<double>(t) +
                       2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(num_classes);
  return {rot.radius * std::cos(angle), rot.radius * std::sin(angle)};
}

RoundBatch generate_round(const StreamSpec& spec, std::int64_t t) {
  if (t < 1 || t > spec.rounds) throw std::out_of_range("round outside [1, T]");
  const double noise = std::visit([](const auto& d) { return d.noise; }, spec.drift);
  CounterRng labels(spec.seed, RngPurpose::kStreamLabels, static_cast<std::uint64_t>(t));
  CounterRng gauss(spec.seed, RngPurpose::kStreamNoise, static_cast<std::uint64_t>(t));

  std::vector<std::vector<double>> means(spec.num_classes);
  for (Label k = 0; k < spec.num_classes; ++k) means[k] = spec.class_mean(t, k);

  RoundBatch batch;
  batch.t = t;
  batch.distribution_id = spec.distribution_id(t);
  const std::size_t total = spec.train_per_round + spec.holdout_per_round;
  for (std::size_t i = 0; i < total; ++i) {
    LabeledExample ex;
    ex.y = static_cast<Label>(labels.below(spec.num_classes));
    ex.x = means[ex.y];
    for (auto& v : ex.x) v += noise * gauss.normal();
    (i < spec.train_per_round ? batch.train : batch.holdout).push_back(std::move(ex));
  }
  return batch;
}

std::vector<RoundBatch> generate(const StreamSpec& spec) {
  spec.validate();
  std::vector<RoundBatch> out;
  out.reserve(static_cast<std::size_t>(spec.rounds));
  for (std::int64_t t = 1; t <= spec.rounds; ++t) out.push_back(generate_round(spec, t));
  return out;
}

FoldSplit split_folds(std::span<const LabeledExample> points, double p, std::uint64_t seed, std::int64_t t) {
  if (points.size() < 2) throw std::invalid_argument("fold split needs at least 2 points");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("split fraction must lie in (0, 1)");
  const std::size_t n = points.size();
  const auto wanted = static_cast<std::size_t>(std::llround(p * static_cast<double>(n)));
  const std::size_t n_train = std::clamp<std::size_t>(wanted, 1, n - 1);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng rng(seed, RngPurpose::kFoldSplit, static_cast<std::uint64_t>(t));
  rng.shuffle(order);
  std::vector<bool> to_train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) to_train[order[i]] = true;

  FoldSplit split;
  for (std::size_t i = 0; i < n; ++i) (to_train[i] ? split.train : split.holdout).push_back(points[i]);
  return split;
}

StreamFormatError::StreamFormatError(std::size_t line, const std::string& what)
    : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

namespace {

struct RawRound {
  std::vector<LabeledExample> untagged;
  std::vector<LabeledExample> train;
  std::vector<LabeledExample> holdout;
  std::size_t first_line = 0;
};

}  // namespace

std::vector<RoundBatch> load_stream(std::istream& in, const LoadOptions& options) {
  using nlohmann::json;
  std::map<std::int64_t, RawRound> rounds;
  std::optional<std::size_t> dim;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw StreamFormatError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw StreamFormatError(lineno, "record must be a JSON object");
    if (!rec.contains("t") || !rec["t"].is_number_integer()) throw StreamFormatError(lineno, "field 't' must be an integer");
    if (!rec.contains("y") || !rec["y"].is_number_integer()) throw StreamFormatError(lineno, "field 'y' must be an integer");
    if (!rec.contains("x") || !rec["x"].is_array() || rec["x"].empty())
      throw StreamFormatError(lineno, "field 'x' must be a non-empty array of numbers");

    const auto t = rec["t"].get<std::int64_t>();
    if (t < 1) throw StreamFormatError(lineno, "round t must be >= 1");
    const auto y = rec["y"].get<std::int64_t>();
    if (y < 0 || static_cast<std::size_t>(y) >= options.num_classes)
      throw StreamFormatError(lineno, "label y=" + std::to_string(y) + " outside [0, " +
                                          std::to_string(options.num_classes) + ")");
    LabeledExample ex;
    ex.y = static_cast<Label>(y);
    for (const auto& v : rec["x"]) {
      if (!v.is_number()) throw StreamFormatError(lineno, "field 'x' must contain only numbers");
      ex.x.push_back(v.get<double>());
      if (!std::isfinite(ex.x.back())) throw StreamFormatError(lineno, "non-finite feature value");
    }
    if (!dim) dim = ex.x.size();
    if (ex.x.size() != *dim)
      throw StreamFormatError(lineno, "feature dimension " + std::to_string(ex.x.size()) + " differs from " +
                                          std::to_string(*dim));

    auto& raw = rounds[t];
    if (!raw.first_line) raw.first_line = lineno;
    if (rec.contains("fold")) {
      const auto& fold = rec["fold"];
      if (fold == "train") {
        raw.train.push_back(std::move(ex));
      } else if (fold == "holdout") {
        raw.holdout.push_back(std::move(ex));
      } else {
        throw StreamFormatError(lineno, "field 'fold' must be \"train\" or \"holdout\"");
      }
    } else {
      raw.untagged.push_back(std::move(ex));
    }
    if (!raw.untagged.empty() && (!raw.train.empty() || !raw.holdout.empty()))
      throw StreamFormatError(lineno, "round " + std::to_string(t) + " mixes fold-tagged and untagged records");
  }
  if (rounds.empty()) throw StreamFormatError(0, "no rounds");

  std::vector<RoundBatch> out;
  std::int64_t expected = 1;
  for (auto& [t, raw] : rounds) {
    if (t != expected)
      throw StreamFormatError(0, "non-contiguous rounds: expected round " + std::to_string(expected) + ", found " +
                                     std::to_string(t));
    ++expected;
    RoundBatch batch;
    batch.t = t;
    if (!raw.untagged.empty()) {
      if (raw.untagged.size() < 2)
        throw StreamFormatError(raw.first_line, "round " + std::to_string(t) + " needs at least 2 records to split");
      auto split = split_folds(raw.untagged, options.split_fraction, options.seed, t);
      batch.train = std::move(split.train);
      batch.holdout = std::move(split.holdout);
    } else {
      if (raw.train.empty() || raw.holdout.empty())
        throw StreamFormatError(raw.first_line, "round " + std::to_string(t) + " needs both train and holdout records");
      batch.train = std::move(raw.train);
      batch.holdout = std::move(raw.holdout);
    }
    out.push_back(std::move(batch));
  }
  return out;
}

std::vector<RoundBatch> load_stream(const std::filesystem::path& path, const LoadOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open stream file " + path.string());
  return load_stream(in, options);
}

void write_stream_jsonl(std::ostream& out, std::span<const RoundBatch> batches) {
  using nlohmann::json;
  for (const auto& b : batches) {
    for (const auto* fold : {&b.train, &b.holdout}) {
      const char* tag = fold == &b.train ? "train" : "holdout";
      for (const auto& ex : *fold) {
        json rec = {{"t", b.t}, {"x", ex.x}, {"y", ex.y}, {"fold", tag}};
        out << rec.dump() << '\n';
      }
    }
  }
}

void write_stream_csv(std::ostream& out, std::span<const RoundBatch> batches) {
  std::size_t dim = 0;
  for (const auto& b : batches) {
    if (!b.train.empty()) dim = b.train.front().x.size();
    if (dim) break;
  }
  out << "t,fold,y";
  for (std::size_t j = 0; j < dim; ++j) out << ",x" << j;
  out << '\n';
  for (const auto& b : batches) {
    for (const auto* fold : {&b.train, &b.holdout}) {
      const char* tag = fold == &b.train ? "train" : "holdout";
      for (const auto& ex : *fold) {
        out << b.t << ',' << tag << ',' << ex.y;
        for (double v : ex.x) out << ',' << format_exact(v);
        out << '\n';
      }
    }
  }
}

}  // namespace shiftlearn
