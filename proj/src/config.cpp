#include "shiftlearn/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace shiftlearn {

namespace pt = boost::property_tree;

void ExperimentConfig::validate() const {
  if (seeds.empty()) throw ConfigError("experiment: at least one seed is required");
  try {
    if (!stream_file) stream.validate();
    AweConfig a = awe;
    a.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& b : baselines) {
    if (b.kind == BaselineKind::OracleRestart && stream_file)
      throw ConfigError("baseline oracle_restart needs segment ids, which an ingested stream does not have");
    if (b.kind == BaselineKind::SingleResolution && (b.resolution < 1 || b.resolution > awe.horizon.resolutions()))
      throw ConfigError("baseline " + b.name() + ": resolution outside [1, " +
                        std::to_string(awe.horizon.resolutions()) + "]");
  }
}

namespace {

/// Typed access to one INI section that remembers which keys were read.
class Section {
 public:
  Section(const pt::ptree& root, std::string name) : name_(std::move(name)) {
    if (auto child = root.get_child_optional(name_)) tree_ = *child;
  }

  bool has(const std::string& key) {
    used_.insert(key);
    return tree_.find(key) != tree_.not_found();
  }

  std::string text(const std::string& key) {
    if (!has(key)) throw ConfigError("[" + name_ + "] missing required key '" + key + "'");
    return boost::trim_copy(tree_.get<std::string>(key));
  }

  std::string text(const std::string& key, const std::string& fallback) { return has(key) ? text(key) : fallback; }

  double real(const std::string& key, std::optional<double> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      text(key);
    }
    return parse_real(key, text(key));
  }

  std::int64_t integer(const std::string& key, std::optional<std::int64_t> fallback = std::nullopt) {
    if (!has(key)) {
      if (fallback) return *fallback;
      text(key);
    }
    const auto s = text(key);
    try {
      std::size_t pos = 0;
      const auto v = std::stoll(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": expected an integer, got '" + s + "'");
    }
  }

  bool boolean(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const auto s = boost::to_lower_copy(text(key));
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError("[" + name_ + "] " + key + ": expected true or false, got '" + s + "'");
  }

  std::vector<std::string> list(const std::string& key) {
    std::vector<std::string> items;
    const auto s = text(key);
    boost::split(items, s, boost::is_any_of(", \t"), boost::token_compress_on);
    std::erase_if(items, [](const std::string& v) { return v.empty(); });
    return items;
  }

  std::vector<double> reals(const std::string& key) {
    std::vector<double> out;
    for (const auto& item : list(key)) out.push_back(parse_real(key, item));
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : tree_)
      if (!used_.contains(key)) throw ConfigError("[" + name_ + "] unknown key '" + key + "'");
  }

 private:
  double parse_real(const std::string& key, const std::string& s) const {
    try {
      std::size_t pos = 0;
      const double v = std::stod(s, &pos);
      if (pos != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("[" + name_ + "] " + key + ": expected a number, got '" + s + "'");
    }
  }

  std::string name_;
  pt::ptree tree_;
  std::set<std::string> used_;
};

std::size_t positive(std::int64_t v, const std::string& what) {
  if (v < 1) throw ConfigError(what + " must be >= 1");
  return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree root;
  try {
    pt::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config syntax error at line " + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::set<std::string> known = {"stream", "learner", "awe", "experiment"};
  for (const auto& [name, child] : root) {
    if (!known.contains(name)) throw ConfigError("unknown section [" + name + "]");
    if (child.empty()) throw ConfigError("key '" + name + "' must live inside a section");
  }

  ExperimentConfig cfg;

  Section exp(root, "experiment");
  if (exp.has("seeds")) {
    cfg.seeds.clear();
    for (const auto& s : exp.list("seeds")) {
      try {
        std::size_t pos = 0;
        if (s.empty() || s.front() == '-' || s.front() == '+') throw std::invalid_argument(s);
        cfg.seeds.push_back(std::stoull(s, &pos));
        if (pos != s.size()) throw std::invalid_argument(s);
      } catch (const std::exception&) {
        throw ConfigError("[experiment] seeds: expected non-negative integers, got '" + s + "'");
      }
    }
  }
  if (exp.has("baselines"))
    for (const auto& b : exp.list("baselines")) {
      try {
        cfg.baselines.push_back(parse_baseline(b));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("[experiment] baselines: ") + e.what());
      }
    }
  cfg.output_dir = exp.text("output_dir", "");
  cfg.emit_svg = exp.boolean("svg", true);
  if (exp.has("stream_file")) cfg.stream_file = exp.text("stream_file");
  exp.reject_unknown();

  Section stream(root, "stream");
  auto& s = cfg.stream;
  s.num_classes = positive(stream.integer("classes"), "[stream] classes");
  s.dim = positive(stream.integer("dim", 2), "[stream] dim");
  if (cfg.stream_file) {
    // Shape comes from the file; only rounds is needed to size the schedule.
    s.rounds = stream.integer("rounds", 0);
  } else {
    s.rounds = stream.integer("rounds");
    s.train_per_round = positive(stream.integer("train_per_round"), "[stream] train_per_round");
    s.holdout_per_round = positive(stream.integer("holdout_per_round"), "[stream] holdout_per_round");
    const auto drift = stream.text("drift");
    if (drift == "piecewise") {
      PiecewiseDrift pw;
      if (stream.has("boundaries"))
        for (const auto& b : stream.list("boundaries")) {
          try {
            pw.boundaries.push_back(std::stoll(b));
          } catch (const std::exception&) {
            throw ConfigError("[stream] boundaries: expected integers, got '" + b + "'");
          }
        }
      for (std::size_t seg = 0; seg <= pw.boundaries.size(); ++seg)
        pw.means.push_back(stream.reals("means_" + std::to_string(seg)));
      pw.noise = stream.real("noise", 1.0);
      s.drift = std::move(pw);
    } else if (drift == "rotating") {
      RotatingDrift rot;
      rot.angular_velocity = stream.real("angular_velocity");
      rot.radius = stream.real("radius", 1.0);
      rot.noise = stream.real("noise", 1.0);
      s.drift = rot;
    } else {
      throw ConfigError("[stream] drift: expected piecewise or rotating, got '" + drift + "'");
    }
  }
  stream.reject_unknown();

  Section learner(root, "learner");
  auto& l = cfg.awe.learner;
  try {
    l.kind = parse_learner_kind(learner.text("kind", "logistic_sgd"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("[learner] kind: ") + e.what());
  }
  l.learning_rate = learner.real("learning_rate", 0.1);
  l.epochs = static_cast<int>(learner.integer("epochs", 5));
  l.weight_scale = learner.real("weight_scale", 0.0);
  l.num_classes = s.num_classes;
  l.dim = s.dim;
  learner.reject_unknown();

  Section awe(root, "awe");
  auto& a = cfg.awe;
  a.cvtt.delta = awe.real("delta", 0.1);
  a.cvtt.slack = awe.real("slack", 1.0);
  a.split_fraction = awe.has("split_fraction")
                         ? awe.real("split_fraction")
                         : static_cast<double>(s.train_per_round) /
                               static_cast<double>(s.train_per_round + s.holdout_per_round);
  const auto scores = awe.text("scores", "raw");
  if (scores == "raw") {
    a.scores = EnsembleScores::Raw;
  } else if (scores == "softmax") {
    a.scores = EnsembleScores::Softmax;
  } else {
    throw ConfigError("[awe] scores: expected raw or softmax, got '" + scores + "'");
  }
  a.floor_weights = awe.boolean("floor_weights", false);
  if (awe.has("holdout_retention"))
    a.holdout_retention = positive(awe.integer("holdout_retention"), "[awe] holdout_retention");
  awe.reject_unknown();

  if (s.rounds >= 2) a.horizon = Horizon(s.rounds);
  else if (!cfg.stream_file) throw ConfigError("[stream] rounds must be >= 2");
  a.cvtt.horizon = a.horizon.rounds();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found: " + path.string());
  return parse_config(in);
}

StreamSpec reference_stream(std::uint64_t seed) {
  StreamSpec s;
  s.rounds = 64;
  s.train_per_round = 100;
  s.holdout_per_round = 50;
  s.num_classes = 4;
  s.dim = 2;
  s.seed = seed;
  const double corners[4][2] = {{2, 2}, {-2, 2}, {-2, -2}, {2, -2}};
  // Class k sits at corner perm[s][k] in segment s.
  const int perm[4][4] = {{0, 1, 2, 3}, {1, 2, 3, 0}, {2, 3, 0, 1}, {3, 0, 1, 2}};
  PiecewiseDrift pw;
  pw.boundaries = {17, 33, 49};
  pw.noise = 0.7;
  for (const auto& row : perm) {
    std::vector<double> m;
    for (int k = 0; k < 4; ++k) m.insert(m.end(), {corners[row[k]][0], corners[row[k]][1]});
    pw.means.push_back(std::move(m));
  }
  s.drift = std::move(pw);
  return s;
}

ExperimentConfig reference_experiment() {
  ExperimentConfig cfg;
  cfg.stream = reference_stream();
  cfg.awe.horizon = Horizon(cfg.stream.rounds);
  cfg.awe.learner.kind = LearnerKind::LogisticSgd;
  cfg.awe.learner.num_classes = cfg.stream.num_classes;
  cfg.awe.learner.dim = cfg.stream.dim;
  cfg.awe.learner.learning_rate = 0.005;
  cfg.awe.learner.epochs = 3;
  cfg.awe.cvtt = {0.1, cfg.stream.rounds, 0.1};
  cfg.awe.split_fraction = 100.0 / 150.0;
  cfg.baselines = {{BaselineKind::BaseOl}, {BaselineKind::OracleRestart}};
  cfg.seeds = {1, 2, 3, 4, 5};
  return cfg;
}

}  // namespace shiftlearn
