#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "edm/edm.hpp"

namespace edm {

// Raised for anything wrong with the run configuration itself. The message is
// anchored to where the value came from ("run.json:4: ..." or "--alpha: ...").
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

/// Process exit code for a library error: 2 for configuration problems,
/// 3 for data problems.
inline int exit_code_for(const Error& e) {
  static const std::set<std::string> config_kinds{"ConfigError", "InvalidSpec", "InvalidParam"};
  return config_kinds.contains(e.kind()) ? 2 : 3;
}

struct RunConfig {
  std::optional<std::string> train_path;
  std::optional<std::string> test_path;
  std::optional<SyntheticParams> synthetic;

  std::optional<CostSpec> cost;   // explicit cost setting
  std::optional<double> alpha;    // linear delay scale; overrides cost's delay

  std::string classifier = "knn";
  KnnConfig knn;
  LogisticConfig logistic;

  std::string trigger = "economy-gamma";
  std::optional<double> theta;  // threshold: fixed value, skip fitting
  std::size_t bins = 5;         // economy-gamma K
  double quantile = 0.95;       // teaser
  std::size_t max_v = 5;        // teaser
  double lambda = 1.0;          // calimera

  std::size_t timestamps = 20;
  std::size_t folds = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::optional<std::string> output;
  bool normalize = true;
  bool outcomes = true;

  ClassifierConfig classifier_config() const {
    if (classifier == "logistic") return logistic;
    return knn;
  }

  TriggerConfig trigger_config() const {
    auto cfg = *trigger_config_for(trigger);
    if (auto* t = std::get_if<ThresholdConfig>(&cfg)) t->theta = theta;
    if (auto* e = std::get_if<EconomyGammaConfig>(&cfg)) e->bins = bins;
    if (auto* t = std::get_if<TeaserConfig>(&cfg)) {
      t->quantile = quantile;
      t->max_v = max_v;
    }
    if (auto* c = std::get_if<CalimeraConfig>(&cfg)) c->lambda = lambda;
    return cfg;
  }
};

namespace detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] != b[j - 1])});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::string closest(const std::string& key, const std::vector<std::string>& known) {
  std::string best;
  std::size_t best_d = 3;  // suggest only near misses
  for (const auto& k : known) {
    const auto d = edit_distance(key, k);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

/// 1-based line of the first `"key"` occurrence in the text, 0 if absent.
inline std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + pos, '\n'));
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Tracks where each top-level key came from, for anchored messages.
struct ConfigSource {
  std::string file_name;
  std::string file_text;
  std::set<std::string> from_flags;

  std::string anchor(const std::string& key) const {
    if (from_flags.contains(key)) return "--" + key;
    const auto line = line_of_key(file_text, key);
    if (line > 0) return file_name + ":" + std::to_string(line);
    return file_name.empty() ? "config" : file_name;
  }
};

}  // namespace detail

inline const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys{
      "train",   "test",     "synthetic",      "cost",   "alpha", "classifier",
      "knn",     "logistic", "trigger",        "theta",  "bins",  "quantile",
      "max_v",   "lambda",   "timestamps",     "folds",  "seed",  "jobs",
      "output",  "normalize", "outcomes"};
  return keys;
}

/// Builds a RunConfig from an optional JSON config file and flag overrides
/// (a JSON object with the same keys). Flags win over the file; unknown keys
/// are rejected with a suggestion.
inline RunConfig parse_config(const std::string& file_text, const std::string& file_name,
                              const nlohmann::json& flags = nlohmann::json::object()) {
  detail::ConfigSource src{file_name, file_text, {}};
  nlohmann::json merged = nlohmann::json::object();
  if (!file_text.empty()) {
    try {
      merged = nlohmann::json::parse(file_text);
    } catch (const nlohmann::json::parse_error& e) {
      // byte offset -> line
      const auto off = std::min<std::size_t>(e.byte, file_text.size());
      const auto line = 1 + std::count(file_text.begin(), file_text.begin() + off, '\n');
      throw ConfigError(file_name + ":" + std::to_string(line) + ": invalid JSON (" + e.what() + ")");
    }
    if (!merged.is_object()) throw ConfigError(file_name + ":1: config must be a JSON object");
  }
  for (const auto& [key, value] : flags.items()) {
    merged[key] = value;
    src.from_flags.insert(key);
  }

  const auto& known = config_keys();
  for (const auto& [key, _] : merged.items()) {
    if (std::find(known.begin(), known.end(), key) != known.end()) continue;
    std::string msg = src.anchor(key) + ": unknown key \"" + key + "\"";
    if (auto s = detail::closest(key, known); !s.empty()) msg += " (did you mean \"" + s + "\"?)";
    throw ConfigError(msg);
  }

  RunConfig cfg;
  std::string current;
  auto get = [&](const char* key, auto& out) {
    if (!merged.contains(key)) return;
    current = key;
    out = merged.at(key).get<std::decay_t<decltype(out)>>();
  };
  try {
    std::string s;
    if (merged.contains("train")) { get("train", s); cfg.train_path = s; }
    if (merged.contains("test")) { get("test", s); cfg.test_path = s; }
    if (merged.contains("synthetic")) {
      current = "synthetic";
      const auto& j = merged.at("synthetic");
      if (j.is_boolean()) {
        if (j.get<bool>()) cfg.synthetic = SyntheticParams{};
      } else {
        SyntheticParams p;
        for (const auto& [k, v] : j.items()) {
          if (k == "n_per_class") p.n_per_class = v.get<std::size_t>();
          else if (k == "length") p.length = v.get<std::size_t>();
          else if (k == "t_star") p.t_star = v.get<std::size_t>();
          else if (k == "gap") p.gap = v.get<double>();
          else if (k == "noise_sd") p.noise_sd = v.get<double>();
          else throw ConfigError(src.anchor("synthetic") + ": unknown synthetic key \"" + k + "\"");
        }
        cfg.synthetic = p;
      }
    }
    if (merged.contains("cost")) {
      current = "cost";
      try {
        cfg.cost = cost_spec_from_json(merged.at("cost"));
      } catch (const InvalidSpec& e) {
        throw ConfigError(src.anchor("cost") + ": " + e.what());
      }
    }
    if (merged.contains("alpha")) {
      double a = 0;
      get("alpha", a);
      if (!(a >= 0.0)) throw ConfigError(src.anchor("alpha") + ": alpha must be >= 0");
      cfg.alpha = a;
    }
    get("classifier", cfg.classifier);
    if (cfg.classifier != "knn" && cfg.classifier != "logistic")
      throw ConfigError(src.anchor("classifier") + ": classifier must be \"knn\" or \"logistic\"");
    if (merged.contains("knn")) {
      current = "knn";
      for (const auto& [k, v] : merged.at("knn").items()) {
        if (k == "k") cfg.knn.k = v.get<std::size_t>();
        else if (k == "weighting") {
          const auto w = v.get<std::string>();
          if (w == "uniform") cfg.knn.weighting = KnnWeighting::uniform;
          else if (w == "inverse-distance") cfg.knn.weighting = KnnWeighting::inverse_distance;
          else throw ConfigError(src.anchor("knn") + ": weighting must be \"uniform\" or \"inverse-distance\"");
        } else if (k == "normalize_prefix") cfg.knn.normalize_prefix = v.get<bool>();
        else throw ConfigError(src.anchor("knn") + ": unknown knn key \"" + k + "\"");
      }
    }
    if (merged.contains("logistic")) {
      current = "logistic";
      for (const auto& [k, v] : merged.at("logistic").items()) {
        if (k == "features") {
          const auto f = v.get<std::string>();
          if (f == "summary") cfg.logistic.features = LogisticFeatures::summary;
          else if (f == "raw-prefix") cfg.logistic.features = LogisticFeatures::raw_prefix;
          else throw ConfigError(src.anchor("logistic") + ": features must be \"summary\" or \"raw-prefix\"");
        } else if (k == "l2") cfg.logistic.l2 = v.get<double>();
        else if (k == "max_iters") cfg.logistic.max_iters = v.get<std::size_t>();
        else if (k == "learning_rate") cfg.logistic.learning_rate = v.get<double>();
        else if (k == "lr_decay") cfg.logistic.lr_decay = v.get<double>();
        else throw ConfigError(src.anchor("logistic") + ": unknown logistic key \"" + k + "\"");
      }
    }
    get("trigger", cfg.trigger);
    if (!trigger_config_for(cfg.trigger)) {
      std::string msg = src.anchor("trigger") + ": unknown trigger \"" + cfg.trigger + "\"";
      if (auto s = detail::closest(cfg.trigger, trigger_names()); !s.empty())
        msg += " (did you mean \"" + s + "\"?)";
      throw ConfigError(msg);
    }
    if (merged.contains("theta")) {
      double t = 0;
      get("theta", t);
      cfg.theta = t;
    }
    get("bins", cfg.bins);
    get("quantile", cfg.quantile);
    get("max_v", cfg.max_v);
    get("lambda", cfg.lambda);
    get("timestamps", cfg.timestamps);
    get("folds", cfg.folds);
    get("seed", cfg.seed);
    get("jobs", cfg.jobs);
    if (merged.contains("output")) { get("output", s); cfg.output = s; }
    get("normalize", cfg.normalize);
    get("outcomes", cfg.outcomes);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(src.anchor(current) + ": bad value for \"" + current + "\" (" + e.what() + ")");
  }

  if (cfg.jobs < 1) throw ConfigError(src.anchor("jobs") + ": jobs must be >= 1");
  if (cfg.timestamps < 1) throw ConfigError(src.anchor("timestamps") + ": timestamps must be >= 1");
  if (cfg.folds < 2) throw ConfigError(src.anchor("folds") + ": folds must be >= 2");
  if (!cfg.synthetic && !cfg.train_path)
    throw ConfigError("config: need \"train\" (and \"test\") paths or \"synthetic\"");
  if (!cfg.synthetic && !cfg.test_path) throw ConfigError("config: \"test\" path missing");
  return cfg;
}

/// Everything that determines results, i.e. the config without jobs/output.
inline nlohmann::json config_to_json(const RunConfig& c) {
  nlohmann::json j;
  if (c.train_path) j["train"] = *c.train_path;
  if (c.test_path) j["test"] = *c.test_path;
  if (c.synthetic)
    j["synthetic"] = {{"n_per_class", c.synthetic->n_per_class}, {"length", c.synthetic->length},
                      {"t_star", c.synthetic->t_star}, {"gap", c.synthetic->gap},
                      {"noise_sd", c.synthetic->noise_sd}};
  if (c.cost) j["cost"] = cost_spec_to_json(*c.cost);
  if (c.alpha) j["alpha"] = *c.alpha;
  j["classifier"] = c.classifier;
  if (c.classifier == "knn")
    j["knn"] = {{"k", c.knn.k},
                {"weighting", c.knn.weighting == KnnWeighting::uniform ? "uniform" : "inverse-distance"},
                {"normalize_prefix", c.knn.normalize_prefix}};
  else
    j["logistic"] = {{"features", c.logistic.features == LogisticFeatures::summary ? "summary" : "raw-prefix"},
                     {"l2", c.logistic.l2}, {"max_iters", c.logistic.max_iters},
                     {"learning_rate", c.logistic.learning_rate}, {"lr_decay", c.logistic.lr_decay}};
  j["trigger"] = c.trigger;
  if (c.theta) j["theta"] = *c.theta;
  j["bins"] = c.bins;
  j["quantile"] = c.quantile;
  j["max_v"] = c.max_v;
  j["lambda"] = c.lambda;
  j["timestamps"] = c.timestamps;
  j["folds"] = c.folds;
  j["seed"] = c.seed;
  j["normalize"] = c.normalize;
  j["outcomes"] = c.outcomes;
  return j;
}

inline std::string config_digest(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(detail::fnv1a64(canonical_json(config_to_json(c)))));
  return buf;
}

struct DataPair {
  TimeSeriesDataset train;
  TimeSeriesDataset test;
};

/// Train and test sets drawn from seed-derived streams split(1), split(2).
inline DataPair synthetic_pair(const SyntheticParams& p, std::uint64_t seed) {
  const SplitMix64 root(seed);
  DataPair d{make_synthetic(p, root.split(1).next()), make_synthetic(p, root.split(2).next())};
  d.train.name = "synthetic_TRAIN";
  d.test.name = "synthetic_TEST";
  return d;
}

inline DataPair load_data(const RunConfig& c) {
  DataPair d;
  if (c.synthetic) {
    d = synthetic_pair(*c.synthetic, c.seed);
  } else {
    d.train = load_ucr_tsv(*c.train_path);
    d.test = align_labels(load_ucr_tsv(*c.test_path), d.train.label_map);
    if (d.test.length() != d.train.length())
      throw LengthMismatch("train series length " + std::to_string(d.train.length()) +
                           " vs test " + std::to_string(d.test.length()));
  }
  if (c.normalize) {
    d.train = z_normalize(std::move(d.train));
    d.test = z_normalize(std::move(d.test));
  }
  return d;
}

/// The cost setting for a run: the explicit spec (delay replaced when alpha
/// is given) or symmetric 0/1 costs with linear delay alpha (default 1) over
/// default_timestamps(L, count).
inline CostMatrices make_cost(const RunConfig& c, const TimeSeriesDataset& train) {
  CostSpec spec;
  if (c.cost) {
    spec = *c.cost;
    if (c.alpha) spec.delay = LinearDelay{*c.alpha};
    if (spec.max_t() != train.length())
      throw TimestampMismatch("cost max_T " + std::to_string(spec.max_t()) +
                              " vs series length " + std::to_string(train.length()));
  } else {
    spec = symmetric_linear_spec(train.n_classes(), default_timestamps(train.length(), c.timestamps),
                                 c.alpha.value_or(1.0));
  }
  return build_cost_matrices(std::move(spec));
}

/// Stamps the run metadata onto a scored report.
inline void finish_report(EvaluationReport& r, const RunConfig& c) {
  r.seed = c.seed;
  r.config_digest = config_digest(c);
  r.jobs = c.jobs;
  if (!c.outcomes) r.outcomes.reset();
}

struct BenchResult {
  EvaluationReport report;
  EarlyClassifierPipeline pipeline;
};

inline EarlyClassifierPipeline fit_from_config(const RunConfig& c, const TimeSeriesDataset& train) {
  PipelineOptions opts;
  opts.folds = c.folds;
  opts.seed = c.seed;
  opts.jobs = c.jobs;
  return fit_pipeline(train, make_cost(c, train), c.classifier_config(), c.trigger_config(), opts);
}

inline BenchResult run_bench(const RunConfig& c) {
  const auto data = load_data(c);
  auto pipeline = fit_from_config(c, data.train);
  auto report = score(pipeline, data.test, c.jobs);
  report.dataset = data.train.name;
  finish_report(report, c);
  return {std::move(report), std::move(pipeline)};
}

struct SweepRow {
  std::string trigger;
  double alpha = 0.0;
  std::string status = "ok";
  std::optional<EvaluationReport> report;
};

inline std::string format_alpha(double a) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", a);
  return buf;
}

/// Every (trigger, alpha) combination. The calibration cube and the
/// collection do not depend on the cost setting, so both are built once and
/// shared; combinations then run concurrently. Rows come back sorted by
/// (trigger, alpha); a failing combination is recorded, not fatal.
inline std::vector<SweepRow> run_sweep(const RunConfig& base, std::vector<std::string> triggers,
                                       std::vector<double> alphas) {
  if (triggers.empty() || alphas.empty()) throw ConfigError("sweep needs triggers and alphas");
  for (const auto& t : triggers)
    if (!trigger_config_for(t)) throw ConfigError("--triggers: unknown trigger \"" + t + "\"");
  for (double a : alphas)
    if (!(a >= 0.0)) throw ConfigError("--alphas: alpha must be >= 0");
  std::sort(triggers.begin(), triggers.end());
  triggers.erase(std::unique(triggers.begin(), triggers.end()), triggers.end());
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());

  const auto data = load_data(base);
  const auto ts = make_cost(base, data.train).timestamps();
  const auto trainer = make_trainer(base.classifier_config());
  const auto cube = out_of_fold_cube(data.train, ts, trainer, base.folds, base.seed, base.jobs);
  const auto coll = fit_collection(data.train, ts, trainer, base.classifier, base.jobs);

  std::vector<SweepRow> rows;
  for (const auto& t : triggers)
    for (double a : alphas) rows.push_back({t, a, "ok", std::nullopt});

  parallel_for(rows.size(), base.jobs, [&](std::size_t r) {
    auto& row = rows[r];
    RunConfig c = base;
    c.trigger = row.trigger;
    c.alpha = row.alpha;
    try {
      const auto cost = make_cost(c, data.train);
      PipelineOptions opts;
      opts.prefit_collection = coll;
      opts.calibration_cube = cube;
      const auto p = fit_pipeline(data.train, cost, trainer, c.classifier, c.trigger_config(), opts);
      auto rep = score(p, data.test, 1);
      rep.dataset = data.train.name;
      finish_report(rep, c);
      row.report = std::move(rep);
    } catch (const Error& e) {
      row.status = std::string("error: ") + e.what();
    }
  });
  return rows;
}

inline std::string sweep_index_csv(const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << "trigger,alpha,avg_cost,accuracy,earliness,status\n";
  for (const auto& r : rows) {
    out << r.trigger << ',' << format_alpha(r.alpha) << ',';
    if (r.report)
      out << format_alpha(r.report->avg_cost) << ',' << format_alpha(r.report->accuracy) << ','
          << format_alpha(r.report->earliness);
    else
      out << ",,";
    std::string status = r.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    out << ',' << status << '\n';
  }
  return out.str();
}

inline std::string sweep_report_name(const SweepRow& r) {
  return r.trigger + "_alpha" + format_alpha(r.alpha) + ".json";
}

/// Writes `<prefix>_TRAIN.tsv` and `<prefix>_TEST.tsv`; returns both paths.
inline std::pair<std::filesystem::path, std::filesystem::path> run_synth(
    const SyntheticParams& p, std::uint64_t seed, const std::string& prefix) {
  const auto data = synthetic_pair(p, seed);
  std::pair<std::filesystem::path, std::filesystem::path> paths{prefix + "_TRAIN.tsv",
                                                                prefix + "_TEST.tsv"};
  save_ucr_tsv(paths.first, data.train);
  save_ucr_tsv(paths.second, data.test);
  return paths;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace edm
