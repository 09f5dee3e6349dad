// edm: benchmark harness for early classification pipelines.
//
//   edm bench --train A_TRAIN.tsv --test A_TEST.tsv --trigger teaser --alpha 0.5
//   edm sweep --config run.json --triggers threshold,ecec --alphas 0,0.5,1 --output out/
//   edm synth --seed 7 --output data/synth
//   edm dump-trigger --pipeline model.edmp
//
// Exit codes: 0 success, 2 configuration error, 3 data error.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "edm/harness.hpp"

namespace {

struct RunFlags {
  std::string config;
  std::string train, test, trigger, classifier, output;
  double alpha = 0, theta = 0;
  std::size_t timestamps = 0, folds = 0, jobs = 0;
  std::uint64_t seed = 0;
  bool no_normalize = false;
  bool synthetic = false;

  CLI::Option* o_train = nullptr;
  CLI::Option* o_test = nullptr;
  CLI::Option* o_trigger = nullptr;
  CLI::Option* o_classifier = nullptr;
  CLI::Option* o_output = nullptr;
  CLI::Option* o_alpha = nullptr;
  CLI::Option* o_theta = nullptr;
  CLI::Option* o_timestamps = nullptr;
  CLI::Option* o_folds = nullptr;
  CLI::Option* o_jobs = nullptr;
  CLI::Option* o_seed = nullptr;

  void attach(CLI::App& app, bool with_theta) {
    app.add_option("--config", config, "JSON run configuration");
    o_train = app.add_option("--train", train, "UCR TSV training file");
    o_test = app.add_option("--test", test, "UCR TSV test file");
    app.add_flag("--synthetic", synthetic, "use the synthetic step dataset");
    o_trigger = app.add_option("--trigger", trigger, "trigger model");
    o_classifier = app.add_option("--classifier", classifier, "knn | logistic");
    o_alpha = app.add_option("--alpha", alpha, "linear delay cost scale");
    if (with_theta) o_theta = app.add_option("--theta", theta, "fixed threshold (skips fitting)");
    o_timestamps = app.add_option("--timestamps", timestamps, "number of monitored timestamps");
    o_folds = app.add_option("--folds", folds, "calibration folds");
    o_seed = app.add_option("--seed", seed, "random seed");
    o_jobs = app.add_option("--jobs", jobs, "worker threads")->envname("EDM_JOBS");
    o_output = app.add_option("--output", output, "output path");
    app.add_flag("--no-normalize", no_normalize, "skip per-series z-normalization");
  }

  nlohmann::json overrides() const {
    nlohmann::json j = nlohmann::json::object();
    if (*o_train) j["train"] = train;
    if (*o_test) j["test"] = test;
    if (synthetic) j["synthetic"] = true;
    if (*o_trigger) j["trigger"] = trigger;
    if (*o_classifier) j["classifier"] = classifier;
    if (*o_alpha) j["alpha"] = alpha;
    if (o_theta && *o_theta) j["theta"] = theta;
    if (*o_timestamps) j["timestamps"] = timestamps;
    if (*o_folds) j["folds"] = folds;
    if (*o_seed) j["seed"] = seed;
    if (*o_jobs) j["jobs"] = jobs;
    if (*o_output) j["output"] = output;
    if (no_normalize) j["normalize"] = false;
    return j;
  }

  edm::RunConfig parse() const {
    std::string text;
    if (!config.empty()) {
      try {
        text = edm::read_text(config);
      } catch (const edm::IoError& e) {
        throw edm::ConfigError(e.what());
      }
    }
    return edm::parse_config(text, config, overrides());
  }
};

void emit(const std::optional<std::string>& path, const std::string& text) {
  if (path) {
    edm::write_text(*path, text);
  } else {
    std::cout << text;
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto pos = s.find(',', start);
    auto item = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    if (!item.empty()) out.push_back(item);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Early classification benchmark harness"};
  app.require_subcommand(1);

  RunFlags bench_flags;
  std::string save_pipeline;
  auto* bench = app.add_subcommand("bench", "fit on train, score on test, write a report");
  bench_flags.attach(*bench, true);
  bench->add_option("--save-pipeline", save_pipeline, "write the fitted pipeline blob here");

  RunFlags sweep_flags;
  std::string triggers_arg, alphas_arg;
  auto* sweep = app.add_subcommand("sweep", "run every (trigger, alpha) pair");
  sweep_flags.attach(*sweep, false);
  sweep->add_option("--triggers", triggers_arg, "comma-separated trigger names")->required();
  sweep->add_option("--alphas", alphas_arg, "comma-separated alpha values")->required();

  edm::SyntheticParams synth_params;
  std::uint64_t synth_seed = 0;
  std::string synth_prefix;
  auto* synth = app.add_subcommand("synth", "write a synthetic TRAIN/TEST TSV pair");
  synth->add_option("--n-per-class", synth_params.n_per_class);
  synth->add_option("--length", synth_params.length);
  synth->add_option("--t-star", synth_params.t_star);
  synth->add_option("--gap", synth_params.gap);
  synth->add_option("--noise-sd", synth_params.noise_sd);
  synth->add_option("--seed", synth_seed);
  synth->add_option("--output", synth_prefix, "path prefix for _TRAIN.tsv/_TEST.tsv")->required();

  RunFlags dump_flags;
  std::string pipeline_path;
  auto* dump = app.add_subcommand("dump-trigger", "print a fitted trigger as JSON");
  dump_flags.attach(*dump, true);
  dump->add_option("--pipeline", pipeline_path, "saved pipeline blob (skips fitting)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*bench) {
      const auto cfg = bench_flags.parse();
      const auto result = edm::run_bench(cfg);
      emit(cfg.output, edm::serialize_report(result.report));
      if (!save_pipeline.empty())
        edm::write_text(save_pipeline, edm::serialize_pipeline(result.pipeline));
    } else if (*sweep) {
      const auto cfg = sweep_flags.parse();
      if (!cfg.output) throw edm::ConfigError("--output: sweep needs an output directory");
      std::vector<double> alphas;
      for (const auto& a : split_list(alphas_arg)) {
        try {
          std::size_t used = 0;
          alphas.push_back(std::stod(a, &used));
          if (used != a.size()) throw std::invalid_argument(a);
        } catch (const std::exception&) {
          throw edm::ConfigError("--alphas: \"" + a + "\" is not a number");
        }
      }
      const auto rows = edm::run_sweep(cfg, split_list(triggers_arg), alphas);
      const std::filesystem::path dir = *cfg.output;
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) throw edm::IoError("cannot create " + dir.string() + ": " + ec.message());
      for (const auto& r : rows)
        if (r.report) edm::write_text(dir / edm::sweep_report_name(r), edm::serialize_report(*r.report));
      edm::write_text(dir / "index.csv", edm::sweep_index_csv(rows));
      std::size_t failed = 0;
      for (const auto& r : rows) failed += r.report ? 0 : 1;
      if (failed) std::cerr << failed << " of " << rows.size() << " combinations failed, see index.csv\n";
    } else if (*synth) {
      const auto [train, test] = edm::run_synth(synth_params, synth_seed, synth_prefix);
      std::cout << train.string() << '\n' << test.string() << '\n';
    } else if (*dump) {
      std::optional<edm::Trigger> trigger;
      std::optional<std::string> output;
      if (!pipeline_path.empty()) {
        trigger = edm::deserialize_pipeline(edm::read_text(pipeline_path)).trigger;
        if (!dump_flags.output.empty()) output = dump_flags.output;
      } else {
        const auto cfg = dump_flags.parse();
        trigger = edm::fit_from_config(cfg, edm::load_data(cfg).train).trigger;
        output = cfg.output;
      }
      emit(output, edm::canonical_json(edm::trigger_to_json(*trigger)));
    }
  } catch (const edm::Error& e) {
    std::cerr << "edm: " << e.what() << '\n';
    return edm::exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "edm: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
