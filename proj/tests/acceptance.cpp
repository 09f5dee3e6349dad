// Acceptance runner: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "edm/harness.hpp"
#include "oracles.hpp"

using namespace edm;
using namespace edm::testing;

namespace {

// Collects failure notes for one criterion.
struct Check {
  std::vector<std::string> notes;
  void expect(bool ok, const std::string& what) {
    if (!ok) notes.push_back(what);
  }
};

struct AlwaysFire {
  bool should_trigger(const PosteriorHistory&) const { return true; }
};
struct NeverFire {
  bool should_trigger(const PosteriorHistory&) const { return false; }
};

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

// 1. avg_cost = (1 - accuracy) + alpha * earliness on every run.
void cost_identity(Check& c) {
  const std::vector<double> alphas{0.0, 0.25, 0.5, 1.0, 2.0};
  auto check_rows = [&](const std::vector<SweepRow>& rows, const std::string& where) {
    for (const auto& r : rows) {
      if (!r.report) {
        c.expect(false, where + " " + r.trigger + ": " + r.status);
        continue;
      }
      const auto& rep = *r.report;
      const double gap = std::abs(rep.avg_cost - ((1.0 - rep.accuracy) + r.alpha * rep.earliness));
      c.expect(gap <= 1e-9, where + " " + r.trigger + " alpha " + fmt(r.alpha) + " off by " + fmt(gap));
    }
  };
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    RunConfig base;
    base.synthetic = small_synthetic();
    base.timestamps = 10;
    base.seed = seed;
    for (const char* cls : {"knn", "logistic"}) {
      base.classifier = cls;
      check_rows(run_sweep(base, trigger_names(), alphas),
                 "synthetic seed " + std::to_string(seed) + " " + cls);
    }
  }
  RunConfig gp;
  gp.train_path = std::string(EDM_TEST_DATA) + "/GunPoint_TRAIN.tsv";
  gp.test_path = std::string(EDM_TEST_DATA) + "/GunPoint_TEST.tsv";
  gp.timestamps = 20;
  check_rows(run_sweep(gp, trigger_names(), alphas), "GunPoint");
}

// 2. On posteriors where deciding early is always wrong and waiting is free,
// every fitted model waits to the end.
void forced_decisions(Check& c) {
  const std::size_t n = 8, m = 4;
  ProbabilityCube cube(n, m, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t y = i % 2;
    cube.labels[i] = y;
    for (std::size_t k = 0; k + 1 < m; ++k) {
      cube.at(i, k)[1 - y] = 0.9;
      cube.at(i, k)[y] = 0.1;
    }
    cube.at(i, m - 1)[y] = 1.0;
  }
  const std::vector<std::size_t> ts{1, 2, 3, 4};
  const auto cost = linear_cost(2, ts, 0.0);
  const auto coll = replay_collection(cube, ts);
  const auto test = replay_dataset(cube, 4);
  for (const auto& name : trigger_names()) {
    const auto trigger = fit_trigger(*trigger_config_for(name), cube, cost);
    const auto r = score(coll, trigger, cost, test);
    bool all_forced = true;
    for (const auto& o : *r.outcomes) all_forced = all_forced && o.forced;
    c.expect(r.earliness == 1.0, name + " earliness " + fmt(r.earliness));
    c.expect(all_forced, name + " has a voluntary decision");
  }
}

// 3. Fitted grid parameters attain the enumerated minimum.
void grid_optimality(Check& c) {
  SplitMix64 rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t n = 1 + rng.below(8), m = 1 + rng.below(4), k = 2 + rng.below(2);
    auto cube = random_cube(rng, n, m, k);
    std::vector<std::size_t> ts;
    for (std::size_t j = 1; j <= m; ++j) ts.push_back(j * 3);
    const auto cost = linear_cost(k, ts, 0.1 + rng.uniform());
    const std::string tag = "trial " + std::to_string(trial) + " ";

    auto min_over = [&](const auto& candidates, auto decide) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& x : candidates) best = std::min(best, oracle::mean_cost(cube, cost, decide(x)));
      return best;
    };

    const auto grid = oracle::percent_grid();
    const auto th = fit_threshold(cube, cost);
    c.expect(oracle::mean_cost(cube, cost, oracle::threshold(cube, th.theta)) ==
                 min_over(grid, [&](double t) { return oracle::threshold(cube, t); }),
             tag + "threshold");

    std::vector<std::array<double, 3>> gammas;
    for (int a = 0; a <= 20; ++a)
      for (int b = 0; b <= 20; ++b)
        for (int d = 0; d <= 20; ++d) gammas.push_back({(a - 10) / 10.0, (b - 10) / 10.0, (d - 10) / 10.0});
    const auto sr = fit_stopping_rule(cube, cost);
    c.expect(oracle::mean_cost(cube, cost, oracle::stopping_rule(cube, cost, sr.gamma)) ==
                 min_over(gammas, [&](const auto& g) { return oracle::stopping_rule(cube, cost, g); }),
             tag + "stopping-rule");

    const auto r = oracle::reliability(cube);
    const auto ec = fit_ecec(cube, cost);
    c.expect(oracle::mean_cost(cube, cost, oracle::ecec(cube, r, ec.theta)) ==
                 min_over(grid, [&](double t) { return oracle::ecec(cube, r, t); }),
             tag + "ecec");

    const auto te = fit_teaser(cube, cost);
    const std::vector<std::size_t> vs{1, 2, 3, 4, 5};
    c.expect(oracle::mean_cost(cube, cost, oracle::teaser(cube, te, te.v)) ==
                 min_over(vs, [&](std::size_t v) { return oracle::teaser(cube, te, v); }),
             tag + "teaser");
  }
}

// 4. ECONOMY-gamma: K=1 stops at the best fixed time; K=2 hand example.
void economy_oracle(Check& c) {
  SplitMix64 rng(77);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.below(10), m = 1 + rng.below(5);
    const auto cube = random_cube(rng, n, m, 2 + rng.below(2));
    std::vector<std::size_t> ts;
    std::vector<double> delays;
    double d = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      ts.push_back(k + 1);
      d += 0.3 * rng.uniform();
      delays.push_back(d);
    }
    const auto cost = table_cost(cube.n_classes, ts, delays);
    std::size_t best = 0;
    for (std::size_t k = 1; k < m; ++k)
      if (oracle::fixed_time(cube, cost, k) < oracle::fixed_time(cube, cost, best)) best = k;
    const auto s = fit_economy_gamma(cube, cost, 1);
    for (std::size_t i = 0; i < n; ++i)
      c.expect(stop_index(s, cube, i) == best, "K=1 trial " + std::to_string(trial) + " series " +
                                                   std::to_string(i) + " stops at " +
                                                   std::to_string(stop_index(s, cube, i)) +
                                                   ", oracle " + std::to_string(best));
  }
  const auto hand = fit_economy_gamma(oracle::economy_hand_cube(), oracle::economy_hand_cost(), 2);
  c.expect(hand == oracle::economy_hand_state(), "K=2 hand example state differs");
}

// 5. CALIMERA with a memorizing regressor beats every fixed-time policy.
void calimera_recursion(Check& c) {
  SplitMix64 rng(55);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.below(12), m = 1 + rng.below(6);
    const auto cube = random_cube(rng, n, m, 2 + rng.below(3));
    std::vector<std::size_t> ts;
    for (std::size_t k = 1; k <= m; ++k) ts.push_back(k * 2);
    const auto cost = linear_cost(cube.n_classes, ts, 2.0 * rng.uniform());
    const auto policy = fit_calimera(cube, cost, [](const Matrix& x, std::span<const double> y) {
      return oracle::memorize(x, y);
    });
    double fixed = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < m; ++k) fixed = std::min(fixed, oracle::fixed_time(cube, cost, k));
    const double got = oracle::mean_cost(cube, cost, [&](std::size_t i, std::size_t k) {
      return policy.should_trigger(cube.history(i, k));
    });
    c.expect(got <= fixed, "trial " + std::to_string(trial) + ": " + fmt(got) + " > " + fmt(fixed));
  }
}

// 6. Desk-scale run on the seeded synthetic set through the bench defaults.
void desk_scale(Check& c) {
  const auto start = std::chrono::steady_clock::now();
  RunConfig cfg;
  cfg.synthetic = SyntheticParams{};  // 50 per class, L=100, t_star=40, gap 3, sd 1
  cfg.seed = 7;
  cfg.alpha = 0.5;
  cfg.timestamps = 20;
  cfg.classifier = "knn";
  const auto data = load_data(cfg);
  const auto cost = make_cost(cfg, data.train);
  const auto& ts = cost.timestamps();
  const auto trainer = make_trainer(cfg.classifier_config());
  PipelineOptions opts;
  opts.calibration_cube = out_of_fold_cube(data.train, ts, trainer, cfg.folds, cfg.seed);
  opts.prefit_collection = fit_collection(data.train, ts, trainer, "knn");

  const auto& coll = *opts.prefit_collection;
  const double first = score(coll, AlwaysFire{}, cost, data.test).avg_cost;
  const double last = score(coll, NeverFire{}, cost, data.test).avg_cost;
  const double bound = std::min(first, last) + 0.05;
  std::ostringstream summary;
  summary << "baselines t1 " << fmt(first) << " maxT " << fmt(last);
  for (const auto& name : trigger_names()) {
    cfg.trigger = name;
    const auto pipe = fit_pipeline(data.train, cost, trainer, "knn", cfg.trigger_config(), opts);
    const auto r = score(pipe, data.test);
    summary << "\n  [6] " << name << " cost " << fmt(r.avg_cost) << " acc " << fmt(r.accuracy)
            << " earliness " << fmt(r.earliness);
    c.expect(r.avg_cost <= bound, name + " avg_cost " + fmt(r.avg_cost) + " > " + fmt(bound));
    c.expect(r.accuracy >= 0.9, name + " accuracy " + fmt(r.accuracy) + " < 0.9");
    c.expect(r.earliness <= 0.8, name + " earliness " + fmt(r.earliness) + " > 0.8");
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  c.expect(secs < 120.0, "took " + fmt(secs) + " s");
  std::cout << "  [6] " << summary.str() << "\n  [6] " << fmt(secs) << " s\n";
}

// 7. Reports do not depend on the worker count.
void parallel_determinism(Check& c) {
  for (const auto& name : trigger_names()) {
    RunConfig cfg;
    cfg.synthetic = SyntheticParams{};
    cfg.seed = 42;
    cfg.alpha = 0.5;
    cfg.trigger = name;
    const auto one = run_bench(cfg);
    cfg.jobs = 8;
    auto many = run_bench(cfg);
    many.report.jobs = one.report.jobs;
    c.expect(serialize_report(one.report) == serialize_report(many.report), name + " report differs");
  }
}

// 8. Loader golden files.
void loader_golden(Check& c) {
  const std::string dir = EDM_TEST_DATA;
  const auto golden = read_text(dir + "/roundtrip.tsv");
  const auto ds = load_ucr_tsv(dir + "/roundtrip.tsv");
  TempDir tmp("acceptance");
  save_ucr_tsv(tmp / "out.tsv", ds);
  c.expect(read_text(tmp / "out.tsv") == golden, "roundtrip.tsv bytes differ after save");

  const auto gp = load_ucr_tsv(dir + "/GunPoint_TRAIN.tsv");
  c.expect(gp.length() == 150, "GunPoint length " + std::to_string(gp.length()));
  c.expect(gp.n_classes() == 2, "GunPoint classes " + std::to_string(gp.n_classes()));
  c.expect(gp.size() == 50, "GunPoint rows " + std::to_string(gp.size()));
  const auto zeros = std::count(gp.labels.begin(), gp.labels.end(), 0u);
  c.expect(zeros == 24 && gp.size() - zeros == 26, "GunPoint class counts " + std::to_string(zeros));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria{
      {"1 cost identity", cost_identity},
      {"2 forced decisions", forced_decisions},
      {"3 grid-search optimality", grid_optimality},
      {"4 ECONOMY-gamma oracle", economy_oracle},
      {"5 CALIMERA recursion", calimera_recursion},
      {"6 desk-scale end-to-end", desk_scale},
      {"7 parallel determinism", parallel_determinism},
      {"8 loader golden files", loader_golden},
  };
  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Check c;
    try {
      run(c);
    } catch (const std::exception& e) {
      c.notes.push_back(std::string("exception: ") + e.what());
    }
    std::cout << (c.notes.empty() ? "PASS " : "FAIL ") << name << '\n';
    for (std::size_t i = 0; i < c.notes.size() && i < 10; ++i) std::cout << "  " << c.notes[i] << '\n';
    failed += c.notes.empty() ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
