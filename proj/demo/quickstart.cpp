// Fits every trigger model on a synthetic step dataset and prints test metrics.
//
//   ./build/quickstart [seed]

#include <cstdio>
#include <cstdlib>

#include "edm/edm.hpp"

int main(int argc, char** argv) {
  const std::uint64_t seed = argc > 1 ? std::strtoull(argv[1], nullptr, 10) : 7;
  edm::SplitMix64 root(seed);
  const edm::SyntheticParams params;  // 50 per class, L=100, divergence at t=40
  const auto train = edm::make_synthetic(params, root.split(1).next());
  const auto test = edm::make_synthetic(params, root.split(2).next());

  // 0/1 misclassification plus a linear delay cost of 0.5 at t = L.
  const auto cost = edm::build_cost_matrices(
      edm::symmetric_linear_spec(2, edm::default_timestamps(params.length, 20), 0.5));

  std::printf("%-14s %9s %9s %9s\n", "trigger", "avg_cost", "accuracy", "earliness");
  for (const auto& name : edm::trigger_names()) {
    const auto pipeline =
        edm::fit_pipeline(train, cost, edm::KnnConfig{}, *edm::trigger_config_for(name));
    const auto r = edm::score(pipeline, test);
    std::printf("%-14s %9.4f %9.4f %9.4f\n", name.c_str(), r.avg_cost, r.accuracy, r.earliness);
  }
  return 0;
}
