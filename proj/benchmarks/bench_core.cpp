// Microbenchmarks for the hot paths: the transition sweep, one full gradient
// evaluation, and one descent-ascent training step, across graph sizes at a
// fixed expected degree so cost should track |V| + |E|.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <unordered_set>
#include <vector>

#include "lpgnn/graph.hpp"
#include "lpgnn/lagrangian.hpp"
#include "lpgnn/model.hpp"
#include "lpgnn/rng.hpp"

namespace {

constexpr int kExpectedDegree = 10;
constexpr int kStateDim = 10;
constexpr int kFeatureDim = 4;

lpgnn::Graph make_random_graph(int n, std::uint64_t seed) {
  lpgnn::Rng rng(lpgnn::derive_seed(seed, "bench-graph"));
  lpgnn::Graph g;
  g.num_nodes = n;

  const long wanted = static_cast<long>(n) * kExpectedDegree / 2;
  std::unordered_set<std::int64_t> seen;
  while (static_cast<long>(seen.size()) < wanted) {
    const int a = rng.uniform_int(0, n - 1);
    const int b = rng.uniform_int(0, n - 1);
    if (a == b) continue;
    const int lo = std::min(a, b);
    const int hi = std::max(a, b);
    if (!seen.insert((static_cast<std::int64_t>(lo) << 32) | hi).second) {
      continue;
    }
    g.arcs.push_back({lo, hi});
    g.arcs.push_back({hi, lo});
  }

  g.node_features = lpgnn::Matrix(n, kFeatureDim);
  for (double& x : g.node_features.data) x = rng.uniform(-1.0, 1.0);
  for (int v = 0; v < n; ++v) {
    g.supervised_nodes.push_back(v);
    g.node_targets.push_back(rng.uniform_int(0, 1));
  }
  return g;
}

struct BenchFixture {
  lpgnn::Graph g;
  lpgnn::NeighborIndex idx;
  lpgnn::Model model;
  lpgnn::StateVariables states;
  lpgnn::Multipliers multipliers;
  lpgnn::LossSpec loss;

  explicit BenchFixture(int n) {
    g = make_random_graph(n, 17);
    idx = lpgnn::build_neighbor_index(g);

    lpgnn::ModelConfig cfg;
    cfg.state_dim = kStateDim;
    cfg.node_feature_dim = kFeatureDim;
    cfg.num_classes = 2;
    cfg.hidden_units = 20;
    cfg.constraint = lpgnn::ConstraintFunction(lpgnn::GVariant::Squared, 0.0);
    lpgnn::Rng weights(lpgnn::derive_seed(17, "weights"));
    model = lpgnn::Model::build(cfg, weights);

    states = lpgnn::Matrix(n, kStateDim);
    multipliers = lpgnn::Matrix(n, kStateDim);
    lpgnn::Rng init(lpgnn::derive_seed(17, "bench-init"));
    for (double& x : states.data) x = init.uniform(-0.1, 0.1);
    for (double& x : multipliers.data) x = init.uniform(-0.1, 0.1);
    loss = lpgnn::LossSpec::node_classification(2);
  }
};

void BM_TransitionSweep(benchmark::State& state) {
  BenchFixture fx(static_cast<int>(state.range(0)));
  std::vector<double> out(kStateDim);
  for (auto _ : state) {
    for (int v = 0; v < fx.g.num_nodes; ++v) {
      lpgnn::transition_forward(fx.model, fx.g, fx.idx, fx.states, v, out);
      benchmark::DoNotOptimize(out.data());
    }
  }
  state.SetItemsProcessed(state.iterations() * fx.g.num_nodes);
}

void BM_Gradients(benchmark::State& state) {
  BenchFixture fx(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    lpgnn::Gradients grads =
        lpgnn::gradients(fx.model, fx.g, fx.idx, fx.states, fx.multipliers,
                         fx.loss);
    benchmark::DoNotOptimize(grads.d_states.data.data());
  }
  state.SetItemsProcessed(state.iterations() * fx.g.num_nodes);
}

void BM_TrainStep(benchmark::State& state) {
  BenchFixture fx(static_cast<int>(state.range(0)));
  lpgnn::SaddleOptimizer opt(fx.model, fx.g.num_nodes);
  const lpgnn::LearningRates lr;
  for (auto _ : state) {
    lpgnn::StepDiagnostics diag = lpgnn::train_step(
        fx.model, fx.g, fx.idx, fx.states, fx.multipliers, fx.loss, opt, lr);
    benchmark::DoNotOptimize(diag.lagrangian);
  }
  state.SetItemsProcessed(state.iterations() * fx.g.num_nodes);
}

}  // namespace

BENCHMARK(BM_TransitionSweep)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_Gradients)->Arg(256)->Arg(1024)->Arg(4096);
BENCHMARK(BM_TrainStep)->Arg(256)->Arg(1024)->Arg(4096);

BENCHMARK_MAIN();
