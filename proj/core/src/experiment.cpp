#include "lpgnn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>
#include <type_traits>
#include <unordered_set>

#include "json.hpp"
#include "lpgnn/fixed_point.hpp"

namespace lpgnn {

namespace {

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::uint64_t fold_seed(std::uint64_t base, std::string_view stream, int fold) {
  return derive_seed(derive_seed(base, stream),
                     "fold-" + std::to_string(fold));
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

std::string ExperimentConfig::canonical_string() const {
  std::ostringstream out;
  out << "task=" << task << ";data=" << data_path << ";n_graphs=" << n_graphs
      << ";graph_size=" << graph_size << ";pattern_size=" << pattern_size
      << ";edge_prob=" << fmt(edge_prob) << ";g=" << g_variant
      << ";eps=" << fmt(epsilon) << ";state_dim=" << state_dim
      << ";hidden=" << hidden_units << ";layers=" << hidden_layers
      << ";agg=" << aggregation << ";dropout=" << fmt(dropout)
      << ";lr_theta=" << fmt(lr_theta) << ";lr_states=" << fmt(lr_states)
      << ";lr_multipliers=" << fmt(lr_multipliers) << ";epochs=" << epochs
      << ";patience=" << patience << ";folds=" << folds
      << ";infer_steps=" << infer_steps << ";seed=" << seed;
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const { return hash64(canonical_string()); }

ConstraintFunction ExperimentConfig::constraint() const {
  return ConstraintFunction(g_variant_from_string(g_variant), epsilon);
}

Aggregation ExperimentConfig::aggregation_mode() const {
  return aggregation_from_string(aggregation);
}

void ExperimentConfig::validate() const {
  if (task != "subgraph" && task != "clique" && task != "tu" && task != "jsonl") {
    throw std::invalid_argument("unknown task: " + task);
  }
  if ((task == "tu" || task == "jsonl") && data_path.empty()) {
    throw std::invalid_argument("task '" + task + "' needs --data");
  }
  if (n_graphs < 1) throw std::invalid_argument("n_graphs must be positive");
  if (graph_size < 2) throw std::invalid_argument("graph_size must be >= 2");
  if (pattern_size < 2 || pattern_size > graph_size) {
    throw std::invalid_argument("pattern_size must lie in [2, graph_size]");
  }
  if (edge_prob < 0.0 || edge_prob > 1.0) {
    throw std::invalid_argument("edge_prob must lie in [0, 1]");
  }
  constraint();          // throws on unknown name or negative epsilon
  aggregation_mode();    // throws on unknown name
  if (state_dim < 1) throw std::invalid_argument("state_dim must be positive");
  if (hidden_units < 1 || hidden_layers < 1) {
    throw std::invalid_argument("hidden_units and hidden_layers must be positive");
  }
  if (dropout < 0.0 || dropout >= 1.0) {
    throw std::invalid_argument("dropout must lie in [0, 1)");
  }
  if (lr_theta <= 0.0 || lr_states <= 0.0 || lr_multipliers <= 0.0) {
    throw std::invalid_argument("learning rates must be positive");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be positive");
  if (patience < 0) throw std::invalid_argument("patience must be >= 0");
  if (folds < 2) throw std::invalid_argument("folds must be >= 2");
  if (infer_steps < 1) throw std::invalid_argument("infer_steps must be positive");
}

double MetricsRecord::selection_score() const {
  if (failed) return -std::numeric_limits<double>::infinity();
  const double score =
      std::isfinite(cv_mean_accuracy) ? cv_mean_accuracy : best_val_accuracy;
  return std::isfinite(score) ? score
                              : -std::numeric_limits<double>::infinity();
}

LabeledDataset load_or_generate(const ExperimentConfig& config) {
  const std::uint64_t data_seed = derive_seed(config.seed, "dataset");
  if (config.task == "subgraph") {
    SubgraphTaskParams params;
    params.n_graphs = 3 * config.n_graphs;
    params.graph_size = config.graph_size;
    params.pattern_size = config.pattern_size;
    params.edge_prob = config.edge_prob;
    return generate_subgraph_matching(params, data_seed);
  }
  if (config.task == "clique") {
    CliqueTaskParams params;
    params.n_graphs = 3 * config.n_graphs;
    params.graph_size = config.graph_size;
    params.clique_size = config.pattern_size;
    params.edge_prob = config.edge_prob;
    return generate_clique(params, data_seed);
  }
  if (config.task == "tu") return load_tu_dataset(config.data_path);
  if (config.task == "jsonl") return load_jsonl(config.data_path);
  throw std::invalid_argument("unknown task: " + config.task);
}

double node_accuracy(const Model& m, const Graph& g, const Matrix& states) {
  if (g.supervised_nodes.empty()) return kNoMetric;
  std::vector<double> logits(m.num_classes());
  int hits = 0;
  for (std::size_t si = 0; si < g.supervised_nodes.size(); ++si) {
    const int v = g.supervised_nodes[si];
    readout_node(m, std::span<const double>(states.row(v), m.state_dim), logits);
    if (argmax(logits) == g.node_targets[si]) ++hits;
  }
  return static_cast<double>(hits) /
         static_cast<double>(g.supervised_nodes.size());
}

double graph_accuracy(const Model& m, const Matrix& states,
                      std::span<const std::pair<int, int>> ranges,
                      std::span<const int> targets) {
  if (ranges.empty()) return kNoMetric;
  std::vector<double> logits(m.num_classes());
  std::vector<int> component;
  int hits = 0;
  for (std::size_t ci = 0; ci < ranges.size(); ++ci) {
    component.resize(ranges[ci].second - ranges[ci].first);
    std::iota(component.begin(), component.end(), ranges[ci].first);
    readout_graph(m, states, component, logits);
    if (argmax(logits) == targets[ci]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(ranges.size());
}

namespace {

DisjointUnion batch_by_indices(const LabeledDataset& ds,
                               std::span<const int> indices) {
  std::vector<Graph> members;
  members.reserve(indices.size());
  for (int i : indices) members.push_back(ds.graphs[i]);
  return disjoint_union(members);
}

struct GraphTaskLabels {
  std::vector<std::pair<int, int>> ranges;
  std::vector<int> targets;
};

GraphTaskLabels union_labels(const DisjointUnion& batch) {
  GraphTaskLabels labels;
  for (int i = 0; i < batch.num_components(); ++i) {
    if (!batch.component_targets[i].has_value()) {
      throw DatasetError("component " + std::to_string(i) + " has no target");
    }
    labels.ranges.push_back(batch.component_range(i));
    labels.targets.push_back(*batch.component_targets[i]);
  }
  return labels;
}

Model build_model(const ExperimentConfig& config, int node_feature_dim,
                  int arc_feature_dim, int num_classes, std::uint64_t weight_seed) {
  ModelConfig mc;
  mc.state_dim = config.state_dim;
  mc.node_feature_dim = node_feature_dim;
  mc.arc_feature_dim = arc_feature_dim;
  mc.num_classes = num_classes;
  mc.hidden_units = config.hidden_units;
  mc.hidden_layers = config.hidden_layers;
  mc.aggregation = config.aggregation_mode();
  mc.constraint = config.constraint();
  mc.dropout = config.dropout;
  Rng rng(weight_seed);
  return Model::build(mc, rng);
}

}  // namespace

MetricsRecord run_node_task(const ExperimentConfig& config,
                            NodeTaskArtifacts* artifacts) {
  const auto start = Clock::now();
  config.validate();

  MetricsRecord record;
  record.config = config;
  record.config_hash = config.hash();

  LabeledDataset ds = load_or_generate(config);
  if (ds.task != DatasetTask::NodeBinary) {
    throw DatasetError("the node protocol needs node-labeled graphs");
  }

  ThreeWaySplit split =
      train_val_test_split(ds, derive_seed(config.seed, "split"));
  DisjointUnion train_batch = batch_by_indices(ds, split.train);
  DisjointUnion val_batch = batch_by_indices(ds, split.validation);
  DisjointUnion test_batch = batch_by_indices(ds, split.test);
  const NeighborIndex train_idx = build_neighbor_index(train_batch.graph);
  const NeighborIndex val_idx = build_neighbor_index(val_batch.graph);

  Model model = build_model(config, ds.graphs.front().feature_dim(),
                            ds.graphs.front().arc_feature_dim(), ds.num_classes,
                            derive_seed(config.seed, "weights"));
  Model best_model = model;

  StateVariables train_states(train_batch.graph.num_nodes, config.state_dim);
  Multipliers train_multipliers(train_batch.graph.num_nodes, config.state_dim);
  SaddleOptimizer opt(model, train_batch.graph.num_nodes);

  StateVariables val_states(val_batch.graph.num_nodes, config.state_dim);
  Multipliers val_multipliers(val_batch.graph.num_nodes, config.state_dim);
  AdamState val_state_opt(val_states.data.size());
  AdamState val_multiplier_opt(val_multipliers.data.size());

  const LossSpec loss = LossSpec::node_classification(ds.num_classes);
  const LearningRates lr{config.lr_theta, config.lr_states,
                         config.lr_multipliers};
  Rng dropout_rng(derive_seed(config.seed, "dropout"));
  Rng* dropout = config.dropout > 0.0 ? &dropout_rng : nullptr;

  double best_val = -std::numeric_limits<double>::infinity();
  try {
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      StepDiagnostics diag =
          train_step(model, train_batch.graph, train_idx, train_states,
                     train_multipliers, loss, opt, lr, dropout);
      state_step(model, val_batch.graph, val_idx, val_states, val_multipliers,
                 val_state_opt, val_multiplier_opt, config.lr_states,
                 config.lr_multipliers);

      EpochRow row;
      row.epoch = epoch;
      row.loss = diag.loss;
      row.mean_residual = diag.mean_abs_residual;
      row.max_multiplier = diag.max_abs_multiplier;
      row.train_accuracy = node_accuracy(model, train_batch.graph, train_states);
      row.val_accuracy = node_accuracy(model, val_batch.graph, val_states);
      record.epochs.push_back(row);

      if (row.val_accuracy > best_val) {
        best_val = row.val_accuracy;
        record.best_epoch = epoch;
        best_model = model;
      }
      if (config.patience > 0 && epoch - record.best_epoch >= config.patience) {
        break;
      }
    }
  } catch (const DivergenceError& e) {
    record.failed = true;
    record.failure_reason = e.what();
  }

  if (!record.epochs.empty()) {
    record.final_mean_residual = record.epochs.back().mean_residual;
  }
  if (record.best_epoch > 0) {
    record.best_val_accuracy = best_val;
    const NeighborIndex test_idx = build_neighbor_index(test_batch.graph);
    InferenceResult inference =
        infer_states(best_model, test_batch.graph, test_idx, config.infer_steps,
                     config.lr_states, config.lr_multipliers);
    record.test_accuracy =
        node_accuracy(best_model, test_batch.graph, inference.states);
    if (artifacts != nullptr) artifacts->test_inference = std::move(inference);
  }

  if (artifacts != nullptr) {
    artifacts->best_model = std::move(best_model);
    artifacts->final_model = std::move(model);
    artifacts->train_batch = std::move(train_batch);
    artifacts->val_batch = std::move(val_batch);
    artifacts->test_batch = std::move(test_batch);
    artifacts->final_train_states = std::move(train_states);
  }
  record.wall_seconds = seconds_since(start);
  return record;
}

MetricsRecord run_graph_classification(const ExperimentConfig& config) {
  const auto start = Clock::now();
  config.validate();

  MetricsRecord record;
  record.config = config;
  record.config_hash = config.hash();

  LabeledDataset ds = load_or_generate(config);
  if (ds.task != DatasetTask::GraphMulticlass) {
    throw DatasetError("the graph protocol needs graph-labeled datasets");
  }

  const auto folds = k_fold_split(ds, config.folds, derive_seed(config.seed, "folds"));

  // acc[f][e]: fold f's held-out accuracy after epoch e+1. Every fold runs
  // the full budget so the curves stay aligned for a shared stopping epoch.
  std::vector<std::vector<double>> acc(folds.size());
  double residual_sum = 0.0;

  for (std::size_t f = 0; f < folds.size(); ++f) {
    DisjointUnion train_batch = batch_by_indices(ds, folds[f].first);
    DisjointUnion val_batch = batch_by_indices(ds, folds[f].second);
    const NeighborIndex train_idx = build_neighbor_index(train_batch.graph);
    const NeighborIndex val_idx = build_neighbor_index(val_batch.graph);
    const GraphTaskLabels train_labels = union_labels(train_batch);
    const GraphTaskLabels val_labels = union_labels(val_batch);

    Model model = build_model(
        config, ds.graphs.front().feature_dim(),
        ds.graphs.front().arc_feature_dim(), ds.num_classes,
        fold_seed(config.seed, "weights", static_cast<int>(f)));

    StateVariables train_states(train_batch.graph.num_nodes, config.state_dim);
    Multipliers train_multipliers(train_batch.graph.num_nodes, config.state_dim);
    SaddleOptimizer opt(model, train_batch.graph.num_nodes);

    StateVariables val_states(val_batch.graph.num_nodes, config.state_dim);
    Multipliers val_multipliers(val_batch.graph.num_nodes, config.state_dim);
    AdamState val_state_opt(val_states.data.size());
    AdamState val_multiplier_opt(val_multipliers.data.size());

    const LossSpec loss = LossSpec::graph_classification(
        ds.num_classes, train_labels.ranges, train_labels.targets);
    const LearningRates lr{config.lr_theta, config.lr_states,
                           config.lr_multipliers};
    Rng dropout_rng(fold_seed(config.seed, "dropout", static_cast<int>(f)));
    Rng* dropout = config.dropout > 0.0 ? &dropout_rng : nullptr;

    try {
      for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        StepDiagnostics diag =
            train_step(model, train_batch.graph, train_idx, train_states,
                       train_multipliers, loss, opt, lr, dropout);
        state_step(model, val_batch.graph, val_idx, val_states,
                   val_multipliers, val_state_opt, val_multiplier_opt,
                   config.lr_states, config.lr_multipliers);

        EpochRow row;
        row.fold = static_cast<int>(f);
        row.epoch = epoch;
        row.loss = diag.loss;
        row.mean_residual = diag.mean_abs_residual;
        row.max_multiplier = diag.max_abs_multiplier;
        row.train_accuracy = graph_accuracy(model, train_states,
                                            train_labels.ranges,
                                            train_labels.targets);
        row.val_accuracy = graph_accuracy(model, val_states, val_labels.ranges,
                                          val_labels.targets);
        record.epochs.push_back(row);
        acc[f].push_back(row.val_accuracy);
        if (epoch == config.epochs) residual_sum += diag.mean_abs_residual;
      }
    } catch (const DivergenceError& e) {
      record.failed = true;
      record.failure_reason =
          "fold " + std::to_string(f) + ": " + e.what();
      record.wall_seconds = seconds_since(start);
      return record;
    }
  }

  // Shared stopping epoch: the peak of the fold-averaged accuracy curve.
  int best_epoch = -1;
  double best_mean = -std::numeric_limits<double>::infinity();
  for (int e = 0; e < config.epochs; ++e) {
    double mean = 0.0;
    for (const auto& curve : acc) mean += curve[e];
    mean /= static_cast<double>(acc.size());
    if (mean > best_mean) {
      best_mean = mean;
      best_epoch = e;
    }
  }

  double var = 0.0;
  for (const auto& curve : acc) {
    const double d = curve[best_epoch] - best_mean;
    var += d * d;
  }
  record.best_epoch = best_epoch + 1;
  record.best_val_accuracy = best_mean;
  record.cv_mean_accuracy = best_mean;
  record.cv_std_accuracy =
      acc.size() > 1 ? std::sqrt(var / static_cast<double>(acc.size() - 1))
                     : 0.0;
  record.final_mean_residual = residual_sum / static_cast<double>(acc.size());
  record.wall_seconds = seconds_since(start);
  return record;
}

std::vector<ExperimentConfig> GridSpace::enumerate() const {
  // An empty axis contributes the base value, so every loop runs at least once.
  const auto axis = [](const auto& values, const auto& fallback) {
    using T = std::decay_t<decltype(fallback)>;
    return values.empty() ? std::vector<T>{fallback}
                          : std::vector<T>(values.begin(), values.end());
  };

  std::vector<ExperimentConfig> cells;
  for (const auto& g : axis(g_variants, base.g_variant))
    for (double eps : axis(epsilons, base.epsilon))
      for (int s : axis(state_dims, base.state_dim))
        for (int h : axis(hidden_units, base.hidden_units))
          for (const auto& agg : axis(aggregations, base.aggregation))
            for (double drop : axis(dropouts, base.dropout))
              for (double lt : axis(lrs_theta, base.lr_theta))
                for (double lx : axis(lrs_states, base.lr_states))
                  for (double ll : axis(lrs_multipliers, base.lr_multipliers)) {
                    ExperimentConfig c = base;
                    c.g_variant = g;
                    c.epsilon = eps;
                    c.state_dim = s;
                    c.hidden_units = h;
                    c.aggregation = agg;
                    c.dropout = drop;
                    c.lr_theta = lt;
                    c.lr_states = lx;
                    c.lr_multipliers = ll;
                    cells.push_back(std::move(c));
                  }
  return cells;
}

MetricsRecord run_any(const ExperimentConfig& config) {
  if (config.task == "tu") return run_graph_classification(config);
  if (config.task == "jsonl") {
    // Peek at the header line to pick the protocol.
    std::ifstream in(config.data_path);
    std::string line;
    if (!in || !std::getline(in, line)) {
      throw DatasetError("cannot read: " + config.data_path);
    }
    const auto header = nlohmann::json::parse(line, nullptr, false);
    if (!header.is_object()) {
      throw DatasetError("bad header in " + config.data_path);
    }
    return header.value("task", "") == "graph-multiclass"
               ? run_graph_classification(config)
               : run_node_task(config);
  }
  return run_node_task(config);
}

std::vector<MetricsRecord> grid_search(const GridSpace& space, int budget,
                                       int workers) {
  std::vector<ExperimentConfig> cells = space.enumerate();
  if (budget > 0 && budget < static_cast<int>(cells.size())) {
    cells.resize(budget);
  }

  std::vector<MetricsRecord> records(cells.size());
  std::atomic<std::size_t> next{0};
  const auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) return;
      try {
        records[i] = run_any(cells[i]);
      } catch (const std::exception& e) {
        records[i].config = cells[i];
        records[i].config_hash = cells[i].hash();
        records[i].failed = true;
        records[i].failure_reason = e.what();
      }
    }
  };

  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    const int count = std::min<int>(workers, static_cast<int>(cells.size()));
    pool.reserve(count);
    for (int i = 0; i < count; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  std::stable_sort(records.begin(), records.end(),
                   [](const MetricsRecord& a, const MetricsRecord& b) {
                     if (a.failed != b.failed) return !a.failed;
                     return a.selection_score() > b.selection_score();
                   });
  return records;
}

namespace {

// Sparse random graph with a fixed expected degree, so cost scales with
// |V| + |E|. Labels are an arbitrary deterministic parity pattern; the probe
// measures step cost, not learning.
Graph probe_graph(int n, int target_degree, Rng& rng) {
  Graph g;
  g.num_nodes = n;
  g.node_features = Matrix(n, 1);
  for (int v = 0; v < n; ++v) {
    g.node_features.at(v, 0) = 1.0;
    g.supervised_nodes.push_back(v);
    g.node_targets.push_back(v % 2);
  }

  const long want = static_cast<long>(n) * target_degree / 2;
  std::unordered_set<std::int64_t> seen;
  seen.reserve(static_cast<std::size_t>(want) * 2);
  long made = 0;
  while (made < want) {
    const int a = rng.uniform_int(0, n - 1);
    const int b = rng.uniform_int(0, n - 1);
    if (a == b) continue;
    const int lo = std::min(a, b);
    const int hi = std::max(a, b);
    const std::int64_t key = (static_cast<std::int64_t>(lo) << 32) | hi;
    if (!seen.insert(key).second) continue;
    g.arcs.push_back({lo, hi});
    g.arcs.push_back({hi, lo});
    ++made;
  }
  return g;
}

}  // namespace

ScalingReport scaling_probe(std::span<const int> sizes, std::uint64_t seed) {
  if (sizes.size() < 4) {
    throw std::invalid_argument("the scaling probe needs at least 4 sizes");
  }
  std::vector<int> sorted(sizes.begin(), sizes.end());
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 2 ||
      sorted.back() < 10 * sorted.front()) {
    throw std::invalid_argument(
        "the scaling probe needs sizes spanning at least a factor of 10");
  }

  ScalingReport report;
  for (int n : sorted) {
    Rng rng(derive_seed(seed, "probe-" + std::to_string(n)));
    Graph g = probe_graph(n, 10, rng);
    const NeighborIndex idx = build_neighbor_index(g);

    ModelConfig mc;
    mc.state_dim = 10;
    mc.node_feature_dim = 1;
    mc.num_classes = 2;
    mc.hidden_units = 20;
    mc.constraint = ConstraintFunction(GVariant::Squared, 0.0);
    Rng wrng(rng.fork("weights").next_u64());
    Model model = Model::build(mc, wrng);

    StateVariables states(n, mc.state_dim);
    Multipliers multipliers(n, mc.state_dim);
    SaddleOptimizer opt(model, n);
    const LossSpec loss = LossSpec::node_classification(2);
    const LearningRates lr;

    for (int warm = 0; warm < 3; ++warm) {
      train_step(model, g, idx, states, multipliers, loss, opt, lr);
    }

    ScalingPoint point;
    point.num_nodes = n;
    point.graph_size = n + static_cast<long>(g.arcs.size());
    int steps = 5;
    for (int attempt = 0; attempt < 9; ++attempt) {
      const auto t0 = Clock::now();
      for (int k = 0; k < steps; ++k) {
        train_step(model, g, idx, states, multipliers, loss, opt, lr);
      }
      const double elapsed = seconds_since(t0);
      if (elapsed >= 0.01 || attempt == 8) {
        point.seconds_per_step = elapsed / steps;
        point.steps_timed = steps;
        point.noise_floor = elapsed < 0.01;
        break;
      }
      steps *= 2;
    }
    report.points.push_back(point);
  }

  // Least-squares slope of log(seconds) against log(|V| + |E|).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = static_cast<double>(report.points.size());
  for (const ScalingPoint& p : report.points) {
    const double x = std::log(static_cast<double>(p.graph_size));
    const double y = std::log(p.seconds_per_step);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  report.loglog_slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  return report;
}

std::string metrics_csv(const MetricsRecord& record) {
  std::ostringstream out;
  out << "fold,epoch,loss,mean_residual,max_multiplier,train_accuracy,"
         "val_accuracy\n";
  for (const EpochRow& row : record.epochs) {
    out << row.fold << ',' << row.epoch << ',' << fmt(row.loss) << ','
        << fmt(row.mean_residual) << ',' << fmt(row.max_multiplier) << ','
        << fmt(row.train_accuracy) << ',' << fmt(row.val_accuracy) << '\n';
  }
  return out.str();
}

void write_metrics_csv(const MetricsRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << metrics_csv(record);
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

nlohmann::json config_json(const ExperimentConfig& c) {
  return {{"task", c.task},
          {"data_path", c.data_path},
          {"n_graphs", c.n_graphs},
          {"graph_size", c.graph_size},
          {"pattern_size", c.pattern_size},
          {"edge_prob", c.edge_prob},
          {"g_variant", c.g_variant},
          {"epsilon", c.epsilon},
          {"state_dim", c.state_dim},
          {"hidden_units", c.hidden_units},
          {"hidden_layers", c.hidden_layers},
          {"aggregation", c.aggregation},
          {"dropout", c.dropout},
          {"lr_theta", c.lr_theta},
          {"lr_states", c.lr_states},
          {"lr_multipliers", c.lr_multipliers},
          {"epochs", c.epochs},
          {"patience", c.patience},
          {"folds", c.folds},
          {"infer_steps", c.infer_steps},
          {"seed", c.seed}};
}

}  // namespace

void write_summary_json(const MetricsRecord& record, const std::string& path) {
  nlohmann::json j{{"config", config_json(record.config)},
                   {"config_hash", record.config_hash},
                   {"epochs_run", record.epochs.size()},
                   {"best_epoch", record.best_epoch},
                   {"best_val_accuracy", record.best_val_accuracy},
                   {"test_accuracy", record.test_accuracy},
                   {"cv_mean_accuracy", record.cv_mean_accuracy},
                   {"cv_std_accuracy", record.cv_std_accuracy},
                   {"final_mean_residual", record.final_mean_residual},
                   {"failed", record.failed},
                   {"failure_reason", record.failure_reason},
                   {"wall_seconds", record.wall_seconds}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

namespace {

std::string csv_quote(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string quoted = "\"";
  for (char c : text) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

}  // namespace

void write_sweep_csv(std::span<const MetricsRecord> records,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << "rank,config_hash,task,g_variant,epsilon,state_dim,hidden_units,"
         "hidden_layers,aggregation,dropout,lr_theta,lr_states,"
         "lr_multipliers,seed,best_epoch,selection_score,best_val_accuracy,"
         "test_accuracy,cv_mean_accuracy,cv_std_accuracy,failed,"
         "failure_reason,wall_seconds\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const MetricsRecord& r = records[i];
    const ExperimentConfig& c = r.config;
    out << i + 1 << ',' << r.config_hash << ',' << c.task << ','
        << c.g_variant << ',' << fmt(c.epsilon) << ',' << c.state_dim << ','
        << c.hidden_units << ',' << c.hidden_layers << ',' << c.aggregation
        << ',' << fmt(c.dropout) << ',' << fmt(c.lr_theta) << ','
        << fmt(c.lr_states) << ',' << fmt(c.lr_multipliers) << ',' << c.seed
        << ',' << r.best_epoch << ',' << fmt(r.selection_score()) << ','
        << fmt(r.best_val_accuracy) << ',' << fmt(r.test_accuracy) << ','
        << fmt(r.cv_mean_accuracy) << ',' << fmt(r.cv_std_accuracy) << ','
        << (r.failed ? 1 : 0) << ',' << csv_quote(r.failure_reason) << ','
        << fmt(r.wall_seconds) << '\n';
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lpgnn
