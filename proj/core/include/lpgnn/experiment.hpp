#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "lpgnn/dataset.hpp"
#include "lpgnn/lagrangian.hpp"
#include "lpgnn/model.hpp"

namespace lpgnn {

// One training run, fully determined together with its seed. String fields
// mirror the CLI flags one-to-one.
struct ExperimentConfig {
  std::string task = "subgraph";  // subgraph | clique | tu | jsonl
  std::string data_path;          // tu directory or jsonl file

  // Synthetic generation (per split; three splits are generated).
  int n_graphs = 100;
  int graph_size = 7;
  int pattern_size = 3;
  double edge_prob = 0.2;

  std::string g_variant = "abs-eps";
  double epsilon = 0.01;
  int state_dim = 10;
  int hidden_units = 20;
  int hidden_layers = 1;
  std::string aggregation = "sum";
  double dropout = 0.0;
  double lr_theta = 1e-3;
  double lr_states = 1e-2;
  double lr_multipliers = 1e-2;

  int epochs = 5000;
  int patience = 500;      // epochs without val improvement; 0 disables
  int folds = 10;          // graph classification only
  int infer_steps = 1000;  // test-time state optimization budget

  std::uint64_t seed = 0;

  // Stable key=value serialization; the config hash is hash64 of it.
  std::string canonical_string() const;
  std::uint64_t hash() const;

  ConstraintFunction constraint() const;
  Aggregation aggregation_mode() const;
  void validate() const;  // throws std::invalid_argument
};

struct EpochRow {
  int fold = -1;  // -1 outside cross-validation
  int epoch = 0;
  double loss = 0.0;
  double mean_residual = 0.0;
  double max_multiplier = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
};

constexpr double kNoMetric = std::numeric_limits<double>::quiet_NaN();

struct MetricsRecord {
  ExperimentConfig config;
  std::uint64_t config_hash = 0;
  std::vector<EpochRow> epochs;

  int best_epoch = -1;
  double best_val_accuracy = kNoMetric;
  double test_accuracy = kNoMetric;       // node tasks
  double cv_mean_accuracy = kNoMetric;    // graph classification
  double cv_std_accuracy = kNoMetric;
  double final_mean_residual = kNoMetric;

  bool failed = false;
  std::string failure_reason;

  double wall_seconds = 0.0;

  // Validation-side score used for ranking grid cells.
  double selection_score() const;
};

// Everything the caller may want to inspect after a node-task run, beyond
// the metrics: the batched graphs and the trained weights/states.
struct NodeTaskArtifacts {
  Model best_model;        // weights at the selected epoch
  Model final_model;       // weights at the last trained epoch
  DisjointUnion train_batch;
  DisjointUnion val_batch;
  DisjointUnion test_batch;
  StateVariables final_train_states;
  InferenceResult test_inference;  // produced with best_model
};

// Node-focused protocol: generate (or load) three equal splits, batch each
// into one disconnected-components graph, train on the training batch while
// tracking held-out validation states with frozen weights, select the best
// epoch by validation accuracy, then score the test batch with fresh
// test-time state optimization. A DivergenceError marks the record failed.
MetricsRecord run_node_task(const ExperimentConfig& config,
                            NodeTaskArtifacts* artifacts = nullptr);

// Graph classification protocol: stratified k-fold CV with a shared stopping
// epoch (the epoch whose fold-averaged validation accuracy peaks); reports
// mean and sample standard deviation of the per-fold accuracies there.
MetricsRecord run_graph_classification(const ExperimentConfig& config);

// Dispatches on the task: TU directories and graph-multiclass JSONL files go
// through cross-validation, everything else through the node protocol.
MetricsRecord run_any(const ExperimentConfig& config);

// Accuracy of argmax(readout) against targets; node tasks score supervised
// nodes, graph tasks score components.
double node_accuracy(const Model& m, const Graph& g, const Matrix& states);
double graph_accuracy(const Model& m, const Matrix& states,
                      std::span<const std::pair<int, int>> ranges,
                      std::span<const int> targets);

// ---------------------------------------------------------------------------
// Grid search.

struct GridSpace {
  ExperimentConfig base;
  // Empty axis = keep the base value.
  std::vector<std::string> g_variants;
  std::vector<double> epsilons;
  std::vector<int> state_dims;
  std::vector<int> hidden_units;
  std::vector<std::string> aggregations;
  std::vector<double> dropouts;
  std::vector<double> lrs_theta;
  std::vector<double> lrs_states;
  std::vector<double> lrs_multipliers;

  std::vector<ExperimentConfig> enumerate() const;  // deterministic order
};

// Runs up to `budget` cells (0 = all) with `workers` parallel threads; each
// cell owns its RNG streams. Returns records ranked best-validation first,
// failed runs last; ties keep enumeration order.
std::vector<MetricsRecord> grid_search(const GridSpace& space, int budget = 0,
                                       int workers = 1);

// ---------------------------------------------------------------------------
// Scaling probe for the per-step cost across graph sizes.

struct ScalingPoint {
  int num_nodes = 0;
  long graph_size = 0;  // |V| + |E|
  double seconds_per_step = 0.0;
  int steps_timed = 0;
  bool noise_floor = false;  // total sample below 10 ms even after retries
};

struct ScalingReport {
  std::vector<ScalingPoint> points;
  double loglog_slope = 0.0;  // least-squares log(time) vs log(|V|+|E|)
};

// Requires >= 4 sizes spanning at least a factor of 10.
ScalingReport scaling_probe(std::span<const int> sizes, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reporting.

std::string metrics_csv(const MetricsRecord& record);  // one row per epoch
void write_metrics_csv(const MetricsRecord& record, const std::string& path);
void write_summary_json(const MetricsRecord& record, const std::string& path);
void write_sweep_csv(std::span<const MetricsRecord> records,
                     const std::string& path);

// Builds the dataset named by the config (generating 3x n_graphs for
// synthetic node tasks). Exposed for the CLI and tests.
LabeledDataset load_or_generate(const ExperimentConfig& config);

}  // namespace lpgnn
