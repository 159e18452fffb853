#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpgnn/graph.hpp"

namespace lpgnn {

struct DatasetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class DatasetTask { NodeBinary, GraphMulticlass };

struct LabeledDataset {
  std::vector<Graph> graphs;
  DatasetTask task = DatasetTask::NodeBinary;
  int num_classes = 0;
  // JSON text: generator name, parameters and seed, or the source directory.
  std::string provenance;

  int size() const { return static_cast<int>(graphs.size()); }
};

// ---------------------------------------------------------------------------
// Synthetic node-focused tasks. Both generators label nodes by exhaustive
// search over the generated graph, never by trusting the planted copy.

struct SubgraphTaskParams {
  int n_graphs = 100;
  int graph_size = 7;
  int pattern_size = 3;   // order of the target pattern S
  double edge_prob = 0.2; // Erdos-Renyi density of the host graphs
  int num_tags = 10;      // node tag alphabet, one-hot encoded as features
};

// Draws one connected random pattern S with random node tags, then emits
// graphs that each contain a planted copy of S. Node v is labeled 1 iff v
// lies in some tag- and arc-preserving embedding of S.
LabeledDataset generate_subgraph_matching(const SubgraphTaskParams& params,
                                          std::uint64_t seed);

struct CliqueTaskParams {
  int n_graphs = 100;
  int graph_size = 7;
  int clique_size = 3;
  double edge_prob = 0.2;
  int resample_budget = 1000;  // draws allowed per emitted graph
};

// Random graphs with a planted clique of clique_size; draws whose maximum
// clique exceeds clique_size are resampled. Node v is labeled 1 iff v lies
// in some clique of clique_size. Node features are the constant 1.
LabeledDataset generate_clique(const CliqueTaskParams& params,
                               std::uint64_t seed);

// ---------------------------------------------------------------------------
// TU-format benchmark ingestion (plain-text files <prefix>_A.txt,
// <prefix>_graph_indicator.txt, <prefix>_graph_labels.txt and optional
// <prefix>_node_labels.txt, arc pairs 1-indexed).
//
// Categorical node labels become one-hot features; datasets without node
// labels get degree one-hot features with the maximum computed corpus-wide.
// Graph labels are remapped to contiguous 0-based ids.
LabeledDataset load_tu_dataset(const std::string& directory);

// ---------------------------------------------------------------------------
// Splits (index partitions into `graphs`).

// Stratified k-fold: per-class round-robin dealing after a seeded shuffle.
// Fold i is (train_indices, validation_indices); folds are disjoint and
// cover the dataset. Throws DatasetError when some class has < k members.
std::vector<std::pair<std::vector<int>, std::vector<int>>> k_fold_split(
    const LabeledDataset& ds, int k, std::uint64_t seed);

struct ThreeWaySplit {
  std::vector<int> train;
  std::vector<int> validation;
  std::vector<int> test;
};

// Seeded shuffle into three equal parts; |ds| must be divisible by 3.
ThreeWaySplit train_val_test_split(const LabeledDataset& ds,
                                   std::uint64_t seed);

// ---------------------------------------------------------------------------
// JSON-lines serialization: line 1 is the provenance/task header, then one
// graph object per line.
void save_jsonl(const LabeledDataset& ds, const std::string& path);
LabeledDataset load_jsonl(const std::string& path);

}  // namespace lpgnn
