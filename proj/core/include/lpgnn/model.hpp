#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lpgnn/constraint.hpp"
#include "lpgnn/dense_net.hpp"
#include "lpgnn/graph.hpp"
#include "lpgnn/matrix.hpp"

namespace lpgnn {

enum class Aggregation { Sum, Avg };

Aggregation aggregation_from_string(std::string_view name);
std::string_view to_string(Aggregation a);

struct ModelConfig {
  int state_dim = 5;
  int node_feature_dim = 1;
  int arc_feature_dim = 0;
  int num_classes = 2;
  int hidden_units = 20;
  int hidden_layers = 1;
  Aggregation aggregation = Aggregation::Sum;
  ConstraintFunction constraint;
  double dropout = 0.0;
};

// The trainable pair (transition, readout). The transition aggregates, over a
// node's neighbors, a shared message net applied to the concatenation
// [x_u, l_u, l_(v,u), l_(u,v), x_v, l_v] (2s + 2m + 2d inputs, s outputs).
// The readout maps a state vector to class logits.
struct Model {
  DenseNet message_net;
  DenseNet readout_net;
  Aggregation aggregation = Aggregation::Sum;
  ConstraintFunction constraint;
  int state_dim = 0;

  static Model build(const ModelConfig& cfg, Rng& rng);

  int message_input_width() const { return message_net.input_width(); }
  int num_classes() const { return readout_net.output_width(); }
};

// Message-net inputs and caches for one node's aggregation, kept so the
// caller can run vjp per neighbor.
struct TransitionCache {
  std::vector<ForwardCache> per_neighbor;  // aligned with idx.neighbors[v]
};

// f_a at node v: aggregated message-net outputs over ne[v]. Avg divides by
// |ne[v]| and returns zero for isolated nodes. `out` must have state_dim
// entries; cache/dropout_rng are optional.
void transition_forward(const Model& m, const Graph& g, const NeighborIndex& idx,
                        const Matrix& states, int v, std::span<double> out,
                        TransitionCache* cache = nullptr,
                        Rng* dropout_rng = nullptr);

// Class logits for one node state.
void readout_node(const Model& m, std::span<const double> state,
                  std::span<double> logits);

// Class logits for a graph component: readout of the mean member state.
// Throws NetError on an empty component.
void readout_graph(const Model& m, const Matrix& states,
                   std::span<const int> component, std::span<double> logits);

// Versioned text checkpoint: widths, dropout, aggregation, constraint, and
// the flat parameter vectors printed with round-trip precision.
void save_checkpoint(const Model& m, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace lpgnn
