#include "lpgnn/model.hpp"

#include <cstdio>
#include <fstream>
#include <vector>

#include "doctest.h"

using namespace lpgnn;

namespace {

ModelConfig base_config() {
  ModelConfig mc;
  mc.state_dim = 3;
  mc.node_feature_dim = 2;
  mc.arc_feature_dim = 1;
  mc.num_classes = 2;
  mc.hidden_units = 4;
  mc.constraint = ConstraintFunction(GVariant::AbsEps, 0.01);
  return mc;
}

// Two nodes with a single directed arc 0 -> 1 carrying one feature.
Graph two_node_graph() {
  Graph g;
  g.num_nodes = 2;
  g.arcs = {{0, 1}};
  g.node_features = Matrix(2, 1);
  g.node_features.at(0, 0) = 5.0;
  g.node_features.at(1, 0) = 7.0;
  g.arc_features = Matrix(1, 1);
  g.arc_features.at(0, 0) = 9.0;
  return g;
}

// One-layer linear message net reading a single input slot, so the
// transition output exposes exactly what was assembled at that slot.
Model slot_probe_model(int slot, int width) {
  Model m;
  m.state_dim = 1;
  m.message_net = DenseNet({width, 1});
  std::vector<double> params(width + 1, 0.0);
  params[slot] = 1.0;
  m.message_net.unflatten(params);
  m.readout_net = DenseNet({1, 2});
  return m;
}

}  // namespace

TEST_CASE("build wires the advertised shapes") {
  ModelConfig mc = base_config();
  Rng rng(3);
  const Model m = Model::build(mc, rng);
  CHECK(m.message_input_width() == 2 * 3 + 2 * 2 + 2 * 1);
  CHECK(m.message_net.output_width() == 3);
  CHECK(m.readout_net.input_width() == 3);
  CHECK(m.num_classes() == 2);
  CHECK(m.message_net.num_layers() == 2);

  mc.hidden_layers = 3;
  Rng rng2(3);
  CHECK(Model::build(mc, rng2).message_net.num_layers() == 4);
}

TEST_CASE("build rejects bad configurations") {
  Rng rng(1);
  ModelConfig mc = base_config();
  mc.state_dim = 0;
  CHECK_THROWS_AS(Model::build(mc, rng), NetError);
  mc = base_config();
  mc.num_classes = 1;
  CHECK_THROWS_AS(Model::build(mc, rng), NetError);
  mc = base_config();
  mc.hidden_units = 0;
  CHECK_THROWS_AS(Model::build(mc, rng), NetError);
}

TEST_CASE("the transition reads each slot of the assembled input") {
  const Graph g = two_node_graph();
  const NeighborIndex idx = build_neighbor_index(g);
  Matrix states(2, 1);
  states.at(0, 0) = 0.25;
  states.at(1, 0) = -0.75;

  // input layout: [x_u, l_u, arc(v,u), arc(u,v), x_v, l_v], width 6
  double out = 0.0;
  const std::span<double> out_span(&out, 1);

  // node 1, neighbor u = 0: arc (1,0) is absent, arc (0,1) carries 9
  const std::vector<double> expected_v1 = {0.25, 5.0, 0.0, 9.0, -0.75, 7.0};
  for (int slot = 0; slot < 6; ++slot) {
    Model m = slot_probe_model(slot, 6);
    transition_forward(m, g, idx, states, 1, out_span);
    CHECK(out == expected_v1[slot]);
  }

  // node 0, neighbor u = 1: arc (0,1) carries 9, arc (1,0) is absent
  const std::vector<double> expected_v0 = {-0.75, 7.0, 9.0, 0.0, 0.25, 5.0};
  for (int slot = 0; slot < 6; ++slot) {
    Model m = slot_probe_model(slot, 6);
    transition_forward(m, g, idx, states, 0, out_span);
    CHECK(out == expected_v0[slot]);
  }
}

TEST_CASE("sum aggregation adds neighbor messages, avg divides by degree") {
  // star: center 0 with leaves 1, 2, 3 (undirected, no arc features)
  Graph g;
  g.num_nodes = 4;
  g.arcs = {{0, 1}, {1, 0}, {0, 2}, {2, 0}, {0, 3}, {3, 0}};
  g.node_features = Matrix(4, 1);
  for (int v = 0; v < 4; ++v) g.node_features.at(v, 0) = v;
  const NeighborIndex idx = build_neighbor_index(g);

  ModelConfig mc = base_config();
  mc.state_dim = 3;
  mc.node_feature_dim = 1;
  mc.arc_feature_dim = 0;
  Rng rng_sum(17);
  Model sum_model = Model::build(mc, rng_sum);
  mc.aggregation = Aggregation::Avg;
  Rng rng_avg(17);  // identical weights
  Model avg_model = Model::build(mc, rng_avg);

  Matrix states(4, 3);
  Rng srng(5);
  for (double& x : states.data) x = srng.uniform(-1.0, 1.0);

  std::vector<double> sum_out(3), avg_out(3);
  transition_forward(sum_model, g, idx, states, 0, sum_out);
  transition_forward(avg_model, g, idx, states, 0, avg_out);
  for (int i = 0; i < 3; ++i) {
    CHECK(avg_out[i] == doctest::Approx(sum_out[i] / 3.0).epsilon(1e-14));
  }

  // a leaf has one neighbor: sum and avg coincide
  transition_forward(sum_model, g, idx, states, 2, sum_out);
  transition_forward(avg_model, g, idx, states, 2, avg_out);
  for (int i = 0; i < 3; ++i) {
    CHECK(avg_out[i] == doctest::Approx(sum_out[i]).epsilon(1e-14));
  }
}

TEST_CASE("an isolated node gets the zero transition under both modes") {
  Graph g;
  g.num_nodes = 2;
  g.arcs = {};
  g.node_features = Matrix(2, 1);
  const NeighborIndex idx = build_neighbor_index(g);

  ModelConfig mc = base_config();
  mc.node_feature_dim = 1;
  mc.arc_feature_dim = 0;
  for (Aggregation agg : {Aggregation::Sum, Aggregation::Avg}) {
    mc.aggregation = agg;
    Rng rng(23);
    Model m = Model::build(mc, rng);
    Matrix states(2, 3, 0.7);
    std::vector<double> out(3, 99.0);
    transition_forward(m, g, idx, states, 0, out);
    for (double x : out) CHECK(x == 0.0);
  }
}

TEST_CASE("transition is equivariant under node relabeling") {
  // random digraph on 5 nodes
  Graph g;
  g.num_nodes = 5;
  Rng rng(41);
  for (int u = 0; u < 5; ++u) {
    for (int v = 0; v < 5; ++v) {
      if (u != v && rng.bernoulli(0.5)) g.arcs.push_back({u, v});
    }
  }
  g.node_features = Matrix(5, 2);
  for (double& x : g.node_features.data) x = rng.uniform(-1.0, 1.0);
  g.arc_features = Matrix(static_cast<int>(g.arcs.size()), 1);
  for (double& x : g.arc_features.data) x = rng.uniform(-1.0, 1.0);

  // permutation: perm[v] is the new id of old node v
  const std::vector<int> perm = {3, 0, 4, 1, 2};
  Graph h;
  h.num_nodes = 5;
  for (const Arc& a : g.arcs) h.arcs.push_back({perm[a.from], perm[a.to]});
  h.node_features = Matrix(5, 2);
  for (int v = 0; v < 5; ++v) {
    for (int c = 0; c < 2; ++c) {
      h.node_features.at(perm[v], c) = g.node_features.at(v, c);
    }
  }
  h.arc_features = g.arc_features;  // arc rows keep their order

  ModelConfig mc = base_config();
  mc.node_feature_dim = 2;
  Rng wrng(55);
  Model m = Model::build(mc, wrng);

  Matrix states(5, 3), permuted_states(5, 3);
  for (double& x : states.data) x = rng.uniform(-1.0, 1.0);
  for (int v = 0; v < 5; ++v) {
    for (int c = 0; c < 3; ++c) {
      permuted_states.at(perm[v], c) = states.at(v, c);
    }
  }

  const NeighborIndex gi = build_neighbor_index(g);
  const NeighborIndex hi = build_neighbor_index(h);
  std::vector<double> out_g(3), out_h(3);
  for (int v = 0; v < 5; ++v) {
    transition_forward(m, g, gi, states, v, out_g);
    transition_forward(m, h, hi, permuted_states, perm[v], out_h);
    for (int i = 0; i < 3; ++i) {
      CHECK(out_g[i] == doctest::Approx(out_h[i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("graph readout scores the mean member state") {
  ModelConfig mc = base_config();
  Rng rng(7);
  const Model m = Model::build(mc, rng);

  Matrix states(3, 3);
  Rng srng(8);
  for (double& x : states.data) x = srng.uniform(-1.0, 1.0);

  const std::vector<int> component = {0, 2};
  std::vector<double> mean(3);
  for (int i = 0; i < 3; ++i) {
    mean[i] = (states.at(0, i) + states.at(2, i)) / 2.0;
  }
  std::vector<double> expected(2), got(2);
  readout_node(m, mean, expected);
  readout_graph(m, states, component, got);
  CHECK(got == expected);

  CHECK_THROWS_AS(readout_graph(m, states, std::vector<int>{}, got), NetError);
}

TEST_CASE("checkpoints round-trip the whole model") {
  ModelConfig mc = base_config();
  mc.aggregation = Aggregation::Avg;
  mc.dropout = 0.3;
  Rng rng(61);
  const Model m = Model::build(mc, rng);

  const std::string path = "checkpoint_roundtrip.tmp";
  save_checkpoint(m, path);
  const Model back = load_checkpoint(path);
  std::remove(path.c_str());

  CHECK(back.state_dim == m.state_dim);
  CHECK(back.aggregation == m.aggregation);
  CHECK(back.constraint.variant == m.constraint.variant);
  CHECK(back.constraint.epsilon == m.constraint.epsilon);
  CHECK(back.message_net.dropout_rate() == m.message_net.dropout_rate());
  CHECK(std::vector<double>(back.message_net.params().begin(),
                            back.message_net.params().end()) ==
        m.message_net.flatten());
  CHECK(std::vector<double>(back.readout_net.params().begin(),
                            back.readout_net.params().end()) ==
        m.readout_net.flatten());
}

TEST_CASE("checkpoint loading rejects junk") {
  CHECK_THROWS_AS(load_checkpoint("does_not_exist.tmp"), NetError);

  const std::string path = "checkpoint_junk.tmp";
  {
    std::ofstream out(path);
    out << "not-a-model 9\n";
  }
  CHECK_THROWS_AS(load_checkpoint(path), NetError);
  std::remove(path.c_str());
}
