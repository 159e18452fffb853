#include "lpgnn/lagrangian.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"

using namespace lpgnn;

TEST_CASE("cross entropy matches the log-softmax identity") {
  const std::vector<double> logits = {2.0, -1.0, 0.5};
  for (int target = 0; target < 3; ++target) {
    double denom = 0.0;
    for (double z : logits) denom += std::exp(z);
    const double expected = -std::log(std::exp(logits[target]) / denom);
    CHECK(cross_entropy(logits, target) ==
          doctest::Approx(expected).epsilon(1e-14));
  }

  // shift invariance and overflow safety
  const std::vector<double> shifted = {1002.0, 999.0, 1000.5};
  CHECK(cross_entropy(shifted, 1) ==
        doctest::Approx(cross_entropy(logits, 1)).epsilon(1e-12));
  CHECK(std::isfinite(cross_entropy(std::vector<double>{10000.0, 0.0}, 1)));
}

TEST_CASE("cross entropy cotangent is softmax minus one-hot") {
  const std::vector<double> logits = {0.3, -0.9, 1.7};
  std::vector<double> cot(3);
  cross_entropy_cotangent(logits, 2, cot);

  double denom = 0.0;
  for (double z : logits) denom += std::exp(z);
  for (int i = 0; i < 3; ++i) {
    const double soft = std::exp(logits[i]) / denom;
    const double expected = soft - (i == 2 ? 1.0 : 0.0);
    CHECK(cot[i] == doctest::Approx(expected).epsilon(1e-14));
  }
  CHECK(cot[0] + cot[1] + cot[2] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("argmax picks the first maximal entry") {
  CHECK(argmax(std::vector<double>{1.0, 3.0, 2.0}) == 1);
  CHECK(argmax(std::vector<double>{5.0, 5.0}) == 0);
  CHECK(argmax(std::vector<double>{-2.0}) == 0);
}

TEST_CASE("analytic gradients match central differences on all blocks") {
  const std::vector<std::pair<GVariant, double>> variants = {
      {GVariant::Lin, 0.0},      {GVariant::LinEps, 0.01},
      {GVariant::Abs, 0.0},      {GVariant::AbsEps, 0.01},
      {GVariant::Squared, 0.0},
  };
  for (const auto& [variant, eps] : variants) {
    for (Aggregation agg : {Aggregation::Sum, Aggregation::Avg}) {
      for (std::uint64_t seed : {1u, 2u, 3u}) {
        oracle::GradientInstance inst =
            oracle::make_gradient_instance(variant, eps, agg, seed);
        const oracle::GradientCheck check = oracle::check_all_gradients(
            inst.m, inst.g, inst.idx, inst.states, inst.multipliers, inst.loss);
        INFO("variant=", to_string(variant), " agg=", to_string(agg),
             " seed=", seed, " worst=", check.worst_block);
        CHECK(check.max_rel_err <= 1e-4);
      }
    }
  }
}

TEST_CASE("gradients are exact for the graph-level loss too") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::Squared, 0.0, Aggregation::Sum, 77, /*n=*/6);
  // two components: nodes [0,3) and [3,6)
  inst.loss = LossSpec::graph_classification(3, {{0, 3}, {3, 6}}, {2, 0});
  const oracle::GradientCheck check = oracle::check_all_gradients(
      inst.m, inst.g, inst.idx, inst.states, inst.multipliers, inst.loss);
  INFO("worst=", check.worst_block);
  CHECK(check.max_rel_err <= 1e-4);
}

TEST_CASE("the multiplier gradient is the shaped residual, exactly") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::AbsEps, 0.01, Aggregation::Sum, 5);
  const Gradients grads = gradients(inst.m, inst.g, inst.idx, inst.states,
                                    inst.multipliers, inst.loss);

  std::vector<double> fa(inst.m.state_dim);
  for (int v = 0; v < inst.g.num_nodes; ++v) {
    transition_forward(inst.m, inst.g, inst.idx, inst.states, v, fa);
    for (int i = 0; i < inst.m.state_dim; ++i) {
      const double r = inst.states.at(v, i) - fa[i];
      CHECK(grads.d_multipliers.at(v, i) == inst.m.constraint.value(r));
    }
  }
}

TEST_CASE("value-only evaluation agrees with the gradient pass") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::LinEps, 0.01, Aggregation::Avg, 8);
  const LagrangianParts parts = lagrangian_value(
      inst.m, inst.g, inst.idx, inst.states, inst.multipliers, inst.loss);
  const Gradients grads = gradients(inst.m, inst.g, inst.idx, inst.states,
                                    inst.multipliers, inst.loss);
  CHECK(parts.total == doctest::Approx(grads.value.total).epsilon(1e-14));
  CHECK(parts.loss == doctest::Approx(grads.value.loss).epsilon(1e-14));
  CHECK(parts.constraint ==
        doctest::Approx(grads.value.constraint).epsilon(1e-14));
  CHECK(parts.mean_abs_residual == grads.value.mean_abs_residual);
  CHECK(parts.max_abs_residual == grads.value.max_abs_residual);
  CHECK(parts.total == parts.loss + parts.constraint);
}

TEST_CASE("skipping the parameter blocks leaves the rest untouched") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::Squared, 0.0, Aggregation::Sum, 12);
  const Gradients full = gradients(inst.m, inst.g, inst.idx, inst.states,
                                   inst.multipliers, inst.loss);
  const Gradients slim = gradients(inst.m, inst.g, inst.idx, inst.states,
                                   inst.multipliers, inst.loss, nullptr,
                                   /*want_theta=*/false);
  CHECK(slim.d_theta_message.empty());
  CHECK(slim.d_theta_readout.empty());
  CHECK(slim.d_states.data == full.d_states.data);
  CHECK(slim.d_multipliers.data == full.d_multipliers.data);
  CHECK_FALSE(full.d_theta_message.empty());
}

TEST_CASE("one descent-ascent step moves every variable group") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::AbsEps, 0.01, Aggregation::Sum, 19);
  SaddleOptimizer opt(inst.m, inst.g.num_nodes);
  const LearningRates lr;

  const std::vector<double> theta_before = inst.m.message_net.flatten();
  const std::vector<double> states_before = inst.states.data;
  const std::vector<double> mult_before = inst.multipliers.data;

  const StepDiagnostics diag =
      train_step(inst.m, inst.g, inst.idx, inst.states, inst.multipliers,
                 inst.loss, opt, lr);
  CHECK(std::isfinite(diag.lagrangian));
  CHECK(diag.loss > 0.0);
  CHECK(diag.mean_abs_residual > 0.0);
  CHECK(inst.m.message_net.flatten() != theta_before);
  CHECK(inst.states.data != states_before);
  CHECK(inst.multipliers.data != mult_before);
}

TEST_CASE("the multiplier update ascends while states descend") {
  // A hand-built setting where the gradient signs are known: zero weights
  // make f_a = 0, so the residual is the state itself. With G = squared,
  // dL/dlambda = x^2 > 0 and dL/dx = 2*lambda*x.
  Model m;
  m.state_dim = 1;
  m.message_net = DenseNet({2, 1});  // width: 2*1 states + 0 features
  m.readout_net = DenseNet({1, 2});
  m.constraint = ConstraintFunction(GVariant::Squared, 0.0);

  Graph g;
  g.num_nodes = 2;
  g.arcs = {{0, 1}, {1, 0}};
  g.node_features = Matrix(2, 0);
  const NeighborIndex idx = build_neighbor_index(g);

  StateVariables states(2, 1);
  states.at(0, 0) = 0.5;
  states.at(1, 0) = -0.5;
  Multipliers multipliers(2, 1);
  multipliers.at(0, 0) = 1.0;
  multipliers.at(1, 0) = 1.0;

  SaddleOptimizer opt(m, 2);
  train_step(m, g, idx, states, multipliers, LossSpec::none(), opt,
             LearningRates{});

  // lambda climbs toward enforcing x = 0; x slides toward it
  CHECK(multipliers.at(0, 0) > 1.0);
  CHECK(multipliers.at(1, 0) > 1.0);
  CHECK(states.at(0, 0) < 0.5);
  CHECK(states.at(1, 0) > -0.5);
}

TEST_CASE("divergence guards fire instead of silently continuing") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::Lin, 0.0, Aggregation::Sum, 23);
  SaddleOptimizer opt(inst.m, inst.g.num_nodes);

  SUBCASE("runaway multipliers") {
    inst.multipliers.at(0, 0) = 2e6;
    CHECK_THROWS_AS(train_step(inst.m, inst.g, inst.idx, inst.states,
                               inst.multipliers, inst.loss, opt,
                               LearningRates{}),
                    DivergenceError);
  }
  SUBCASE("non-finite objective") {
    inst.states.at(0, 0) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(train_step(inst.m, inst.g, inst.idx, inst.states,
                               inst.multipliers, inst.loss, opt,
                               LearningRates{}),
                    DivergenceError);
  }
}

TEST_CASE("state-only steps freeze the weights and ignore the loss") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::AbsEps, 0.01, Aggregation::Sum, 29);
  AdamState sopt(inst.states.data.size());
  AdamState mopt(inst.multipliers.data.size());

  const std::vector<double> msg_before = inst.m.message_net.flatten();
  const std::vector<double> ro_before = inst.m.readout_net.flatten();
  const StepDiagnostics diag =
      state_step(inst.m, inst.g, inst.idx, inst.states, inst.multipliers,
                 sopt, mopt, 1e-2, 1e-2);

  CHECK(diag.loss == 0.0);  // supervision is not consulted
  CHECK(inst.m.message_net.flatten() == msg_before);
  CHECK(inst.m.readout_net.flatten() == ro_before);
}

TEST_CASE("a model whose transition is identically zero infers instantly") {
  ModelConfig mc;
  mc.state_dim = 2;
  mc.node_feature_dim = 1;
  mc.num_classes = 2;
  mc.hidden_units = 3;
  mc.constraint = ConstraintFunction(GVariant::Abs, 0.0);
  Rng rng(31);
  Model m = Model::build(mc, rng);
  // zero weights: every message is zero, so zero states satisfy x = f_a
  std::fill(m.message_net.params().begin(), m.message_net.params().end(), 0.0);

  Graph g;
  g.num_nodes = 3;
  g.arcs = {{0, 1}, {1, 0}, {1, 2}, {2, 1}};
  g.node_features = Matrix(3, 1, 1.0);
  const NeighborIndex idx = build_neighbor_index(g);

  const InferenceResult result = infer_states(m, g, idx, 50, 1e-2, 1e-2);
  CHECK(result.converged);
  CHECK(result.steps_used == 0);
  CHECK(result.mean_abs_residual == 0.0);
  for (double x : result.states.data) CHECK(x == 0.0);
}

TEST_CASE("inference returns its best iterate when the budget runs out") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::Squared, 0.0, Aggregation::Sum, 37);
  const InferenceResult result =
      infer_states(inst.m, inst.g, inst.idx, 5, 1e-2, 1e-2, /*tol=*/0.0);
  CHECK_FALSE(result.converged);
  CHECK(result.steps_used == 5);
  CHECK(result.states.rows == inst.g.num_nodes);
  CHECK(std::isfinite(result.mean_abs_residual));
  CHECK(result.mean_abs_residual >= 0.0);

  // more budget never hurts the tracked best residual
  const InferenceResult longer =
      infer_states(inst.m, inst.g, inst.idx, 200, 1e-2, 1e-2, /*tol=*/0.0);
  CHECK(longer.mean_abs_residual <= result.mean_abs_residual);
}

TEST_CASE("the objective is invariant under node relabeling") {
  oracle::GradientInstance inst = oracle::make_gradient_instance(
      GVariant::AbsEps, 0.01, Aggregation::Avg, 43);
  const LagrangianParts before = lagrangian_value(
      inst.m, inst.g, inst.idx, inst.states, inst.multipliers, inst.loss);

  const int n = inst.g.num_nodes;
  std::vector<int> perm(n);
  for (int v = 0; v < n; ++v) perm[v] = (v + 2) % n;

  Graph h;
  h.num_nodes = n;
  for (const Arc& a : inst.g.arcs) h.arcs.push_back({perm[a.from], perm[a.to]});
  h.node_features = Matrix(n, inst.g.feature_dim());
  Matrix states(n, inst.m.state_dim), multipliers(n, inst.m.state_dim);
  for (int v = 0; v < n; ++v) {
    for (int c = 0; c < inst.g.feature_dim(); ++c) {
      h.node_features.at(perm[v], c) = inst.g.node_features.at(v, c);
    }
    for (int c = 0; c < inst.m.state_dim; ++c) {
      states.at(perm[v], c) = inst.states.at(v, c);
      multipliers.at(perm[v], c) = inst.multipliers.at(v, c);
    }
  }
  h.arc_features = inst.g.arc_features;
  std::vector<std::pair<int, int>> sup;
  for (std::size_t si = 0; si < inst.g.supervised_nodes.size(); ++si) {
    sup.push_back({perm[inst.g.supervised_nodes[si]], inst.g.node_targets[si]});
  }
  std::sort(sup.begin(), sup.end());
  for (const auto& [v, y] : sup) {
    h.supervised_nodes.push_back(v);
    h.node_targets.push_back(y);
  }

  const NeighborIndex hi = build_neighbor_index(h);
  const LagrangianParts after =
      lagrangian_value(inst.m, h, hi, states, multipliers, inst.loss);
  CHECK(after.total == doctest::Approx(before.total).epsilon(1e-12));
  CHECK(after.loss == doctest::Approx(before.loss).epsilon(1e-12));
  CHECK(after.max_abs_residual ==
        doctest::Approx(before.max_abs_residual).epsilon(1e-12));
}
