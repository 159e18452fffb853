#include "lpgnn/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lpgnn {

LossSpec LossSpec::node_classification(int num_classes) {
  LossSpec spec;
  spec.kind = Kind::NodeClassification;
  spec.num_classes = num_classes;
  return spec;
}

LossSpec LossSpec::graph_classification(
    int num_classes, std::vector<std::pair<int, int>> ranges,
    std::vector<int> targets) {
  if (ranges.size() != targets.size()) {
    throw std::invalid_argument("one target per component range required");
  }
  LossSpec spec;
  spec.kind = Kind::GraphClassification;
  spec.num_classes = num_classes;
  spec.component_ranges = std::move(ranges);
  spec.component_targets = std::move(targets);
  return spec;
}

double cross_entropy(std::span<const double> logits, int target) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - zmax);
  return zmax + std::log(sum) - logits[target];
}

void cross_entropy_cotangent(std::span<const double> logits, int target,
                             std::span<double> out) {
  const double zmax = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - zmax);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
  out[target] -= 1.0;
}

int argmax(std::span<const double> values) {
  return static_cast<int>(
      std::max_element(values.begin(), values.end()) - values.begin());
}

namespace {

void mean_component_state(const Matrix& states, int begin, int end, int s,
                          std::span<double> out) {
  std::fill(out.begin(), out.end(), 0.0);
  for (int v = begin; v < end; ++v) {
    const double* row = states.row(v);
    for (int i = 0; i < s; ++i) out[i] += row[i];
  }
  const double inv = 1.0 / static_cast<double>(end - begin);
  for (double& x : out) x *= inv;
}

}  // namespace

LagrangianParts lagrangian_value(const Model& m, const Graph& g,
                                 const NeighborIndex& idx,
                                 const StateVariables& states,
                                 const Multipliers& multipliers,
                                 const LossSpec& loss, Rng* dropout_rng) {
  const int n = g.num_nodes;
  const int s = m.state_dim;
  LagrangianParts parts;

  std::vector<double> fa(s), gr(s);
  double abs_sum = 0.0;
  for (int v = 0; v < n; ++v) {
    transition_forward(m, g, idx, states, v, fa, nullptr, dropout_rng);
    const double* x = states.row(v);
    const double* lam = multipliers.row(v);
    for (int i = 0; i < s; ++i) {
      const double r = x[i] - fa[i];
      parts.constraint += lam[i] * m.constraint.value(r);
      abs_sum += std::fabs(r);
      parts.max_abs_residual = std::max(parts.max_abs_residual, std::fabs(r));
    }
  }
  if (n > 0) parts.mean_abs_residual = abs_sum / (static_cast<double>(n) * s);

  if (loss.kind == LossSpec::Kind::NodeClassification) {
    std::vector<double> logits(m.num_classes());
    ForwardCache cache;
    for (std::size_t si = 0; si < g.supervised_nodes.size(); ++si) {
      const int v = g.supervised_nodes[si];
      m.readout_net.forward(std::span<const double>(states.row(v), s), cache,
                            dropout_rng);
      parts.loss += cross_entropy(cache.output, g.node_targets[si]);
    }
  } else if (loss.kind == LossSpec::Kind::GraphClassification) {
    std::vector<double> mean(s);
    ForwardCache cache;
    for (std::size_t ci = 0; ci < loss.component_ranges.size(); ++ci) {
      auto [begin, end] = loss.component_ranges[ci];
      mean_component_state(states, begin, end, s, mean);
      m.readout_net.forward(mean, cache, dropout_rng);
      parts.loss += cross_entropy(cache.output, loss.component_targets[ci]);
    }
  }

  parts.total = parts.loss + parts.constraint;
  return parts;
}

Gradients gradients(const Model& m, const Graph& g, const NeighborIndex& idx,
                    const StateVariables& states, const Multipliers& multipliers,
                    const LossSpec& loss, Rng* dropout_rng, bool want_theta) {
  const int n = g.num_nodes;
  const int s = m.state_dim;
  const int mf = g.feature_dim();
  const int d = g.arc_feature_dim();

  Gradients out;
  out.d_states = Matrix(n, s);
  out.d_multipliers = Matrix(n, s);
  if (want_theta) {
    out.d_theta_message.assign(m.message_net.param_count(), 0.0);
    out.d_theta_readout.assign(m.readout_net.param_count(), 0.0);
  }
  std::span<double> msg_param_grad =
      want_theta ? std::span<double>(out.d_theta_message) : std::span<double>();
  std::span<double> ro_param_grad =
      want_theta ? std::span<double>(out.d_theta_readout) : std::span<double>();

  std::vector<double> fa(s), cot(s);
  std::vector<double> input_grad(m.message_input_width());
  TransitionCache cache;
  double abs_sum = 0.0;
  const int x_v_offset = s + mf + 2 * d;

  for (int w = 0; w < n; ++w) {
    transition_forward(m, g, idx, states, w, fa, &cache, dropout_rng);
    const double* x = states.row(w);
    const double* lam = multipliers.row(w);
    double* dx_w = out.d_states.row(w);
    double* dlam_w = out.d_multipliers.row(w);

    // Residual identity part and the exact multiplier gradient G(r).
    for (int i = 0; i < s; ++i) {
      const double r = x[i] - fa[i];
      const double gval = m.constraint.value(r);
      dlam_w[i] = gval;
      out.value.constraint += lam[i] * gval;
      cot[i] = lam[i] * m.constraint.derivative(r);
      dx_w[i] += cot[i];
      abs_sum += std::fabs(r);
      out.value.max_abs_residual =
          std::max(out.value.max_abs_residual, std::fabs(r));
    }

    // Back through -f_a(w): one message-net vjp per neighbor, scattering the
    // input gradient into the x_u and x_w slices of the concatenated input.
    const auto& ne = idx.neighbors[w];
    const double scale =
        m.aggregation == Aggregation::Avg && !ne.empty()
            ? -1.0 / static_cast<double>(ne.size())
            : -1.0;
    for (std::size_t k = 0; k < ne.size(); ++k) {
      std::fill(input_grad.begin(), input_grad.end(), 0.0);
      m.message_net.vjp(cache.per_neighbor[k], cot, scale, msg_param_grad,
                        input_grad);
      double* dx_u = out.d_states.row(ne[k]);
      for (int i = 0; i < s; ++i) {
        dx_u[i] += input_grad[i];
        dx_w[i] += input_grad[x_v_offset + i];
      }
    }
  }
  if (n > 0) out.value.mean_abs_residual = abs_sum / (static_cast<double>(n) * s);

  if (loss.kind == LossSpec::Kind::NodeClassification) {
    std::vector<double> ce_cot(m.num_classes());
    std::vector<double> state_grad(s);
    ForwardCache ro_cache;
    for (std::size_t si = 0; si < g.supervised_nodes.size(); ++si) {
      const int v = g.supervised_nodes[si];
      m.readout_net.forward(std::span<const double>(states.row(v), s), ro_cache,
                            dropout_rng);
      out.value.loss += cross_entropy(ro_cache.output, g.node_targets[si]);
      cross_entropy_cotangent(ro_cache.output, g.node_targets[si], ce_cot);
      std::fill(state_grad.begin(), state_grad.end(), 0.0);
      m.readout_net.vjp(ro_cache, ce_cot, 1.0, ro_param_grad, state_grad);
      double* dx_v = out.d_states.row(v);
      for (int i = 0; i < s; ++i) dx_v[i] += state_grad[i];
    }
  } else if (loss.kind == LossSpec::Kind::GraphClassification) {
    std::vector<double> ce_cot(m.num_classes());
    std::vector<double> mean(s), mean_grad(s);
    ForwardCache ro_cache;
    for (std::size_t ci = 0; ci < loss.component_ranges.size(); ++ci) {
      auto [begin, end] = loss.component_ranges[ci];
      mean_component_state(states, begin, end, s, mean);
      m.readout_net.forward(mean, ro_cache, dropout_rng);
      out.value.loss += cross_entropy(ro_cache.output, loss.component_targets[ci]);
      cross_entropy_cotangent(ro_cache.output, loss.component_targets[ci], ce_cot);
      std::fill(mean_grad.begin(), mean_grad.end(), 0.0);
      m.readout_net.vjp(ro_cache, ce_cot, 1.0, ro_param_grad, mean_grad);
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (int v = begin; v < end; ++v) {
        double* dx_v = out.d_states.row(v);
        for (int i = 0; i < s; ++i) dx_v[i] += inv * mean_grad[i];
      }
    }
  }

  out.value.total = out.value.loss + out.value.constraint;
  return out;
}

SaddleOptimizer::SaddleOptimizer(const Model& m, int num_nodes)
    : theta_message(static_cast<std::size_t>(m.message_net.param_count())),
      theta_readout(static_cast<std::size_t>(m.readout_net.param_count())),
      states(static_cast<std::size_t>(num_nodes) * m.state_dim),
      multipliers(static_cast<std::size_t>(num_nodes) * m.state_dim) {}

namespace {

constexpr double kMultiplierCeiling = 1e6;

double max_abs(std::span<const double> values) {
  double best = 0.0;
  for (double v : values) best = std::max(best, std::fabs(v));
  return best;
}

void check_value_finite(double total) {
  if (!std::isfinite(total)) {
    throw DivergenceError("non-finite objective value: " +
                          std::to_string(total));
  }
}

void check_multipliers(const Multipliers& multipliers) {
  const double peak = max_abs(multipliers.data);
  if (!std::isfinite(peak) || peak > kMultiplierCeiling) {
    throw DivergenceError("multiplier magnitude " + std::to_string(peak) +
                          " exceeded the divergence ceiling");
  }
}

}  // namespace

StepDiagnostics train_step(Model& m, const Graph& g, const NeighborIndex& idx,
                           StateVariables& states, Multipliers& multipliers,
                           const LossSpec& loss, SaddleOptimizer& opt,
                           const LearningRates& lr, Rng* dropout_rng) {
  Gradients grads =
      gradients(m, g, idx, states, multipliers, loss, dropout_rng, true);
  check_value_finite(grads.value.total);

  try {
    adam_step(m.message_net.params(), grads.d_theta_message, opt.theta_message,
              lr.theta);
    adam_step(m.readout_net.params(), grads.d_theta_readout, opt.theta_readout,
              lr.theta);
    adam_step(states.data, grads.d_states.data, opt.states, lr.states);
    for (double& v : grads.d_multipliers.data) v = -v;  // ascent
    adam_step(multipliers.data, grads.d_multipliers.data, opt.multipliers,
              lr.multipliers);
  } catch (const OptimizerError& e) {
    throw DivergenceError(e.what());
  }
  check_multipliers(multipliers);

  StepDiagnostics diag;
  diag.loss = grads.value.loss;
  diag.lagrangian = grads.value.total;
  diag.mean_abs_residual = grads.value.mean_abs_residual;
  diag.max_abs_multiplier = max_abs(multipliers.data);
  return diag;
}

StepDiagnostics state_step(const Model& m, const Graph& g,
                           const NeighborIndex& idx, StateVariables& states,
                           Multipliers& multipliers, AdamState& state_opt,
                           AdamState& multiplier_opt, double lr_states,
                           double lr_multipliers) {
  Gradients grads = gradients(m, g, idx, states, multipliers, LossSpec::none(),
                              nullptr, false);
  check_value_finite(grads.value.total);

  try {
    adam_step(states.data, grads.d_states.data, state_opt, lr_states);
    for (double& v : grads.d_multipliers.data) v = -v;
    adam_step(multipliers.data, grads.d_multipliers.data, multiplier_opt,
              lr_multipliers);
  } catch (const OptimizerError& e) {
    throw DivergenceError(e.what());
  }
  check_multipliers(multipliers);

  StepDiagnostics diag;
  diag.lagrangian = grads.value.total;
  diag.mean_abs_residual = grads.value.mean_abs_residual;
  diag.max_abs_multiplier = max_abs(multipliers.data);
  return diag;
}

InferenceResult infer_states(const Model& m, const Graph& g,
                             const NeighborIndex& idx, int steps,
                             double lr_states, double lr_multipliers,
                             double tol) {
  const int n = g.num_nodes;
  StateVariables states(n, m.state_dim);
  Multipliers multipliers(n, m.state_dim);
  AdamState state_opt(states.data.size());
  AdamState multiplier_opt(multipliers.data.size());

  InferenceResult result;
  result.states = states;
  result.mean_abs_residual = std::numeric_limits<double>::infinity();

  for (int t = 0; t < steps; ++t) {
    Matrix before = states;
    StepDiagnostics diag = state_step(m, g, idx, states, multipliers, state_opt,
                                      multiplier_opt, lr_states, lr_multipliers);
    if (diag.mean_abs_residual < result.mean_abs_residual) {
      result.mean_abs_residual = diag.mean_abs_residual;
      result.states = std::move(before);
    }
    result.steps_used = t;
    if (diag.mean_abs_residual <= tol) {
      result.converged = true;
      return result;
    }
    result.steps_used = t + 1;
  }

  // The budget ran out (or was zero): the final iterate is still a candidate.
  LagrangianParts parts =
      lagrangian_value(m, g, idx, states, multipliers, LossSpec::none());
  if (parts.mean_abs_residual < result.mean_abs_residual) {
    result.mean_abs_residual = parts.mean_abs_residual;
    result.states = std::move(states);
  }
  result.converged = result.mean_abs_residual <= tol;
  return result;
}

}  // namespace lpgnn
