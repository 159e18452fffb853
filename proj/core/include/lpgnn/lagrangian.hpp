#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lpgnn/adam.hpp"
#include "lpgnn/graph.hpp"
#include "lpgnn/matrix.hpp"
#include "lpgnn/model.hpp"

namespace lpgnn {

// Raised when a run leaves the numerically sane region (non-finite values or
// runaway multipliers). Training treats it as a failed run, never a retry.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |V| x s matrices: row v holds node v's free state / multiplier vector.
// Multipliers are vector-valued, one component per state component.
using StateVariables = Matrix;
using Multipliers = Matrix;

// Which supervised term the Lagrangian carries. `None` is the inference
// setting: constraints only, targets ignored even if the graph has them.
struct LossSpec {
  enum class Kind { None, NodeClassification, GraphClassification };
  Kind kind = Kind::None;
  int num_classes = 0;

  // GraphClassification only: contiguous node ranges with one target each.
  std::vector<std::pair<int, int>> component_ranges;
  std::vector<int> component_targets;

  static LossSpec none() { return {}; }
  static LossSpec node_classification(int num_classes);
  static LossSpec graph_classification(int num_classes,
                                       std::vector<std::pair<int, int>> ranges,
                                       std::vector<int> targets);
};

struct LagrangianParts {
  double total = 0.0;       // loss + constraint terms
  double loss = 0.0;        // sum over supervised units of cross-entropy
  double constraint = 0.0;  // sum_v lambda_v . G(x_v - f_a(v))
  double mean_abs_residual = 0.0;
  double max_abs_residual = 0.0;
};

// Straight-line evaluation of the Lagrangian
//   sum_{v in S} CE(readout(x_v), y_v) + sum_{v in V} lambda_v . G(x_v - f_a(v))
// (loss term per component for graph tasks). Kept free of any gradient
// machinery so finite-difference checks can lean on it.
LagrangianParts lagrangian_value(const Model& m, const Graph& g,
                                 const NeighborIndex& idx,
                                 const StateVariables& states,
                                 const Multipliers& multipliers,
                                 const LossSpec& loss,
                                 Rng* dropout_rng = nullptr);

struct Gradients {
  Matrix d_states;                  // descent direction source
  Matrix d_multipliers;             // equals G(residual) row-wise, ascent
  std::vector<double> d_theta_message;
  std::vector<double> d_theta_readout;
  LagrangianParts value;            // evaluated on the same pass / dropout draw
};

// All four analytic gradient blocks of the Lagrangian, realized through
// cotangent propagation: per node w the constraint cotangent is
// lambda_w ⊙ G'(x_w - f_a(w)); it feeds the residual identity term into
// d_states[w] and, negated, the message-net vjp for every neighbor pair,
// which scatters into d_states rows and d_theta_message.
// Set want_theta = false to skip the parameter blocks (state-only updates).
Gradients gradients(const Model& m, const Graph& g, const NeighborIndex& idx,
                    const StateVariables& states, const Multipliers& multipliers,
                    const LossSpec& loss, Rng* dropout_rng = nullptr,
                    bool want_theta = true);

struct LearningRates {
  double theta = 1e-3;
  double states = 1e-2;
  double multipliers = 1e-2;
};

// Adam buffers for the four variable groups of one training run.
struct SaddleOptimizer {
  AdamState theta_message;
  AdamState theta_readout;
  AdamState states;
  AdamState multipliers;

  SaddleOptimizer(const Model& m, int num_nodes);
};

struct StepDiagnostics {
  double loss = 0.0;
  double lagrangian = 0.0;
  double mean_abs_residual = 0.0;
  double max_abs_multiplier = 0.0;
};

// One descent-ascent step: Adam descent on both parameter vectors and the
// states, Adam ascent (negated gradient) on the multipliers. Throws
// DivergenceError when the Lagrangian goes non-finite or max |lambda|
// exceeds 1e6; the caller marks the run failed.
StepDiagnostics train_step(Model& m, const Graph& g, const NeighborIndex& idx,
                           StateVariables& states, Multipliers& multipliers,
                           const LossSpec& loss, SaddleOptimizer& opt,
                           const LearningRates& lr, Rng* dropout_rng = nullptr);

// Constraint-only step with frozen weights; updates states/multipliers in
// place. Used for test-time state optimization and for tracking held-out
// states during training.
StepDiagnostics state_step(const Model& m, const Graph& g,
                           const NeighborIndex& idx, StateVariables& states,
                           Multipliers& multipliers, AdamState& state_opt,
                           AdamState& multiplier_opt, double lr_states,
                           double lr_multipliers);

struct InferenceResult {
  StateVariables states;          // best-residual iterate seen
  double mean_abs_residual = 0.0;
  int steps_used = 0;
  bool converged = false;         // mean residual <= tol within the budget
};

// Test-time state optimization: fresh zero states/multipliers driven to
// constraint satisfaction with the model frozen and dropout off. When the
// budget runs out the best-residual states are returned, converged = false.
InferenceResult infer_states(const Model& m, const Graph& g,
                             const NeighborIndex& idx, int steps,
                             double lr_states, double lr_multipliers,
                             double tol = 1e-3);

// Softmax cross-entropy over logits; also the derivative wrt logits
// (softmax - one_hot(target)), shared by training and evaluation.
double cross_entropy(std::span<const double> logits, int target);
void cross_entropy_cotangent(std::span<const double> logits, int target,
                             std::span<double> out);
int argmax(std::span<const double> values);

}  // namespace lpgnn
