#include "lpgnn/adam.hpp"

#include <cmath>
#include <string>

namespace lpgnn {

void adam_step(std::span<double> params, std::span<const double> grad,
               AdamState& state, double lr) {
  if (params.size() != grad.size() || params.size() != state.m.size()) {
    throw OptimizerError("adam_step: size mismatch (params " +
                         std::to_string(params.size()) + ", grad " +
                         std::to_string(grad.size()) + ", state " +
                         std::to_string(state.m.size()) + ")");
  }
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw OptimizerError("adam_step: non-finite gradient at index " +
                           std::to_string(i));
    }
  }

  state.t += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grad[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
}

}  // namespace lpgnn
