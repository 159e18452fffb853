#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace lpgnn {

struct OptimizerError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// First/second moment buffers for one parameter vector.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// Standard bias-corrected Adam step, minimizing along `grad`. For gradient
// ascent, pass the negated gradient. Throws OptimizerError on shape mismatch
// or non-finite gradient entries (the index is reported).
void adam_step(std::span<double> params, std::span<const double> grad,
               AdamState& state, double lr);

}  // namespace lpgnn
