#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "lpgnn/rng.hpp"

namespace lpgnn {

struct NetError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Activations recorded by a forward pass, sufficient for an exact vjp.
struct ForwardCache {
  std::vector<double> input;
  std::vector<std::vector<double>> hidden;      // tanh outputs, pre-dropout
  std::vector<std::vector<double>> drop_scale;  // 0 or 1/keep; empty rows when off
  std::vector<double> output;
  bool valid = false;
};

// Fully connected feedforward net: tanh hidden layers, linear output.
// Parameters live in one flat vector ([W0 | b0 | W1 | b1 | ...], weights
// row-major out x in) so the optimizer and checkpoints see a single span.
class DenseNet {
 public:
  DenseNet() = default;
  DenseNet(std::vector<int> widths, double dropout_rate = 0.0);

  // Uniform weights in [-a, a], a = sqrt(6 / (fan_in + fan_out)); zero biases.
  void init_params(Rng& rng);

  int input_width() const { return widths_.front(); }
  int output_width() const { return widths_.back(); }
  int num_layers() const { return static_cast<int>(widths_.size()) - 1; }
  const std::vector<int>& widths() const { return widths_; }
  double dropout_rate() const { return dropout_rate_; }

  int param_count() const { return static_cast<int>(params_.size()); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Flat copies of the parameter vector; unflatten checks the length.
  std::vector<double> flatten() const { return params_; }
  void unflatten(std::span<const double> flat);

  // Forward pass. With a non-null rng and dropout_rate > 0, hidden units are
  // dropped with inverted scaling and the mask lands in the cache so vjp()
  // differentiates the same stochastic function. Null rng = inference.
  void forward(std::span<const double> input, ForwardCache& cache,
               Rng* dropout_rng = nullptr) const;

  // Convenience forward without cache reuse.
  std::vector<double> forward(std::span<const double> input,
                              Rng* dropout_rng = nullptr) const;

  // Exact reverse-mode pass for the forward recorded in `cache`.
  // Accumulates scale * d(out.cotangent)/d(params) into param_grad (skipped
  // when empty) and scale * d/d(input) into input_grad (skipped when empty).
  void vjp(const ForwardCache& cache, std::span<const double> output_cotangent,
           double scale, std::span<double> param_grad,
           std::span<double> input_grad) const;

  // Offsets into the flat parameter vector, exposed for checkpoint I/O.
  int weight_offset(int layer) const { return w_offset_[layer]; }
  int bias_offset(int layer) const { return b_offset_[layer]; }

 private:
  std::vector<int> widths_;
  double dropout_rate_ = 0.0;
  std::vector<double> params_;
  std::vector<int> w_offset_;
  std::vector<int> b_offset_;
};

}  // namespace lpgnn
