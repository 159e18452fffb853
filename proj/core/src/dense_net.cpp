#include "lpgnn/dense_net.hpp"

#include <cmath>
#include <string>

namespace lpgnn {

DenseNet::DenseNet(std::vector<int> widths, double dropout_rate)
    : widths_(std::move(widths)), dropout_rate_(dropout_rate) {
  if (widths_.size() < 2) throw NetError("need at least input and output widths");
  for (int w : widths_) {
    if (w <= 0) throw NetError("layer width must be positive");
  }
  if (dropout_rate_ < 0.0 || dropout_rate_ >= 1.0) {
    throw NetError("dropout rate must lie in [0, 1)");
  }
  int offset = 0;
  for (int l = 0; l < num_layers(); ++l) {
    w_offset_.push_back(offset);
    offset += widths_[l + 1] * widths_[l];
    b_offset_.push_back(offset);
    offset += widths_[l + 1];
  }
  params_.assign(offset, 0.0);
}

void DenseNet::init_params(Rng& rng) {
  for (int l = 0; l < num_layers(); ++l) {
    const int fan_in = widths_[l];
    const int fan_out = widths_[l + 1];
    const double a = std::sqrt(6.0 / (fan_in + fan_out));
    double* w = params_.data() + w_offset_[l];
    for (int i = 0; i < fan_out * fan_in; ++i) w[i] = rng.uniform(-a, a);
    double* b = params_.data() + b_offset_[l];
    for (int i = 0; i < fan_out; ++i) b[i] = 0.0;
  }
}

void DenseNet::unflatten(std::span<const double> flat) {
  if (flat.size() != params_.size()) {
    throw NetError("parameter vector has length " + std::to_string(flat.size()) +
                   ", expected " + std::to_string(params_.size()));
  }
  params_.assign(flat.begin(), flat.end());
}

void DenseNet::forward(std::span<const double> input, ForwardCache& cache,
                       Rng* dropout_rng) const {
  if (static_cast<int>(input.size()) != input_width()) {
    throw NetError("input has width " + std::to_string(input.size()) +
                   ", expected " + std::to_string(input_width()));
  }
  const int layers = num_layers();
  cache.input.assign(input.begin(), input.end());
  cache.hidden.assign(layers - 1, {});
  cache.drop_scale.assign(layers - 1, {});

  const bool drop = dropout_rng != nullptr && dropout_rate_ > 0.0;
  const double keep = 1.0 - dropout_rate_;

  std::vector<double> act(input.begin(), input.end());
  for (int l = 0; l < layers; ++l) {
    const int in_w = widths_[l];
    const int out_w = widths_[l + 1];
    const double* w = params_.data() + w_offset_[l];
    const double* b = params_.data() + b_offset_[l];
    std::vector<double> next(out_w);
    for (int o = 0; o < out_w; ++o) {
      double sum = b[o];
      const double* row = w + o * in_w;
      for (int i = 0; i < in_w; ++i) sum += row[i] * act[i];
      next[o] = sum;
    }
    if (l < layers - 1) {
      for (double& x : next) x = std::tanh(x);
      cache.hidden[l] = next;
      if (drop) {
        auto& scale = cache.drop_scale[l];
        scale.resize(out_w);
        for (int o = 0; o < out_w; ++o) {
          scale[o] = dropout_rng->bernoulli(keep) ? 1.0 / keep : 0.0;
          next[o] *= scale[o];
        }
      }
    }
    act = std::move(next);
  }
  cache.output = std::move(act);
  cache.valid = true;
}

std::vector<double> DenseNet::forward(std::span<const double> input,
                                      Rng* dropout_rng) const {
  ForwardCache cache;
  forward(input, cache, dropout_rng);
  return std::move(cache.output);
}

void DenseNet::vjp(const ForwardCache& cache,
                   std::span<const double> output_cotangent, double scale,
                   std::span<double> param_grad,
                   std::span<double> input_grad) const {
  if (!cache.valid) throw NetError("vjp needs a cache from forward()");
  if (static_cast<int>(output_cotangent.size()) != output_width()) {
    throw NetError("cotangent width does not match the output width");
  }
  if (!param_grad.empty() &&
      static_cast<int>(param_grad.size()) != param_count()) {
    throw NetError("param_grad has the wrong length");
  }
  if (!input_grad.empty() &&
      static_cast<int>(input_grad.size()) != input_width()) {
    throw NetError("input_grad has the wrong length");
  }

  const int layers = num_layers();
  std::vector<double> delta(output_cotangent.begin(), output_cotangent.end());
  for (int l = layers - 1; l >= 0; --l) {
    const int in_w = widths_[l];
    const int out_w = widths_[l + 1];
    const double* w = params_.data() + w_offset_[l];

    // Activation that fed this layer, after any dropout scaling.
    const std::vector<double>* below = nullptr;
    std::vector<double> scaled;
    if (l == 0) {
      below = &cache.input;
    } else {
      below = &cache.hidden[l - 1];
      if (!cache.drop_scale[l - 1].empty()) {
        scaled = *below;
        for (std::size_t i = 0; i < scaled.size(); ++i) {
          scaled[i] *= cache.drop_scale[l - 1][i];
        }
        below = &scaled;
      }
    }

    if (!param_grad.empty()) {
      double* wg = param_grad.data() + w_offset_[l];
      double* bg = param_grad.data() + b_offset_[l];
      for (int o = 0; o < out_w; ++o) {
        const double d = scale * delta[o];
        double* row = wg + o * in_w;
        for (int i = 0; i < in_w; ++i) row[i] += d * (*below)[i];
        bg[o] += d;
      }
    }

    if (l == 0 && input_grad.empty()) break;

    std::vector<double> prev(in_w, 0.0);
    for (int o = 0; o < out_w; ++o) {
      const double d = delta[o];
      const double* row = w + o * in_w;
      for (int i = 0; i < in_w; ++i) prev[i] += d * row[i];
    }
    if (l > 0) {
      // Back through dropout scaling, then tanh.
      const auto& h = cache.hidden[l - 1];
      const auto& s = cache.drop_scale[l - 1];
      for (int i = 0; i < in_w; ++i) {
        if (!s.empty()) prev[i] *= s[i];
        prev[i] *= 1.0 - h[i] * h[i];
      }
      delta = std::move(prev);
    } else {
      for (int i = 0; i < in_w; ++i) input_grad[i] += scale * prev[i];
    }
  }
}

}  // namespace lpgnn
