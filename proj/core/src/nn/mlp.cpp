#include "mvrl/nn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvrl/errors.hpp"

namespace mvrl::nn {
namespace {

constexpr double kSigmoidLow = std::numeric_limits<double>::min();
const double kSigmoidHigh = std::nextafter(1.0, 0.0);

double sigmoid(double x) {
  const double s = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  return std::clamp(s, kSigmoidLow, kSigmoidHigh);
}

void activate(Activation a, const Tensor2& pre, Tensor2& out) {
  auto src = pre.data();
  auto dst = out.data();
  switch (a) {
    case Activation::kNone:
      std::copy(src.begin(), src.end(), dst.begin());
      break;
    case Activation::kRelu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = sigmoid(src[i]);
      break;
  }
}

// grad <- grad * f'(pre), with `post` the activation output.
void scale_by_derivative(Activation a, const Tensor2& pre, const Tensor2& post, Tensor2& grad) {
  auto g = grad.data();
  switch (a) {
    case Activation::kNone:
      break;
    case Activation::kRelu: {
      auto p = pre.data();
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (!(p[i] > 0.0)) g[i] = 0.0;
      }
      break;
    }
    case Activation::kSigmoid: {
      auto s = post.data();
      for (std::size_t i = 0; i < g.size(); ++i) g[i] *= s[i] * (1.0 - s[i]);
      break;
    }
  }
}

Activation layer_activation(const MlpSpec& spec, std::size_t layer) {
  return layer + 1 == spec.layer_count() ? spec.output : spec.hidden;
}

Tensor2 affine(const Tensor2& input, const Tensor2& w, const std::vector<double>& b) {
  Tensor2 pre = matmul(input, w);
  for (std::size_t r = 0; r < pre.rows(); ++r) {
    auto row = pre.row(r);
    for (std::size_t c = 0; c < row.size(); ++c) row[c] += b[c];
  }
  return pre;
}

void check_input(const MlpSpec& spec, const Tensor2& input) {
  if (input.cols() != spec.input_width()) {
    throw DimensionError("mlp layer 0: expected input width " + std::to_string(spec.input_width()) +
                         ", got " + std::to_string(input.cols()));
  }
}

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kSigmoid: return "sigmoid";
  }
  return "?";
}

void MlpSpec::validate() const {
  if (widths.size() < 2) throw DimensionError("MlpSpec: need at least one layer (two widths)");
  for (std::size_t i = 0; i < widths.size(); ++i) {
    if (widths[i] == 0) throw DimensionError("MlpSpec: width " + std::to_string(i) + " is zero");
  }
}

std::size_t parameter_count(const MlpSpec& spec) {
  std::size_t n = 0;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) n += (spec.widths[i] + 1) * spec.widths[i + 1];
  return n;
}

MlpParams zero_params(const MlpSpec& spec) {
  spec.validate();
  MlpParams p;
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    p.weights.emplace_back(spec.widths[i], spec.widths[i + 1]);
    p.biases.emplace_back(spec.widths[i + 1], 0.0);
  }
  return p;
}

MlpParams init_params(const MlpSpec& spec, Rng& rng) {
  MlpParams p = zero_params(spec);
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    const double fan_in = double(spec.widths[i]);
    const double fan_out = double(spec.widths[i + 1]);
    const bool last = i + 1 == spec.layer_count();
    const double limit = last ? std::sqrt(6.0 / (fan_in + fan_out)) : std::sqrt(6.0 / fan_in);
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : p.weights[i].data()) w = dist(rng);
  }
  return p;
}

void check_params(const MlpSpec& spec, const MlpParams& params) {
  spec.validate();
  if (params.weights.size() != spec.layer_count() || params.biases.size() != spec.layer_count()) {
    throw DimensionError("mlp: expected " + std::to_string(spec.layer_count()) + " layers, params hold " +
                         std::to_string(params.weights.size()));
  }
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    const auto& w = params.weights[i];
    if (w.rows() != spec.widths[i] || w.cols() != spec.widths[i + 1] ||
        params.biases[i].size() != spec.widths[i + 1]) {
      throw DimensionError("mlp layer " + std::to_string(i) + ": weights are " + std::to_string(w.rows()) + "x" +
                           std::to_string(w.cols()) + ", spec wants " + std::to_string(spec.widths[i]) + "x" +
                           std::to_string(spec.widths[i + 1]));
    }
  }
}

Tensor2 mlp_forward(const MlpSpec& spec, const MlpParams& params, const Tensor2& input) {
  check_params(spec, params);
  check_input(spec, input);
  Tensor2 h = input;
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    Tensor2 pre = affine(h, params.weights[i], params.biases[i]);
    activate(layer_activation(spec, i), pre, pre);
    h = std::move(pre);
  }
  return h;
}

Tensor2 mlp_forward(const MlpSpec& spec, const MlpParams& params, const Tensor2& input, ForwardCache& cache) {
  check_params(spec, params);
  check_input(spec, input);
  cache = ForwardCache{};
  cache.inputs.reserve(spec.layer_count());
  cache.pre.reserve(spec.layer_count());
  Tensor2 h = input;
  for (std::size_t i = 0; i < spec.layer_count(); ++i) {
    Tensor2 pre = affine(h, params.weights[i], params.biases[i]);
    Tensor2 post(pre.rows(), pre.cols());
    activate(layer_activation(spec, i), pre, post);
    cache.inputs.push_back(std::move(h));
    cache.pre.push_back(std::move(pre));
    h = std::move(post);
  }
  cache.output = h;
  cache.params = &params;
  cache.params_version = params.version;
  return h;
}

MlpGradients mlp_backward(const MlpSpec& spec, const MlpParams& params, const ForwardCache& cache,
                          const Tensor2& output_grad, bool want_input_grad) {
  if (!cache.valid()) throw UsageError("mlp_backward: missing forward cache");
  if (cache.params != &params || cache.params_version != params.version) {
    throw UsageError("mlp_backward: stale forward cache (parameters changed since the forward pass)");
  }
  if (cache.pre.size() != spec.layer_count()) throw UsageError("mlp_backward: cache does not match spec");
  if (output_grad.rows() != cache.output.rows() || output_grad.cols() != cache.output.cols()) {
    throw DimensionError("mlp_backward: output gradient shape does not match forward output");
  }

  const std::size_t layers = spec.layer_count();
  MlpGradients grads;
  grads.weights.resize(layers);
  grads.biases.resize(layers);

  Tensor2 delta = output_grad;
  for (std::size_t step = 0; step < layers; ++step) {
    const std::size_t i = layers - 1 - step;
    const Tensor2& post = i + 1 == layers ? cache.output : cache.inputs[i + 1];
    scale_by_derivative(layer_activation(spec, i), cache.pre[i], post, delta);

    grads.weights[i] = matmul_tn(cache.inputs[i], delta);
    auto& db = grads.biases[i];
    db.assign(delta.cols(), 0.0);
    for (std::size_t r = 0; r < delta.rows(); ++r) {
      auto row = delta.row(r);
      for (std::size_t c = 0; c < row.size(); ++c) db[c] += row[c];
    }

    if (i > 0 || want_input_grad) {
      delta = matmul_nt(delta, params.weights[i]);
    }
  }
  if (want_input_grad) grads.input = std::move(delta);
  return grads;
}

std::vector<std::span<double>> parameter_views(MlpParams& params) {
  std::vector<std::span<double>> out;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    out.push_back(params.weights[i].data());
    out.push_back(params.biases[i]);
  }
  return out;
}

std::vector<std::span<const double>> parameter_views(const MlpParams& params) {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < params.weights.size(); ++i) {
    out.push_back(params.weights[i].data());
    out.push_back(params.biases[i]);
  }
  return out;
}

std::vector<std::span<const double>> gradient_views(const MlpGradients& grads) {
  std::vector<std::span<const double>> out;
  for (std::size_t i = 0; i < grads.weights.size(); ++i) {
    out.push_back(grads.weights[i].data());
    out.push_back(grads.biases[i]);
  }
  return out;
}

}  // namespace mvrl::nn
