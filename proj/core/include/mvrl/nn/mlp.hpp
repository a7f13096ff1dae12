#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mvrl/rng.hpp"
#include "mvrl/tensor.hpp"

namespace mvrl::nn {

enum class Activation { kNone, kRelu, kSigmoid };

std::string to_string(Activation a);

/// Fully connected network shape. widths = {input, hidden..., output}.
struct MlpSpec {
  std::vector<std::size_t> widths;
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kNone;

  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  std::size_t layer_count() const { return widths.size() - 1; }

  /// Throws DimensionError if there is no layer or any width is zero.
  void validate() const;
};

/// Layer i maps widths[i] -> widths[i+1] with weights (widths[i] x widths[i+1]).
struct MlpParams {
  std::vector<Tensor2> weights;
  std::vector<std::vector<double>> biases;
  /// Bumped by every in-place update; forward caches record it to detect staleness.
  std::uint64_t version = 0;

  bool operator==(const MlpParams& other) const {
    return weights == other.weights && biases == other.biases;
  }
};

/// Gradients mirror MlpParams; `input` is dL/d(input batch).
struct MlpGradients {
  std::vector<Tensor2> weights;
  std::vector<std::vector<double>> biases;
  Tensor2 input;
};

/// Activations captured by a forward pass, consumed by mlp_backward.
struct ForwardCache {
  std::vector<Tensor2> inputs;  // input to each layer
  std::vector<Tensor2> pre;     // pre-activation of each layer
  Tensor2 output;
  const MlpParams* params = nullptr;
  std::uint64_t params_version = 0;

  bool valid() const { return params != nullptr; }
};

/// Zero-valued parameters with shapes chained from `spec.widths`.
MlpParams zero_params(const MlpSpec& spec);

/// He-uniform for ReLU layers, Xavier-uniform for the final layer; zero biases.
MlpParams init_params(const MlpSpec& spec, Rng& rng);

/// Throws DimensionError naming the first layer whose shapes disagree with `spec`.
void check_params(const MlpSpec& spec, const MlpParams& params);

Tensor2 mlp_forward(const MlpSpec& spec, const MlpParams& params, const Tensor2& input);
Tensor2 mlp_forward(const MlpSpec& spec, const MlpParams& params, const Tensor2& input, ForwardCache& cache);

/// Backpropagates output_grad through the cached forward pass. When
/// want_input_grad is false the (often largest) input-gradient product is skipped.
MlpGradients mlp_backward(const MlpSpec& spec, const MlpParams& params, const ForwardCache& cache,
                          const Tensor2& output_grad, bool want_input_grad = true);

/// Flat views over [W0, b0, W1, b1, ...].
std::vector<std::span<double>> parameter_views(MlpParams& params);
std::vector<std::span<const double>> parameter_views(const MlpParams& params);
std::vector<std::span<const double>> gradient_views(const MlpGradients& grads);

std::size_t parameter_count(const MlpSpec& spec);

}  // namespace mvrl::nn
