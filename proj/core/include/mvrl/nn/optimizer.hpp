#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

#include "mvrl/nn/mlp.hpp"

namespace mvrl::nn {

enum class OptimizerKind { kSgd, kAdam };

struct OptimConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Empty when valid; otherwise one message per violated bound.
  std::vector<std::string> problems() const;
};

struct OptimState {
  OptimConfig config;
  std::vector<std::vector<double>> m;  // first moments, one per parameter tensor
  std::vector<std::vector<double>> v;  // second moments
  std::uint64_t step_count = 0;
};

OptimState make_optim_state(const OptimConfig& config, const MlpParams& params);

/// Applies one update in place. `pass` names the training pass for diagnostics
/// if the gradients contain NaN/Inf (NumericError, parameters untouched).
void optimizer_step(MlpParams& params, const MlpGradients& grads, OptimState& state, std::string_view pass);

}  // namespace mvrl::nn
