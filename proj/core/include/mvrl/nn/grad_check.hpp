#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mvrl/nn/mlp.hpp"

namespace mvrl::nn {

/// One parameter tensor under test: its live values and the analytic gradient to compare against.
struct ParamBlock {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

struct GradCheckEntry {
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  GradCheckEntry worst;
  std::size_t checked = 0;

  bool passed(double tolerance) const { return max_rel_error < tolerance; }
};

/// |a - n| / max(|a|, |n|, floor). The floor keeps near-zero gradients from
/// turning round-off into spurious relative error.
double relative_error(double analytic, double numeric, double floor = 1e-6);

/// Central differences on every entry of every block (or a strided subset
/// when max_per_block > 0). `loss` must read the live values in `blocks`.
GradCheckReport check_gradients(std::span<const ParamBlock> blocks, const std::function<double()>& loss,
                                double step = 1e-5, std::size_t max_per_block = 0);

/// Loss on a network output; writes dL/d(output) into *output_grad when non-null.
using OutputLoss = std::function<double(const Tensor2& output, Tensor2* output_grad)>;

/// Finite-difference check of mlp_backward for one network and one batch.
/// Tensor names read "layer<i>.weights" / "layer<i>.bias".
GradCheckReport grad_check(const MlpSpec& spec, MlpParams& params, const Tensor2& input, const OutputLoss& loss,
                           double step = 1e-5);

}  // namespace mvrl::nn
