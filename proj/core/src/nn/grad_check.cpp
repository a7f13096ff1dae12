#include "mvrl/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "mvrl/errors.hpp"

namespace mvrl::nn {

double relative_error(double analytic, double numeric, double floor) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport check_gradients(std::span<const ParamBlock> blocks, const std::function<double()>& loss,
                                double step, std::size_t max_per_block) {
  GradCheckReport report;
  for (const auto& block : blocks) {
    if (block.values.size() != block.analytic.size()) {
      throw DimensionError("check_gradients: block '" + block.name + "' has mismatched gradient size");
    }
    const std::size_t n = block.values.size();
    const std::size_t stride = (max_per_block == 0 || n <= max_per_block) ? 1 : (n + max_per_block - 1) / max_per_block;
    for (std::size_t i = 0; i < n; i += stride) {
      double& p = block.values[i];
      const double saved = p;
      p = saved + step;
      const double up = loss();
      p = saved - step;
      const double down = loss();
      p = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(block.analytic[i], numeric);
      ++report.checked;
      if (report.checked == 1 || err > report.max_rel_error) {
        report.max_rel_error = err;
        report.worst = {block.name, i, block.analytic[i], numeric, err};
      }
    }
  }
  return report;
}

GradCheckReport grad_check(const MlpSpec& spec, MlpParams& params, const Tensor2& input, const OutputLoss& loss,
                           double step) {
  ForwardCache cache;
  const Tensor2 out = mlp_forward(spec, params, input, cache);
  Tensor2 out_grad(out.rows(), out.cols());
  loss(out, &out_grad);
  const MlpGradients grads = mlp_backward(spec, params, cache, out_grad);

  std::vector<ParamBlock> blocks;
  auto values = parameter_views(params);
  auto analytic = gradient_views(grads);
  for (std::size_t t = 0; t < values.size(); ++t) {
    blocks.push_back({"layer" + std::to_string(t / 2) + (t % 2 ? ".bias" : ".weights"), values[t], analytic[t]});
  }
  return check_gradients(blocks, [&] { return loss(mlp_forward(spec, params, input), nullptr); }, step);
}

}  // namespace mvrl::nn
