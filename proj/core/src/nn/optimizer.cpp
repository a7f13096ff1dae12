#include "mvrl/nn/optimizer.hpp"

#include <cmath>
#include <string>

#include "mvrl/errors.hpp"

namespace mvrl::nn {

std::vector<std::string> OptimConfig::problems() const {
  std::vector<std::string> out;
  if (!(learning_rate > 0.0)) out.push_back("learning_rate must be > 0");
  if (kind == OptimizerKind::kAdam) {
    if (!(beta1 > 0.0 && beta1 < 1.0)) out.push_back("beta1 must lie in (0, 1)");
    if (!(beta2 > 0.0 && beta2 < 1.0)) out.push_back("beta2 must lie in (0, 1)");
    if (!(epsilon > 0.0)) out.push_back("epsilon must be > 0");
  }
  return out;
}

OptimState make_optim_state(const OptimConfig& config, const MlpParams& params) {
  if (auto p = config.problems(); !p.empty()) throw ConfigError(std::move(p));
  OptimState s;
  s.config = config;
  if (config.kind == OptimizerKind::kAdam) {
    for (auto view : parameter_views(params)) {
      s.m.emplace_back(view.size(), 0.0);
      s.v.emplace_back(view.size(), 0.0);
    }
  }
  return s;
}

void optimizer_step(MlpParams& params, const MlpGradients& grads, OptimState& state, std::string_view pass) {
  auto p_views = parameter_views(params);
  auto g_views = gradient_views(grads);
  if (p_views.size() != g_views.size()) throw DimensionError("optimizer_step: gradient/parameter count mismatch");
  for (std::size_t t = 0; t < p_views.size(); ++t) {
    if (p_views[t].size() != g_views[t].size()) {
      throw DimensionError("optimizer_step: gradient tensor " + std::to_string(t) + " shape mismatch");
    }
    for (std::size_t i = 0; i < g_views[t].size(); ++i) {
      if (!std::isfinite(g_views[t][i])) {
        throw NumericError("non-finite gradient in pass '" + std::string(pass) + "' (tensor " + std::to_string(t) +
                           " = layer " + std::to_string(t / 2) + (t % 2 ? " bias" : " weights") + ", index " +
                           std::to_string(i) + ")");
      }
    }
  }

  const auto& cfg = state.config;
  ++state.step_count;
  if (cfg.kind == OptimizerKind::kSgd) {
    for (std::size_t t = 0; t < p_views.size(); ++t) {
      for (std::size_t i = 0; i < p_views[t].size(); ++i) p_views[t][i] -= cfg.learning_rate * g_views[t][i];
    }
  } else {
    if (state.m.size() != p_views.size()) throw UsageError("optimizer_step: Adam state built for another network");
    const double t = double(state.step_count);
    const double bias1 = 1.0 - std::pow(cfg.beta1, t);
    const double bias2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t k = 0; k < p_views.size(); ++k) {
      auto& m = state.m[k];
      auto& v = state.v[k];
      for (std::size_t i = 0; i < p_views[k].size(); ++i) {
        const double g = g_views[k][i];
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = m[i] / bias1;
        const double v_hat = v[i] / bias2;
        p_views[k][i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
      }
    }
  }
  ++params.version;
}

}  // namespace mvrl::nn
