#pragma once

#include <cstdint>
#include <vector>

#include "mvrl/models/model.hpp"
#include "mvrl/rng.hpp"
#include "mvrl/tensor.hpp"

namespace mvrl::testing {

inline Tensor2 random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed, double lo = -1.0,
                             double hi = 1.0) {
  Rng rng = make_rng(seed, 7);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor2 t(rows, cols);
  for (double& v : t.data()) v = u(rng);
  return t;
}

/// Small spec of every variant for fast structural and gradient tests.
inline models::ModelSpec tiny_spec(models::Variant v, std::size_t view_dim = 5, std::size_t dim = 2) {
  models::ModelSpec s;
  s.variant = v;
  s.x_dim = view_dim;
  s.y_dim = view_dim + 1;
  s.z_dim = dim;
  if (models::is_private(v)) s.hx_dim = s.hy_dim = dim;
  s.encoder_hidden = {6, 5};
  s.decoder_hidden = {5, 6};
  s.discriminator_hidden = {4};
  if (models::is_adversarial(v)) {
    for (auto l : s.latents()) s.priors.emplace(l, Prior::standard_gaussian(dim));
  }
  return s;
}

inline models::Batch tiny_batch(const models::ModelSpec& s, std::size_t rows, std::uint64_t seed) {
  return {random_tensor(rows, s.x_dim, seed, 0.0, 1.0), random_tensor(rows, s.y_dim, seed + 1, 0.0, 1.0)};
}

inline models::PassOptimizers optimizers(double lr = 1e-3) {
  models::PassOptimizers o;
  o.recon.learning_rate = o.disc.learning_rate = o.gen.learning_rate = lr;
  return o;
}

}  // namespace mvrl::testing

#include "mvrl/nn/grad_check.hpp"

namespace mvrl::testing {

inline void zero_all(models::ModelState& state) {
  for (auto& net : state.nets) {
    if (net) net->params = nn::zero_params(net->spec);
  }
}

/// Random biases, so no ReLU sits exactly at its kink under finite differences.
inline void jitter_biases(models::ModelState& state, std::uint64_t seed) {
  Rng rng = make_rng(seed, 11);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (auto& net : state.nets) {
    if (!net) continue;
    for (auto& b : net->params.biases)
      for (double& v : b) v = u(rng);
  }
}

/// Central-difference check of every network that has a gradient in `grads`.
inline nn::GradCheckReport check_model_gradients(models::ModelState& state, const models::ModelGradients& grads,
                                                 const std::function<double()>& loss) {
  std::vector<nn::ParamBlock> blocks;
  for (std::size_t r = 0; r < models::kNetRoleCount; ++r) {
    if (!grads.nets[r]) continue;
    auto values = nn::parameter_views(state.net(models::NetRole(r)).params);
    auto analytic = nn::gradient_views(*grads.nets[r]);
    for (std::size_t i = 0; i < values.size(); ++i) {
      blocks.push_back({models::to_string(models::NetRole(r)) + "#" + std::to_string(i), values[i], analytic[i]});
    }
  }
  return nn::check_gradients(blocks, loss);
}

inline nn::GradCheckReport check_network_gradients(models::ModelState& state, models::NetRole role,
                                                   const nn::MlpGradients& grads, const std::function<double()>& loss) {
  models::ModelGradients g;
  g.nets[std::size_t(role)] = grads;
  return check_model_gradients(state, g, loss);
}

}  // namespace mvrl::testing
