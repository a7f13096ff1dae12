#include "mvrl/train/passes.hpp"

#include <algorithm>
#include <cmath>

#include "mvrl/errors.hpp"

namespace mvrl::train {
namespace {

using models::Latent;
using models::ModelGradients;
using models::ModelSpec;
using models::ModelState;
using models::NetRole;

double clamp_prob(double d) { return std::clamp(d, kProbClamp, 1.0 - kProbClamp); }

void require_adversarial(const ModelSpec& spec, Latent l, const char* pass) {
  if (!models::is_adversarial(spec.variant)) {
    throw UsageError(std::string(pass) + " requires an adversarial variant, not " + models::to_string(spec.variant));
  }
  if (spec.latent_dim(l) == 0) throw UsageError(std::string(pass) + ": latent " + models::to_string(l) + " is inactive");
}

std::string pass_name(const char* base, Latent l) { return std::string(base) + "(" + models::to_string(l) + ")"; }

}  // namespace

double discriminator_bce(std::span<const double> pos, std::span<const double> neg) {
  const double n2 = double(pos.size() + neg.size());
  double s = 0.0;
  for (double d : pos) s += std::log(clamp_prob(d));
  for (double d : neg) s += std::log1p(-clamp_prob(d));
  return -s / n2;
}

double generator_nll(std::span<const double> neg) {
  double s = 0.0;
  for (double d : neg) s += std::log(clamp_prob(d));
  return -s / double(neg.size());
}

double discriminator_loss(const ModelState& state, const ModelSpec& spec, const models::Batch& batch, Latent l,
                          const Tensor2& pos, nn::MlpGradients* grads) {
  require_adversarial(spec, l, "discriminator_pass");
  const std::size_t n = batch.rows();
  if (pos.rows() != n || pos.cols() != spec.latent_dim(l)) {
    throw DimensionError("discriminator_pass: prior draws must be " + std::to_string(n) + " x " +
                         std::to_string(spec.latent_dim(l)));
  }
  const Tensor2 neg = models::network_forward(state, models::encoder_for(l), models::encoder_input(spec, l, batch));
  const Tensor2 input = vconcat(pos, neg);
  const NetRole disc = models::discriminator_for(l);
  nn::ForwardCache cache;
  const Tensor2 d = grads ? models::network_forward(state, disc, input, cache)
                          : models::network_forward(state, disc, input);
  const auto dv = d.data();
  const double loss = discriminator_bce(dv.subspan(0, n), dv.subspan(n));
  if (grads) {
    Tensor2 g(2 * n, 1);
    const double inv = 1.0 / double(2 * n);
    for (std::size_t i = 0; i < 2 * n; ++i) {
      const double dc = clamp_prob(dv[i]);
      g(i, 0) = i < n ? -inv / dc : inv / (1.0 - dc);
    }
    *grads = models::network_backward(state, disc, cache, g, false);
  }
  return loss;
}

double generator_loss(const ModelState& state, const ModelSpec& spec, const models::Batch& batch, Latent l,
                      nn::MlpGradients* grads) {
  require_adversarial(spec, l, "generator_pass");
  const std::size_t n = batch.rows();
  const NetRole enc = models::encoder_for(l);
  const NetRole disc = models::discriminator_for(l);
  nn::ForwardCache enc_cache;
  nn::ForwardCache disc_cache;
  const Tensor2 input = models::encoder_input(spec, l, batch);
  const Tensor2 z = grads ? models::network_forward(state, enc, input, enc_cache)
                          : models::network_forward(state, enc, input);
  const Tensor2 d = grads ? models::network_forward(state, disc, z, disc_cache)
                          : models::network_forward(state, disc, z);
  const double loss = generator_nll(d.data());
  if (grads) {
    Tensor2 g(n, 1);
    for (std::size_t i = 0; i < n; ++i) g(i, 0) = -1.0 / (double(n) * clamp_prob(d(i, 0)));
    const nn::MlpGradients through = models::network_backward(state, disc, disc_cache, g, true);
    *grads = models::network_backward(state, enc, enc_cache, through.input, false);
  }
  return loss;
}

double discriminator_pass(ModelState& state, const ModelSpec& spec, const models::Batch& batch, Latent l, Rng& rng,
                          PassMode mode) {
  require_adversarial(spec, l, "discriminator_pass");
  const Tensor2 pos = spec.priors.at(l).sample(batch.rows(), rng);
  if (mode == PassMode::kEvaluate) return discriminator_loss(state, spec, batch, l, pos);
  nn::MlpGradients grads;
  const double loss = discriminator_loss(state, spec, batch, l, pos, &grads);
  if (!std::isfinite(loss)) throw NumericError("non-finite loss in " + pass_name("discriminator", l));
  auto& net = state.net(models::discriminator_for(l));
  nn::optimizer_step(net.params, grads, net.optim, pass_name("discriminator", l));
  return loss;
}

double generator_pass(ModelState& state, const ModelSpec& spec, const models::Batch& batch, Latent l, PassMode mode) {
  if (mode == PassMode::kEvaluate) return generator_loss(state, spec, batch, l);
  nn::MlpGradients grads;
  const double loss = generator_loss(state, spec, batch, l, &grads);
  if (!std::isfinite(loss)) throw NumericError("non-finite loss in " + pass_name("generator", l));
  auto& net = state.net(models::encoder_for(l));
  nn::optimizer_step(net.params, grads, *net.adversarial_optim, pass_name("generator", l));
  return loss;
}

double reconstruction_pass(ModelState& state, const ModelSpec& spec, const models::Batch& batch, Rng& rng,
                           PassMode mode) {
  const models::Noise noise = models::draw_noise(spec, batch.rows(), rng);
  if (mode == PassMode::kEvaluate) return models::reconstruction_loss(state, spec, batch, noise);
  ModelGradients grads;
  const double loss = models::reconstruction_loss_and_gradients(state, spec, batch, noise, grads);
  if (!std::isfinite(loss)) throw NumericError("non-finite loss in reconstruction");
  apply_gradients(state, grads, "reconstruction");
  return loss;
}

models::VccaLoss vcca_pass(ModelState& state, const ModelSpec& spec, const models::Batch& batch, Rng& rng,
                           PassMode mode) {
  const models::Noise noise = models::draw_noise(spec, batch.rows(), rng);
  if (mode == PassMode::kEvaluate) return models::vcca_loss(state, spec, batch, noise);
  ModelGradients grads;
  const models::VccaLoss loss = models::vcca_loss_and_gradients(state, spec, batch, noise, grads);
  if (!std::isfinite(loss.total)) throw NumericError("non-finite loss in vcca");
  apply_gradients(state, grads, "vcca");
  return loss;
}

void apply_gradients(ModelState& state, const ModelGradients& grads, std::string_view pass) {
  // Validate everything first so a failure leaves all networks untouched.
  for (std::size_t i = 0; i < models::kNetRoleCount; ++i) {
    const auto& g = grads.nets[i];
    if (!g) continue;
    for (auto view : nn::gradient_views(*g)) {
      if (!all_finite(view)) {
        throw NumericError("non-finite gradient in " + std::string(pass) + " pass for " +
                           models::to_string(NetRole(i)));
      }
    }
  }
  for (std::size_t i = 0; i < models::kNetRoleCount; ++i) {
    const auto& g = grads.nets[i];
    if (!g) continue;
    auto& net = state.net(NetRole(i));
    nn::optimizer_step(net.params, *g, net.optim, pass);
  }
}

}  // namespace mvrl::train
