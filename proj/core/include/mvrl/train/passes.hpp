#pragma once

#include <cstddef>
#include <span>

#include "mvrl/models/model.hpp"
#include "mvrl/rng.hpp"

namespace mvrl::train {

/// -log(0.5): both game losses when the discriminator is maximally confused.
inline constexpr double kEquilibriumLoss = 0.69314718055994530942;

/// Discriminator outputs are clamped to [kProbClamp, 1 - kProbClamp] before logs.
inline constexpr double kProbClamp = 1e-7;

/// -(1/2n) sum [log D(pos_i) + log(1 - D(neg_i))] over n positives and n negatives.
double discriminator_bce(std::span<const double> pos, std::span<const double> neg);

/// -(1/n) sum log D(neg_i).
double generator_nll(std::span<const double> neg);

/// Loss of the discriminator pass with explicit prior draws `pos` (n x dim);
/// fills `grads` with the discriminator gradient when non-null. No update.
double discriminator_loss(const models::ModelState& state, const models::ModelSpec& spec, const models::Batch& batch,
                          models::Latent l, const Tensor2& pos, nn::MlpGradients* grads = nullptr);
/// Generator loss; fills `grads` with the encoder gradient (through the discriminator) when non-null. No update.
double generator_loss(const models::ModelState& state, const models::ModelSpec& spec, const models::Batch& batch,
                      models::Latent l, nn::MlpGradients* grads = nullptr);

enum class PassMode { kTrain, kEvaluate };

/// Encoded batch (label 0) against fresh prior draws (label 1); updates only
/// the discriminator of latent `l`. kEvaluate computes the loss without updating.
double discriminator_pass(models::ModelState& state, const models::ModelSpec& spec, const models::Batch& batch,
                          models::Latent l, Rng& rng, PassMode mode = PassMode::kTrain);

/// Non-saturating encoder loss through the frozen discriminator; updates only
/// the encoder of latent `l`.
double generator_pass(models::ModelState& state, const models::ModelSpec& spec, const models::Batch& batch,
                      models::Latent l, PassMode mode = PassMode::kTrain);

/// Batch mean of ||x - x_hat||_k^k + ||y - y_hat||_k^k; updates encoders and decoders.
/// `rng` supplies reparameterization noise for variational variants.
double reconstruction_pass(models::ModelState& state, const models::ModelSpec& spec, const models::Batch& batch,
                           Rng& rng, PassMode mode = PassMode::kTrain);

/// Negated ELBO step for VCCA variants; updates encoders and decoders.
models::VccaLoss vcca_pass(models::ModelState& state, const models::ModelSpec& spec, const models::Batch& batch,
                           Rng& rng, PassMode mode = PassMode::kTrain);

/// Applies every present gradient with the network's primary optimizer.
void apply_gradients(models::ModelState& state, const models::ModelGradients& grads, std::string_view pass);

}  // namespace mvrl::train
