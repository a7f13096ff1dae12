#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mvrl/data/multiview.hpp"
#include "mvrl/models/model.hpp"
#include "mvrl/nn/checkpoint.hpp"

namespace mvrl::train {

struct GameLosses {
  double disc = 0.0;
  double gen = 0.0;
};

struct EpochLosses {
  std::map<models::Latent, GameLosses> games;  // adversarial variants
  double recon = 0.0;
  double kl = 0.0;     // variational variants, summed over latents
  double total = 0.0;  // variational: negated ELBO; adversarial: recon + sum of game losses
};

/// Adversarial: recon + mean over active streams of |eq - disc| + |eq - gen|,
/// which is the single-stream criterion for acca and the three-stream average
/// for acca_private. Variational: the negated ELBO.
double validation_score(const EpochLosses& losses, models::Variant variant);

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  models::PassOptimizers optim;
  std::uint64_t seed = 0;
  std::size_t validate_every = 1;
  double validation_fraction = 0.1;

  std::vector<std::string> problems() const;
  void validate() const;  // throws ConfigError
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  EpochLosses train;
  EpochLosses validation;
  double score = 0.0;  // NaN on epochs without a validation sweep
  double seconds = 0.0;
};

struct ExperimentReport {
  models::Variant variant = models::Variant::kAcca;
  std::vector<EpochRecord> epochs;
  std::size_t best_epoch = 0;
  double best_score = 0.0;
};

struct TrainResult {
  ExperimentReport report;
  std::vector<nn::NamedParams> best;  // parameters at best_epoch
};

struct TrainHooks {
  std::function<void(const EpochRecord&, const models::ModelState&)> on_epoch_end;
  std::function<void(const EpochRecord&, const models::ModelState&)> on_new_best;
};

/// Trains `state` in place (it ends at the final epoch). Deterministic given
/// the data and config.seed. Throws NumericError naming epoch, batch and pass
/// when a loss or gradient is non-finite.
TrainResult train(models::ModelState& state, const models::ModelSpec& spec, const models::Batch& train_data,
                  const models::Batch& validation_data, const TrainConfig& config, const TrainHooks& hooks = {});

/// Splits the dataset (validation_fraction held out, seeded by config.seed) and trains.
TrainResult train(models::ModelState& state, const models::ModelSpec& spec, const data::MultiviewDataset& dataset,
                  const TrainConfig& config, const TrainHooks& hooks = {});

/// Losses of one sweep over `data` without updating; rng drives prior draws and noise.
EpochLosses evaluate_losses(const models::ModelState& state, const models::ModelSpec& spec, const models::Batch& data,
                            std::size_t batch_size, std::uint64_t seed);

models::Batch rows_of(const models::Batch& b, std::span<const std::size_t> indices);

}  // namespace mvrl::train
