#include "mvrl/train/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include "mvrl/errors.hpp"
#include "mvrl/train/passes.hpp"

namespace mvrl::train {
namespace {

using models::Latent;
using models::ModelSpec;
using models::ModelState;

constexpr std::uint64_t kShuffleStream = 0x5348;
constexpr std::uint64_t kBatchStream = 0x4241;
constexpr std::uint64_t kValidationStream = 0x5641;

// Accumulates row-weighted means of per-batch losses.
struct LossAccumulator {
  EpochLosses sum;
  double rows = 0.0;

  void add(const EpochLosses& l, double n) {
    for (const auto& [lat, g] : l.games) {
      sum.games[lat].disc += n * g.disc;
      sum.games[lat].gen += n * g.gen;
    }
    sum.recon += n * l.recon;
    sum.kl += n * l.kl;
    sum.total += n * l.total;
    rows += n;
  }

  EpochLosses mean() const {
    EpochLosses out = sum;
    if (rows == 0.0) return out;
    for (auto& [lat, g] : out.games) {
      g.disc /= rows;
      g.gen /= rows;
    }
    out.recon /= rows;
    out.kl /= rows;
    out.total /= rows;
    return out;
  }
};

void finish_total(EpochLosses& l, bool variational) {
  if (variational) return;
  l.total = l.recon;
  for (const auto& [lat, g] : l.games) l.total += g.disc + g.gen;
}

EpochLosses from_vcca(const models::VccaLoss& v) {
  EpochLosses l;
  l.total = v.total;
  l.recon = v.recon_x + v.recon_y;
  for (const auto& [lat, kl] : v.kl) l.kl += kl;
  return l;
}

Rng stream_rng(std::uint64_t batch_seed, Latent l) { return make_rng(batch_seed, 1 + std::size_t(l)); }

EpochLosses train_batch(ModelState& state, const ModelSpec& spec, const models::Batch& batch,
                        std::uint64_t batch_seed) {
  EpochLosses l;
  if (models::is_variational(spec.variant)) {
    Rng rng = make_rng(batch_seed, 0);
    return from_vcca(vcca_pass(state, spec, batch, rng));
  }
  const auto latents = spec.latents();
  // Streams own disjoint parameters, so running each pass across all streams
  // before the next pass is equivalent to running the games side by side.
  for (Latent lat : latents) {
    Rng rng = stream_rng(batch_seed, lat);
    l.games[lat].disc = discriminator_pass(state, spec, batch, lat, rng);
  }
  for (Latent lat : latents) l.games[lat].gen = generator_pass(state, spec, batch, lat);
  Rng rng = make_rng(batch_seed, 0);
  l.recon = reconstruction_pass(state, spec, batch, rng);
  finish_total(l, false);
  return l;
}

std::string format_epoch_batch(std::size_t epoch, std::size_t batch) {
  return "epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch);
}

}  // namespace

double validation_score(const EpochLosses& losses, models::Variant variant) {
  if (models::is_variational(variant)) return losses.total;
  if (losses.games.empty()) return losses.recon;
  double dev = 0.0;
  for (const auto& [lat, g] : losses.games) {
    dev += std::abs(kEquilibriumLoss - g.disc) + std::abs(kEquilibriumLoss - g.gen);
  }
  return losses.recon + dev / double(losses.games.size());
}

std::vector<std::string> TrainConfig::problems() const {
  std::vector<std::string> out;
  if (epochs < 1) out.push_back("training.epochs must be >= 1");
  if (batch_size < 2) out.push_back("training.batch_size must be >= 2");
  if (validate_every < 1) out.push_back("training.validate_every must be >= 1");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    out.push_back("training.validation_fraction must lie in (0, 1)");
  }
  for (const auto& [name, cfg] : {std::pair{"recon", &optim.recon}, {"disc", &optim.disc}, {"gen", &optim.gen}}) {
    for (const auto& p : cfg->problems()) out.push_back(std::string("training.optimizer.") + name + ": " + p);
  }
  return out;
}

void TrainConfig::validate() const {
  if (auto p = problems(); !p.empty()) throw ConfigError(std::move(p));
}

models::Batch rows_of(const models::Batch& b, std::span<const std::size_t> indices) {
  return {select_rows(b.x, indices), select_rows(b.y, indices)};
}

EpochLosses evaluate_losses(const ModelState& state, const ModelSpec& spec, const models::Batch& data,
                            std::size_t batch_size, std::uint64_t seed) {
  LossAccumulator acc;
  const std::size_t n = data.rows();
  const bool variational = models::is_variational(spec.variant);
  std::vector<std::size_t> idx;
  for (std::size_t start = 0, b = 0; start < n; start += batch_size, ++b) {
    const std::size_t end = std::min(n, start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const models::Batch batch = rows_of(data, idx);
    const std::uint64_t batch_seed = derive_seed(seed, b);
    EpochLosses l;
    Rng rng = make_rng(batch_seed, 0);
    const models::Noise noise = models::draw_noise(spec, batch.rows(), rng);
    if (variational) {
      l = from_vcca(models::vcca_loss(state, spec, batch, noise));
    } else {
      for (Latent lat : spec.latents()) {
        Rng srng = stream_rng(batch_seed, lat);
        const Tensor2 pos = spec.priors.at(lat).sample(batch.rows(), srng);
        l.games[lat].disc = discriminator_loss(state, spec, batch, lat, pos);
        l.games[lat].gen = generator_loss(state, spec, batch, lat);
      }
      l.recon = models::reconstruction_loss(state, spec, batch, noise);
      finish_total(l, false);
    }
    acc.add(l, double(batch.rows()));
  }
  return acc.mean();
}

TrainResult train(ModelState& state, const ModelSpec& spec, const models::Batch& train_data,
                  const models::Batch& validation_data, const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  spec.validate();
  if (train_data.rows() < 2) throw DataError("training set needs at least 2 rows");
  if (validation_data.rows() == 0) throw DataError("validation set is empty");
  for (const auto* b : {&train_data, &validation_data}) {
    if (b->x.cols() != spec.x_dim || b->y.cols() != spec.y_dim || b->x.rows() != b->y.rows()) {
      throw DimensionError("training data shape " + std::to_string(b->x.cols()) + "/" + std::to_string(b->y.cols()) +
                           " does not match the model's views " + std::to_string(spec.x_dim) + "/" +
                           std::to_string(spec.y_dim));
    }
  }

  TrainResult result;
  result.report.variant = spec.variant;
  result.report.best_score = std::numeric_limits<double>::infinity();
  const std::size_t n = train_data.rows();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  const std::uint64_t validation_seed = derive_seed(config.seed, kValidationStream);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    Rng shuffle = make_rng(derive_seed(config.seed, kShuffleStream), epoch);
    std::shuffle(order.begin(), order.end(), shuffle);
    const std::uint64_t epoch_seed = derive_seed(derive_seed(config.seed, kBatchStream), epoch);

    LossAccumulator acc;
    std::size_t b = 0;
    for (std::size_t start = 0; start < n; start += config.batch_size, ++b) {
      const std::size_t end = std::min(n, start + config.batch_size);
      if (end - start < 2) break;  // a single trailing row cannot form a batch
      const std::span<const std::size_t> rows(order.data() + start, end - start);
      const models::Batch batch = rows_of(train_data, rows);
      EpochLosses l;
      try {
        l = train_batch(state, spec, batch, derive_seed(epoch_seed, b));
      } catch (const NumericError& e) {
        throw NumericError("training aborted at " + format_epoch_batch(epoch, b + 1) + ": " + e.what());
      }
      acc.add(l, double(batch.rows()));
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train = acc.mean();
    rec.score = std::numeric_limits<double>::quiet_NaN();
    if (epoch % config.validate_every == 0 || epoch == config.epochs) {
      rec.validation = evaluate_losses(state, spec, validation_data, config.batch_size, validation_seed);
      rec.score = validation_score(rec.validation, spec.variant);
      if (!std::isfinite(rec.score)) {
        throw NumericError("training aborted at epoch " + std::to_string(epoch) +
                           ": non-finite validation score");
      }
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.report.epochs.push_back(rec);

    if (std::isfinite(rec.score) && rec.score < result.report.best_score) {
      result.report.best_score = rec.score;
      result.report.best_epoch = epoch;
      result.best = models::export_params(state);
      if (hooks.on_new_best) hooks.on_new_best(rec, state);
    }
    if (hooks.on_epoch_end) hooks.on_epoch_end(rec, state);
  }
  return result;
}

TrainResult train(ModelState& state, const ModelSpec& spec, const data::MultiviewDataset& dataset,
                  const TrainConfig& config, const TrainHooks& hooks) {
  config.validate();
  const auto split = data::split_indices(dataset.size(), 1.0 - config.validation_fraction, config.seed);
  const models::Batch all{dataset.view_x, dataset.view_y};
  return train(state, spec, rows_of(all, split.train), rows_of(all, split.validation), config, hooks);
}

}  // namespace mvrl::train
