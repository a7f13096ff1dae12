#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mvrl/nn/checkpoint.hpp"
#include "mvrl/nn/mlp.hpp"
#include "mvrl/nn/optimizer.hpp"
#include "mvrl/priors.hpp"
#include "mvrl/rng.hpp"
#include "mvrl/tensor.hpp"

namespace mvrl::models {

enum class Variant { kVccaX, kVccaXY, kVccaPrivate, kAcca, kAccaPrivate };

std::string to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view s);

bool is_adversarial(Variant v);
bool is_private(Variant v);
inline bool is_variational(Variant v) { return !is_adversarial(v); }

/// Latent streams: shared z, view-specific h_x and h_y.
enum class Latent { kZ = 0, kHx = 1, kHy = 2 };
inline constexpr std::array<Latent, 3> kAllLatents{Latent::kZ, Latent::kHx, Latent::kHy};
std::string to_string(Latent l);

enum class NetRole { kEncZ = 0, kEncHx, kEncHy, kDecX, kDecY, kDiscZ, kDiscHx, kDiscHy };
inline constexpr std::size_t kNetRoleCount = 8;
std::string to_string(NetRole r);
NetRole encoder_for(Latent l);
NetRole discriminator_for(Latent l);

struct ModelSpec {
  Variant variant = Variant::kAcca;
  std::size_t x_dim = 784;
  std::size_t y_dim = 784;
  std::size_t z_dim = 2;
  std::size_t hx_dim = 0;  // private variants only
  std::size_t hy_dim = 0;
  std::vector<std::size_t> encoder_hidden{1024, 1024, 1024, 1024};
  std::vector<std::size_t> decoder_hidden{1024, 1024, 1024, 1024};
  std::vector<std::size_t> discriminator_hidden{256, 256};
  /// Sigmoid decoder outputs for targets in [0,1]; identity otherwise.
  bool decoder_sigmoid = true;
  /// Adversarial variants only: one samplable prior per active latent.
  std::map<Latent, Prior> priors;
  int recon_norm = 2;        // k in the adversarial reconstruction loss
  double kl_weight = 1.0;    // multiplies the KL terms of the variational loss
  double logvar_clamp = 10.0;

  /// Every inconsistency found, empty when valid.
  std::vector<std::string> problems() const;
  void validate() const;  // throws ConfigError

  std::size_t latent_dim(Latent l) const;
  std::vector<Latent> latents() const;  // active latents in z, h_x, h_y order
  bool has_network(NetRole r) const;
  nn::MlpSpec network_spec(NetRole r) const;
};

struct Network {
  std::string name;
  nn::MlpSpec spec;
  nn::MlpParams params;
  nn::OptimState optim;                           // reconstruction / variational / discriminator updates
  std::optional<nn::OptimState> adversarial_optim;  // encoders of adversarial variants: generator pass
};

struct ModelState {
  std::array<std::optional<Network>, kNetRoleCount> nets;

  bool has(NetRole r) const { return nets[std::size_t(r)].has_value(); }
  Network& net(NetRole r);
  const Network& net(NetRole r) const;
};

struct PassOptimizers {
  nn::OptimConfig recon;
  nn::OptimConfig disc;
  nn::OptimConfig gen;
};

/// Networks initialized from per-role substreams of `seed`, so a network's
/// initial weights depend only on (seed, role, shape).
ModelState init_model(const ModelSpec& spec, const PassOptimizers& optim, std::uint64_t seed);

std::vector<nn::NamedParams> export_params(const ModelState& state);
/// Replaces parameters by name; throws DataError on missing networks or shape mismatch.
void import_params(ModelState& state, std::span<const nn::NamedParams> params);

struct Batch {
  Tensor2 x;
  Tensor2 y;
  std::size_t rows() const { return x.rows(); }
};

/// Rows of the encoder input for latent `l`: (x|y) for two-view z encoders, x or y otherwise.
Tensor2 encoder_input(const ModelSpec& spec, Latent l, const Batch& batch);

Tensor2 network_forward(const ModelState& state, NetRole r, const Tensor2& input);
Tensor2 network_forward(const ModelState& state, NetRole r, const Tensor2& input, nn::ForwardCache& cache);
nn::MlpGradients network_backward(const ModelState& state, NetRole r, const nn::ForwardCache& cache,
                                  const Tensor2& output_grad, bool want_input_grad = false);

/// Standard-normal noise for the reparameterization, one block per variational latent.
struct Noise {
  std::array<Tensor2, 3> eps;
};
Noise draw_noise(const ModelSpec& spec, std::size_t rows, Rng& rng);

struct LatentCode {
  Tensor2 z;
  Tensor2 mu;      // variational only
  Tensor2 logvar;  // variational only, clamped
};

struct Encoding {
  std::array<std::optional<LatentCode>, 3> codes;
  const LatentCode& at(Latent l) const;
};

enum class EncodeMode { kSample, kMean };

/// Variational: z = mu + exp(logvar / 2) * eps (kSample) or z = mu (kMean).
/// Adversarial: z = f(input) deterministically.
Encoding encode(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise,
                EncodeMode mode = EncodeMode::kSample);
Encoding encode(const ModelState& state, const ModelSpec& spec, const Batch& batch, Rng& rng,
                EncodeMode mode = EncodeMode::kSample);

/// Latent batches for z, h_x, h_y (unused entries may be empty).
using LatentSet = std::array<Tensor2, 3>;
LatentSet latents_of(const Encoding& e);

struct Reconstruction {
  Tensor2 x_hat;
  Tensor2 y_hat;
};

/// x_hat = g_x(z | h_x), y_hat = g_y(z | h_y).
Reconstruction decode(const ModelState& state, const ModelSpec& spec, const LatentSet& latents);

/// 0.5 * sum_d (mu_d^2 + exp(logvar_d) - logvar_d - 1), the KL from N(mu, diag exp(logvar)) to N(0, I).
double kl_diag_gaussian_to_standard(std::span<const double> mu, std::span<const double> logvar);

struct VccaLoss {
  double total = 0.0;
  std::map<Latent, double> kl;  // batch-mean KL per latent (unweighted)
  double recon_x = 0.0;         // batch-mean 0.5 * ||x - x_hat||^2
  double recon_y = 0.0;
};

/// Per-network gradients; entries for networks the loss does not touch stay empty.
struct ModelGradients {
  std::array<std::optional<nn::MlpGradients>, kNetRoleCount> nets;
};

/// Negated ELBO averaged over the batch: kl_weight * sum KL + 0.5||x - x_hat||^2 + 0.5||y - y_hat||^2.
VccaLoss vcca_loss(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise);
VccaLoss vcca_loss_and_gradients(const ModelState& state, const ModelSpec& spec, const Batch& batch,
                                 const Noise& noise, ModelGradients& grads);

/// Batch mean of ||x - x_hat||_k^k + ||y - y_hat||_k^k with k = spec.recon_norm.
/// Variational variants reconstruct from sampled latents using `noise`.
double reconstruction_loss(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise);
double reconstruction_loss_and_gradients(const ModelState& state, const ModelSpec& spec, const Batch& batch,
                                         const Noise& noise, ModelGradients& grads);

}  // namespace mvrl::models
