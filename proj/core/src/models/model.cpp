#include "mvrl/models/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mvrl/errors.hpp"

namespace mvrl::models {
namespace {

constexpr std::size_t idx(Latent l) { return std::size_t(l); }
constexpr std::size_t idx(NetRole r) { return std::size_t(r); }

struct Graph {
  std::array<nn::ForwardCache, kNetRoleCount> caches;
  std::array<Tensor2, 3> raw;  // encoder outputs ([mu | logvar_raw] for variational)
  Encoding enc;
  Reconstruction rec;
};

Tensor2 decoder_input(const ModelSpec& spec, const LatentSet& latents, Latent own) {
  const Tensor2& z = latents[idx(Latent::kZ)];
  if (spec.latent_dim(own) == 0) return z;
  return hconcat(z, latents[idx(own)]);
}

Graph forward_graph(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise,
                    EncodeMode mode, bool keep_cache) {
  if (batch.x.cols() != spec.x_dim || batch.y.cols() != spec.y_dim || batch.x.rows() != batch.y.rows()) {
    throw DimensionError("model batch: expected views of width " + std::to_string(spec.x_dim) + " and " +
                         std::to_string(spec.y_dim) + " with equal rows, got " + std::to_string(batch.x.cols()) +
                         " and " + std::to_string(batch.y.cols()));
  }
  Graph g;
  const bool variational = is_variational(spec.variant);
  for (Latent l : spec.latents()) {
    const NetRole role = encoder_for(l);
    const Tensor2 input = encoder_input(spec, l, batch);
    g.raw[idx(l)] = keep_cache ? network_forward(state, role, input, g.caches[idx(role)])
                               : network_forward(state, role, input);
    LatentCode code;
    const std::size_t dim = spec.latent_dim(l);
    if (variational) {
      code.mu = slice_cols(g.raw[idx(l)], 0, dim);
      code.logvar = slice_cols(g.raw[idx(l)], dim, dim);
      for (double& v : code.logvar.data()) v = std::clamp(v, -spec.logvar_clamp, spec.logvar_clamp);
      code.z = code.mu;
      if (mode == EncodeMode::kSample) {
        const Tensor2& eps = noise.eps[idx(l)];
        if (eps.rows() != batch.rows() || eps.cols() != dim) {
          throw DimensionError("noise block for " + to_string(l) + " has the wrong shape");
        }
        auto zs = code.z.data();
        auto lv = code.logvar.data();
        auto e = eps.data();
        for (std::size_t i = 0; i < zs.size(); ++i) zs[i] += std::exp(0.5 * lv[i]) * e[i];
      }
    } else {
      code.z = g.raw[idx(l)];
    }
    g.enc.codes[idx(l)] = std::move(code);
  }

  const LatentSet latents = latents_of(g.enc);
  const Tensor2 in_x = decoder_input(spec, latents, Latent::kHx);
  const Tensor2 in_y = decoder_input(spec, latents, Latent::kHy);
  if (keep_cache) {
    g.rec.x_hat = network_forward(state, NetRole::kDecX, in_x, g.caches[idx(NetRole::kDecX)]);
    g.rec.y_hat = network_forward(state, NetRole::kDecY, in_y, g.caches[idx(NetRole::kDecY)]);
  } else {
    g.rec.x_hat = network_forward(state, NetRole::kDecX, in_x);
    g.rec.y_hat = network_forward(state, NetRole::kDecY, in_y);
  }
  return g;
}

void accumulate(Tensor2& into, const Tensor2& add) {
  auto a = into.data();
  auto b = add.data();
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

// Backpropagates reconstruction gradients (and optionally the weighted KL) into
// every decoder and encoder touched by the graph.
void backward_graph(const ModelState& state, const ModelSpec& spec, const Graph& g, const Tensor2& grad_x_hat,
                    const Tensor2& grad_y_hat, const Noise& noise, double kl_scale, ModelGradients& out) {
  auto gx = network_backward(state, NetRole::kDecX, g.caches[idx(NetRole::kDecX)], grad_x_hat, true);
  auto gy = network_backward(state, NetRole::kDecY, g.caches[idx(NetRole::kDecY)], grad_y_hat, true);

  std::array<Tensor2, 3> dlatent;
  dlatent[idx(Latent::kZ)] = slice_cols(gx.input, 0, spec.z_dim);
  accumulate(dlatent[idx(Latent::kZ)], slice_cols(gy.input, 0, spec.z_dim));
  if (spec.hx_dim > 0) dlatent[idx(Latent::kHx)] = slice_cols(gx.input, spec.z_dim, spec.hx_dim);
  if (spec.hy_dim > 0) dlatent[idx(Latent::kHy)] = slice_cols(gy.input, spec.z_dim, spec.hy_dim);
  gx.input = Tensor2();
  gy.input = Tensor2();
  out.nets[idx(NetRole::kDecX)] = std::move(gx);
  out.nets[idx(NetRole::kDecY)] = std::move(gy);

  const bool variational = is_variational(spec.variant);
  for (Latent l : spec.latents()) {
    const NetRole role = encoder_for(l);
    const Tensor2& dz = dlatent[idx(l)];
    Tensor2 dout;
    if (variational) {
      const LatentCode& code = g.enc.at(l);
      const std::size_t dim = spec.latent_dim(l);
      const std::size_t rows = dz.rows();
      dout = Tensor2(rows, 2 * dim);
      const Tensor2& eps = noise.eps[idx(l)];
      const Tensor2& raw = g.raw[idx(l)];
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t d = 0; d < dim; ++d) {
          const double mu = code.mu(r, d);
          const double lv = code.logvar(r, d);
          double dmu = dz(r, d);
          double dlv = dz(r, d) * eps(r, d) * 0.5 * std::exp(0.5 * lv);
          dmu += kl_scale * mu;
          dlv += kl_scale * 0.5 * (std::exp(lv) - 1.0);
          const double raw_lv = raw(r, dim + d);
          if (!(raw_lv > -spec.logvar_clamp && raw_lv < spec.logvar_clamp)) dlv = 0.0;
          dout(r, d) = dmu;
          dout(r, dim + d) = dlv;
        }
      }
    } else {
      dout = dz;
    }
    out.nets[idx(role)] = network_backward(state, role, g.caches[idx(role)], dout, false);
  }
}

double squared_error_half(const Tensor2& target, const Tensor2& pred) {
  double s = 0.0;
  auto t = target.data();
  auto p = pred.data();
  for (std::size_t i = 0; i < t.size(); ++i) s += 0.5 * (t[i] - p[i]) * (t[i] - p[i]);
  return s;
}

double norm_k(const Tensor2& target, const Tensor2& pred, int k) {
  double s = 0.0;
  auto t = target.data();
  auto p = pred.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = t[i] - p[i];
    s += k == 1 ? std::abs(d) : d * d;
  }
  return s;
}

Tensor2 norm_k_grad(const Tensor2& target, const Tensor2& pred, int k, double scale) {
  Tensor2 g(pred.rows(), pred.cols());
  auto t = target.data();
  auto p = pred.data();
  auto o = g.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double d = p[i] - t[i];
    o[i] = k == 1 ? scale * double((d > 0) - (d < 0)) : scale * 2.0 * d;
  }
  return g;
}

VccaLoss vcca_value(const ModelSpec& spec, const Graph& g, const Batch& batch) {
  const double n = double(batch.rows());
  VccaLoss loss;
  double kl_total = 0.0;
  for (Latent l : spec.latents()) {
    const LatentCode& code = g.enc.at(l);
    double kl = 0.0;
    for (std::size_t r = 0; r < code.mu.rows(); ++r) kl += kl_diag_gaussian_to_standard(code.mu.row(r), code.logvar.row(r));
    loss.kl[l] = kl / n;
    kl_total += kl / n;
  }
  loss.recon_x = squared_error_half(batch.x, g.rec.x_hat) / n;
  loss.recon_y = squared_error_half(batch.y, g.rec.y_hat) / n;
  loss.total = spec.kl_weight * kl_total + loss.recon_x + loss.recon_y;
  return loss;
}

void require_variational(const ModelSpec& spec, const char* op) {
  if (!is_variational(spec.variant)) {
    throw UsageError(std::string(op) + " is defined for VCCA variants only, not " + to_string(spec.variant));
  }
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kVccaX: return "vcca_x";
    case Variant::kVccaXY: return "vcca_xy";
    case Variant::kVccaPrivate: return "vcca_private";
    case Variant::kAcca: return "acca";
    case Variant::kAccaPrivate: return "acca_private";
  }
  return "?";
}

std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : {Variant::kVccaX, Variant::kVccaXY, Variant::kVccaPrivate, Variant::kAcca, Variant::kAccaPrivate}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

bool is_adversarial(Variant v) { return v == Variant::kAcca || v == Variant::kAccaPrivate; }
bool is_private(Variant v) { return v == Variant::kVccaPrivate || v == Variant::kAccaPrivate; }

std::string to_string(Latent l) {
  switch (l) {
    case Latent::kZ: return "z";
    case Latent::kHx: return "h_x";
    case Latent::kHy: return "h_y";
  }
  return "?";
}

std::string to_string(NetRole r) {
  static constexpr std::array<const char*, kNetRoleCount> names{"enc_z",  "enc_hx", "enc_hy",  "dec_x",
                                                                "dec_y",  "disc_z", "disc_hx", "disc_hy"};
  return names[idx(r)];
}

NetRole encoder_for(Latent l) { return NetRole(idx(NetRole::kEncZ) + idx(l)); }
NetRole discriminator_for(Latent l) { return NetRole(idx(NetRole::kDiscZ) + idx(l)); }

std::vector<std::string> ModelSpec::problems() const {
  std::vector<std::string> out;
  if (x_dim == 0 || y_dim == 0) out.push_back("model: view dimensions must be positive");
  if (z_dim == 0) out.push_back("model.z_dim must be >= 1");
  if (!is_private(variant) && (hx_dim != 0 || hy_dim != 0)) {
    out.push_back("model.hx_dim/hy_dim are only valid for private variants (variant is " + to_string(variant) + ")");
  }
  if (recon_norm != 1 && recon_norm != 2) out.push_back("model.recon_norm must be 1 or 2");
  if (!(kl_weight >= 0.0)) out.push_back("model.kl_weight must be >= 0");
  if (!(logvar_clamp > 0.0)) out.push_back("model.logvar_clamp must be > 0");
  for (auto w : encoder_hidden) {
    if (w == 0) out.push_back("model.encoder_hidden widths must be positive");
  }
  for (auto w : decoder_hidden) {
    if (w == 0) out.push_back("model.decoder_hidden widths must be positive");
  }
  if (is_adversarial(variant)) {
    for (Latent l : latents()) {
      auto it = priors.find(l);
      if (it == priors.end()) {
        out.push_back("priors." + to_string(l) + " is required for adversarial variant " + to_string(variant));
      } else if (it->second.dim() != latent_dim(l)) {
        out.push_back("priors." + to_string(l) + " has dim " + std::to_string(it->second.dim()) + " but the latent has dim " +
                      std::to_string(latent_dim(l)));
      }
    }
    for (const auto& [l, prior] : priors) {
      if (latent_dim(l) == 0) out.push_back("priors." + to_string(l) + " given for an inactive latent");
    }
    for (auto w : discriminator_hidden) {
      if (w == 0) out.push_back("model.discriminator_hidden widths must be positive");
    }
  } else if (!priors.empty()) {
    out.push_back("priors are only valid for adversarial variants; " + to_string(variant) +
                  " uses the fixed N(0, I) prior of its KL term");
  }
  return out;
}

void ModelSpec::validate() const {
  if (auto p = problems(); !p.empty()) throw ConfigError(std::move(p));
}

std::size_t ModelSpec::latent_dim(Latent l) const {
  switch (l) {
    case Latent::kZ: return z_dim;
    case Latent::kHx: return is_private(variant) ? hx_dim : 0;
    case Latent::kHy: return is_private(variant) ? hy_dim : 0;
  }
  return 0;
}

std::vector<Latent> ModelSpec::latents() const {
  std::vector<Latent> out;
  for (Latent l : kAllLatents) {
    if (latent_dim(l) > 0) out.push_back(l);
  }
  return out;
}

bool ModelSpec::has_network(NetRole r) const {
  switch (r) {
    case NetRole::kEncZ: return true;
    case NetRole::kEncHx: return latent_dim(Latent::kHx) > 0;
    case NetRole::kEncHy: return latent_dim(Latent::kHy) > 0;
    case NetRole::kDecX:
    case NetRole::kDecY: return true;
    case NetRole::kDiscZ: return is_adversarial(variant);
    case NetRole::kDiscHx: return is_adversarial(variant) && latent_dim(Latent::kHx) > 0;
    case NetRole::kDiscHy: return is_adversarial(variant) && latent_dim(Latent::kHy) > 0;
  }
  return false;
}

nn::MlpSpec ModelSpec::network_spec(NetRole r) const {
  const std::size_t out_mult = is_variational(variant) ? 2 : 1;
  nn::MlpSpec s;
  auto build = [&](std::size_t in, const std::vector<std::size_t>& hidden, std::size_t out) {
    s.widths = {in};
    s.widths.insert(s.widths.end(), hidden.begin(), hidden.end());
    s.widths.push_back(out);
  };
  switch (r) {
    case NetRole::kEncZ: {
      const bool two_view = variant == Variant::kVccaXY || variant == Variant::kAcca;
      build(two_view ? x_dim + y_dim : x_dim, encoder_hidden, out_mult * z_dim);
      break;
    }
    case NetRole::kEncHx: build(x_dim, encoder_hidden, out_mult * latent_dim(Latent::kHx)); break;
    case NetRole::kEncHy: build(y_dim, encoder_hidden, out_mult * latent_dim(Latent::kHy)); break;
    case NetRole::kDecX:
      build(z_dim + latent_dim(Latent::kHx), decoder_hidden, x_dim);
      if (decoder_sigmoid) s.output = nn::Activation::kSigmoid;
      break;
    case NetRole::kDecY:
      build(z_dim + latent_dim(Latent::kHy), decoder_hidden, y_dim);
      if (decoder_sigmoid) s.output = nn::Activation::kSigmoid;
      break;
    case NetRole::kDiscZ:
    case NetRole::kDiscHx:
    case NetRole::kDiscHy: {
      const auto l = Latent(idx(r) - idx(NetRole::kDiscZ));
      build(latent_dim(l), discriminator_hidden, 1);
      s.output = nn::Activation::kSigmoid;
      break;
    }
  }
  return s;
}

Network& ModelState::net(NetRole r) {
  auto& n = nets[idx(r)];
  if (!n) throw UsageError("model has no network " + to_string(r));
  return *n;
}

const Network& ModelState::net(NetRole r) const {
  const auto& n = nets[idx(r)];
  if (!n) throw UsageError("model has no network " + to_string(r));
  return *n;
}

ModelState init_model(const ModelSpec& spec, const PassOptimizers& optim, std::uint64_t seed) {
  spec.validate();
  ModelState state;
  const bool adversarial = is_adversarial(spec.variant);
  for (std::size_t i = 0; i < kNetRoleCount; ++i) {
    const auto role = NetRole(i);
    if (!spec.has_network(role)) continue;
    Network net;
    net.name = to_string(role);
    net.spec = spec.network_spec(role);
    Rng rng = make_rng(seed, 1000 + i);
    net.params = nn::init_params(net.spec, rng);
    const bool is_disc = role >= NetRole::kDiscZ;
    const bool is_enc = role <= NetRole::kEncHy;
    net.optim = nn::make_optim_state(is_disc ? optim.disc : optim.recon, net.params);
    if (adversarial && is_enc) net.adversarial_optim = nn::make_optim_state(optim.gen, net.params);
    state.nets[i] = std::move(net);
  }
  return state;
}

std::vector<nn::NamedParams> export_params(const ModelState& state) {
  std::vector<nn::NamedParams> out;
  for (const auto& n : state.nets) {
    if (n) out.push_back({n->name, n->params});
  }
  return out;
}

void import_params(ModelState& state, std::span<const nn::NamedParams> params) {
  for (auto& n : state.nets) {
    if (!n) continue;
    auto it = std::find_if(params.begin(), params.end(), [&](const nn::NamedParams& p) { return p.name == n->name; });
    if (it == params.end()) throw DataError("checkpoint lacks network '" + n->name + "'");
    try {
      nn::check_params(n->spec, it->params);
    } catch (const DimensionError& e) {
      throw DataError("checkpoint network '" + n->name + "' does not match the model: " + e.what());
    }
    const auto version = n->params.version;
    n->params = it->params;
    n->params.version = version + 1;
  }
}

Tensor2 encoder_input(const ModelSpec& spec, Latent l, const Batch& batch) {
  switch (l) {
    case Latent::kZ:
      if (spec.variant == Variant::kVccaXY || spec.variant == Variant::kAcca) return hconcat(batch.x, batch.y);
      return batch.x;
    case Latent::kHx: return batch.x;
    case Latent::kHy: return batch.y;
  }
  return {};
}

Tensor2 network_forward(const ModelState& state, NetRole r, const Tensor2& input) {
  const auto& n = state.net(r);
  return nn::mlp_forward(n.spec, n.params, input);
}

Tensor2 network_forward(const ModelState& state, NetRole r, const Tensor2& input, nn::ForwardCache& cache) {
  const auto& n = state.net(r);
  return nn::mlp_forward(n.spec, n.params, input, cache);
}

nn::MlpGradients network_backward(const ModelState& state, NetRole r, const nn::ForwardCache& cache,
                                  const Tensor2& output_grad, bool want_input_grad) {
  const auto& n = state.net(r);
  return nn::mlp_backward(n.spec, n.params, cache, output_grad, want_input_grad);
}

Noise draw_noise(const ModelSpec& spec, std::size_t rows, Rng& rng) {
  Noise noise;
  if (!is_variational(spec.variant)) return noise;
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Latent l : spec.latents()) {
    Tensor2 eps(rows, spec.latent_dim(l));
    for (double& v : eps.data()) v = normal(rng);
    noise.eps[idx(l)] = std::move(eps);
  }
  return noise;
}

const LatentCode& Encoding::at(Latent l) const {
  const auto& c = codes[idx(l)];
  if (!c) throw UsageError("encoding has no latent " + to_string(l));
  return *c;
}

Encoding encode(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise,
                EncodeMode mode) {
  return forward_graph(state, spec, batch, noise, mode, false).enc;
}

Encoding encode(const ModelState& state, const ModelSpec& spec, const Batch& batch, Rng& rng, EncodeMode mode) {
  Noise noise;
  if (mode == EncodeMode::kSample) noise = draw_noise(spec, batch.rows(), rng);
  // Only the encoders are needed here; skip the decoders.
  Encoding enc;
  const bool variational = is_variational(spec.variant);
  for (Latent l : spec.latents()) {
    Tensor2 raw = network_forward(state, encoder_for(l), encoder_input(spec, l, batch));
    LatentCode code;
    const std::size_t dim = spec.latent_dim(l);
    if (variational) {
      code.mu = slice_cols(raw, 0, dim);
      code.logvar = slice_cols(raw, dim, dim);
      for (double& v : code.logvar.data()) v = std::clamp(v, -spec.logvar_clamp, spec.logvar_clamp);
      code.z = code.mu;
      if (mode == EncodeMode::kSample) {
        auto zs = code.z.data();
        auto lv = code.logvar.data();
        auto e = noise.eps[idx(l)].data();
        for (std::size_t i = 0; i < zs.size(); ++i) zs[i] += std::exp(0.5 * lv[i]) * e[i];
      }
    } else {
      code.z = std::move(raw);
    }
    enc.codes[idx(l)] = std::move(code);
  }
  return enc;
}

LatentSet latents_of(const Encoding& e) {
  LatentSet out;
  for (std::size_t i = 0; i < 3; ++i) {
    if (e.codes[i]) out[i] = e.codes[i]->z;
  }
  return out;
}

Reconstruction decode(const ModelState& state, const ModelSpec& spec, const LatentSet& latents) {
  const Tensor2& z = latents[idx(Latent::kZ)];
  if (z.cols() != spec.z_dim) throw DimensionError("decode: z has width " + std::to_string(z.cols()));
  for (Latent l : {Latent::kHx, Latent::kHy}) {
    const auto& h = latents[idx(l)];
    if (spec.latent_dim(l) > 0 && (h.cols() != spec.latent_dim(l) || h.rows() != z.rows())) {
      throw DimensionError("decode: " + to_string(l) + " has shape " + std::to_string(h.rows()) + "x" +
                           std::to_string(h.cols()));
    }
  }
  Reconstruction rec;
  rec.x_hat = network_forward(state, NetRole::kDecX, decoder_input(spec, latents, Latent::kHx));
  rec.y_hat = network_forward(state, NetRole::kDecY, decoder_input(spec, latents, Latent::kHy));
  return rec;
}

double kl_diag_gaussian_to_standard(std::span<const double> mu, std::span<const double> logvar) {
  if (mu.size() != logvar.size()) throw DimensionError("kl: mu and logvar lengths differ");
  double s = 0.0;
  for (std::size_t d = 0; d < mu.size(); ++d) {
    // expm1 keeps exp(lv) - lv - 1 accurate (and >= 0) for small lv.
    s += mu[d] * mu[d] + (std::expm1(logvar[d]) - logvar[d]);
  }
  return std::max(0.0, 0.5 * s);
}

VccaLoss vcca_loss(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise) {
  require_variational(spec, "vcca_loss");
  const Graph g = forward_graph(state, spec, batch, noise, EncodeMode::kSample, false);
  return vcca_value(spec, g, batch);
}

VccaLoss vcca_loss_and_gradients(const ModelState& state, const ModelSpec& spec, const Batch& batch,
                                 const Noise& noise, ModelGradients& grads) {
  require_variational(spec, "vcca_loss");
  const Graph g = forward_graph(state, spec, batch, noise, EncodeMode::kSample, true);
  const VccaLoss loss = vcca_value(spec, g, batch);
  const double n = double(batch.rows());
  Tensor2 gx(g.rec.x_hat.rows(), g.rec.x_hat.cols());
  Tensor2 gy(g.rec.y_hat.rows(), g.rec.y_hat.cols());
  for (std::size_t i = 0; i < gx.size(); ++i) gx.data()[i] = (g.rec.x_hat.data()[i] - batch.x.data()[i]) / n;
  for (std::size_t i = 0; i < gy.size(); ++i) gy.data()[i] = (g.rec.y_hat.data()[i] - batch.y.data()[i]) / n;
  grads = ModelGradients{};
  backward_graph(state, spec, g, gx, gy, noise, spec.kl_weight / n, grads);
  return loss;
}

double reconstruction_loss(const ModelState& state, const ModelSpec& spec, const Batch& batch, const Noise& noise) {
  const Graph g = forward_graph(state, spec, batch, noise, EncodeMode::kSample, false);
  const double n = double(batch.rows());
  return (norm_k(batch.x, g.rec.x_hat, spec.recon_norm) + norm_k(batch.y, g.rec.y_hat, spec.recon_norm)) / n;
}

double reconstruction_loss_and_gradients(const ModelState& state, const ModelSpec& spec, const Batch& batch,
                                         const Noise& noise, ModelGradients& grads) {
  const Graph g = forward_graph(state, spec, batch, noise, EncodeMode::kSample, true);
  const double n = double(batch.rows());
  const double loss =
      (norm_k(batch.x, g.rec.x_hat, spec.recon_norm) + norm_k(batch.y, g.rec.y_hat, spec.recon_norm)) / n;
  grads = ModelGradients{};
  backward_graph(state, spec, g, norm_k_grad(batch.x, g.rec.x_hat, spec.recon_norm, 1.0 / n),
                 norm_k_grad(batch.y, g.rec.y_hat, spec.recon_norm, 1.0 / n), noise, 0.0, grads);
  return loss;
}

}  // namespace mvrl::models
