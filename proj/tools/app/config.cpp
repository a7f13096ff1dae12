#include "config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

#include "mvrl/errors.hpp"
#include "mvrl/report/csv.hpp"

namespace mvrl::app {
namespace {

using models::Latent;

std::string join_path(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

class Reader {
 public:
  std::vector<std::string> errors;

  bool is_map(const YAML::Node& node, const std::string& path) {
    if (node.IsMap()) return true;
    errors.push_back(path + ": expected a mapping");
    return false;
  }

  void check_keys(const YAML::Node& map, const std::string& path, const std::set<std::string>& allowed) {
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.contains(key)) errors.push_back(join_path(path, key) + ": unknown key");
    }
  }

  template <class T>
  bool scalar(const YAML::Node& map, const std::string& path, const char* key, T& out, const char* type) {
    const YAML::Node node = map[key];
    if (!node) return false;
    try {
      if (!node.IsScalar()) throw YAML::BadConversion(node.Mark());
      out = node.as<T>();
      return true;
    } catch (const YAML::Exception&) {
      errors.push_back(join_path(path, key) + ": expected " + type);
      return false;
    }
  }

  void count(const YAML::Node& map, const std::string& path, const char* key, std::size_t& out) {
    long long v = 0;
    if (!scalar(map, path, key, v, "a non-negative integer")) return;
    if (v < 0) {
      errors.push_back(join_path(path, key) + ": must be >= 0");
      return;
    }
    out = std::size_t(v);
  }

  void seed(const YAML::Node& map, const std::string& path, const char* key, std::uint64_t& out) {
    unsigned long long v = 0;
    std::string text;
    if (!scalar(map, path, key, text, "an unsigned integer")) return;
    if (text.empty() || text.find_first_not_of("0123456789") != std::string::npos) {
      errors.push_back(join_path(path, key) + ": expected an unsigned integer");
      return;
    }
    try {
      v = std::stoull(text);
    } catch (const std::exception&) {
      errors.push_back(join_path(path, key) + ": out of range");
      return;
    }
    out = v;
  }

  void real(const YAML::Node& map, const std::string& path, const char* key, double& out) {
    scalar(map, path, key, out, "a number");
  }

  void flag(const YAML::Node& map, const std::string& path, const char* key, bool& out) {
    scalar(map, path, key, out, "true or false");
  }

  void text(const YAML::Node& map, const std::string& path, const char* key, std::string& out) {
    scalar(map, path, key, out, "a string");
  }

  void widths(const YAML::Node& map, const std::string& path, const char* key, std::vector<std::size_t>& out) {
    const YAML::Node node = map[key];
    if (!node) return;
    if (!node.IsSequence()) {
      errors.push_back(join_path(path, key) + ": expected a list of layer widths");
      return;
    }
    std::vector<std::size_t> v;
    for (std::size_t i = 0; i < node.size(); ++i) {
      long long w = 0;
      try {
        w = node[i].as<long long>();
      } catch (const YAML::Exception&) {
        errors.push_back(join_path(path, key) + "[" + std::to_string(i) + "]: expected an integer");
        continue;
      }
      if (w <= 0) {
        errors.push_back(join_path(path, key) + "[" + std::to_string(i) + "]: must be positive");
        continue;
      }
      v.push_back(std::size_t(w));
    }
    out = std::move(v);
  }
};

std::optional<Latent> parse_latent(std::string_view s) {
  for (Latent l : models::kAllLatents) {
    if (s == models::to_string(l)) return l;
  }
  return std::nullopt;
}

void read_prior(Reader& r, const YAML::Node& node, const std::string& path, Latent l, const models::ModelSpec& model,
                std::map<Latent, Prior>& out) {
  if (!r.is_map(node, path)) return;
  r.check_keys(node, path, {"kind", "low", "high", "width_low", "width_high", "dim"});
  std::string kind_text = "standard_gaussian";
  r.text(node, path, "kind", kind_text);
  const auto kind = parse_prior_kind(kind_text);
  if (!kind) {
    r.errors.push_back(path + ".kind: unknown prior '" + kind_text +
                       "' (expected standard_gaussian, uniform_box or s_manifold)");
    return;
  }
  std::size_t dim = model.latent_dim(l);
  r.count(node, path, "dim", dim);
  try {
    switch (*kind) {
      case PriorKind::kStandardGaussian:
        out.emplace(l, Prior::standard_gaussian(dim));
        break;
      case PriorKind::kUniformBox: {
        double lo = -1.0, hi = 1.0;
        r.real(node, path, "low", lo);
        r.real(node, path, "high", hi);
        out.emplace(l, Prior::uniform_box(dim, lo, hi));
        break;
      }
      case PriorKind::kSManifold: {
        double lo = 0.0, hi = 2.0;
        r.real(node, path, "width_low", lo);
        r.real(node, path, "width_high", hi);
        out.emplace(l, Prior::s_manifold(lo, hi));
        break;
      }
    }
  } catch (const std::exception& e) {
    r.errors.push_back(path + ": " + e.what());
  }
}

void read_optimizer(Reader& r, const YAML::Node& node, const std::string& path, models::PassOptimizers& opt) {
  if (!r.is_map(node, path)) return;
  r.check_keys(node, path, {"kind", "learning_rate", "recon_lr", "disc_lr", "gen_lr", "beta1", "adversarial_beta1", "beta2",
                              "epsilon"});
  std::string kind = "adam";
  r.text(node, path, "kind", kind);
  nn::OptimizerKind k = nn::OptimizerKind::kAdam;
  if (kind == "sgd") {
    k = nn::OptimizerKind::kSgd;
  } else if (kind != "adam") {
    r.errors.push_back(path + ".kind: unknown optimizer '" + kind + "' (expected adam or sgd)");
  }
  double lr = opt.recon.learning_rate;
  r.real(node, path, "learning_rate", lr);
  for (auto* cfg : {&opt.recon, &opt.disc, &opt.gen}) {
    cfg->kind = k;
    cfg->learning_rate = lr;
    r.real(node, path, "beta1", cfg->beta1);
    r.real(node, path, "beta2", cfg->beta2);
    r.real(node, path, "epsilon", cfg->epsilon);
  }
  r.real(node, path, "recon_lr", opt.recon.learning_rate);
  r.real(node, path, "disc_lr", opt.disc.learning_rate);
  r.real(node, path, "gen_lr", opt.gen.learning_rate);
  r.real(node, path, "adversarial_beta1", opt.disc.beta1);
  opt.gen.beta1 = opt.disc.beta1;
}

std::string widths_yaml(const std::vector<std::size_t>& w) {
  std::string s = "[";
  for (std::size_t i = 0; i < w.size(); ++i) s += (i ? ", " : "") + std::to_string(w[i]);
  return s + "]";
}

std::string number_yaml(double v) { return report::format_double(v); }

}  // namespace

models::ModelSpec ExperimentConfig::resolved_model() const {
  models::ModelSpec m = model;
  if (extra_decoder_layers) {
    const std::size_t w = m.decoder_hidden.empty() ? 1024 : m.decoder_hidden.back();
    m.decoder_hidden.push_back(w);
    m.decoder_hidden.push_back(w);
  }
  return m;
}

std::uint64_t ExperimentConfig::init_seed() const { return derive_seed(seed, 1); }

ExperimentConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError({"syntax error at line " + std::to_string(e.mark.line + 1) + ", column " +
                       std::to_string(e.mark.column + 1) + ": " + e.msg});
  }
  if (!root || root.IsNull()) throw ConfigError({"config is empty"});
  Reader r;
  ExperimentConfig c;
  if (!r.is_map(root, "config")) throw ConfigError(r.errors);
  r.check_keys(root, "", {"name", "seed", "output_dir", "dataset", "model", "priors", "training", "evaluation"});
  r.text(root, "", "name", c.name);
  r.seed(root, "", "seed", c.seed);
  r.text(root, "", "output_dir", c.output_dir);
  c.dataset.seed = c.seed;
  c.training.seed = c.seed;

  if (const auto d = root["dataset"]; d && r.is_map(d, "dataset")) {
    r.check_keys(d, "dataset", {"variant", "seed", "mnist_dir", "size"});
    std::string variant = data::to_string(c.dataset.variant);
    r.text(d, "dataset", "variant", variant);
    if (auto v = data::parse_dataset_variant(variant)) {
      c.dataset.variant = *v;
    } else {
      r.errors.push_back("dataset.variant: unknown dataset '" + variant + "' (expected tangled or noisy)");
    }
    r.seed(d, "dataset", "seed", c.dataset.seed);
    r.text(d, "dataset", "mnist_dir", c.dataset.mnist_dir);
    r.count(d, "dataset", "size", c.dataset.size);
  }

  if (const auto m = root["model"]; m && r.is_map(m, "model")) {
    r.check_keys(m, "model", {"variant", "z_dim", "hx_dim", "hy_dim", "encoder_hidden", "decoder_hidden",
                              "extra_decoder_layers", "discriminator_hidden", "recon_norm", "kl_weight",
                              "logvar_clamp"});
    std::string variant = models::to_string(c.model.variant);
    r.text(m, "model", "variant", variant);
    if (auto v = models::parse_variant(variant)) {
      c.model.variant = *v;
    } else {
      r.errors.push_back("model.variant: unknown variant '" + variant +
                         "' (expected vcca_x, vcca_xy, vcca_private, acca or acca_private)");
    }
    r.count(m, "model", "z_dim", c.model.z_dim);
    r.count(m, "model", "hx_dim", c.model.hx_dim);
    r.count(m, "model", "hy_dim", c.model.hy_dim);
    r.widths(m, "model", "encoder_hidden", c.model.encoder_hidden);
    r.widths(m, "model", "decoder_hidden", c.model.decoder_hidden);
    r.widths(m, "model", "discriminator_hidden", c.model.discriminator_hidden);
    r.flag(m, "model", "extra_decoder_layers", c.extra_decoder_layers);
    long long norm = c.model.recon_norm;
    if (r.scalar(m, "model", "recon_norm", norm, "1 or 2")) c.model.recon_norm = int(norm);
    r.real(m, "model", "kl_weight", c.model.kl_weight);
    r.real(m, "model", "logvar_clamp", c.model.logvar_clamp);
  }

  if (const auto p = root["priors"]; p && r.is_map(p, "priors")) {
    for (const auto& kv : p) {
      const auto key = kv.first.as<std::string>();
      const auto l = parse_latent(key);
      if (!l) {
        r.errors.push_back("priors." + key + ": unknown latent (expected z, h_x or h_y)");
        continue;
      }
      read_prior(r, kv.second, "priors." + key, *l, c.model, c.model.priors);
    }
  }

  if (const auto t = root["training"]; t && r.is_map(t, "training")) {
    r.check_keys(t, "training", {"epochs", "batch_size", "seed", "validate_every", "validation_fraction", "optimizer"});
    r.count(t, "training", "epochs", c.training.epochs);
    r.count(t, "training", "batch_size", c.training.batch_size);
    r.seed(t, "training", "seed", c.training.seed);
    r.count(t, "training", "validate_every", c.training.validate_every);
    r.real(t, "training", "validation_fraction", c.training.validation_fraction);
    if (const auto o = t["optimizer"]) read_optimizer(r, o, "training.optimizer", c.training.optim);
  }

  if (const auto e = root["evaluation"]; e && r.is_map(e, "evaluation")) {
    r.check_keys(e, "evaluation", {"info_curves", "info_every", "samples", "figures"});
    r.flag(e, "evaluation", "info_curves", c.evaluation.info_curves);
    r.count(e, "evaluation", "info_every", c.evaluation.info_every);
    r.count(e, "evaluation", "samples", c.evaluation.samples);
    r.flag(e, "evaluation", "figures", c.evaluation.figures);
  }

  for (auto& p : c.resolved_model().problems()) r.errors.push_back(std::move(p));
  for (auto& p : c.training.problems()) r.errors.push_back(std::move(p));
  if (c.evaluation.info_every < 1) r.errors.push_back("evaluation.info_every must be >= 1");
  if (c.evaluation.samples < 10) r.errors.push_back("evaluation.samples must be >= 10");
  if (c.dataset.size == 1) r.errors.push_back("dataset.size must be 0 (all) or >= 2");
  if (c.output_dir.empty()) r.errors.push_back("output_dir must not be empty");
  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot read config file '" + path + "'"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_yaml(const ExperimentConfig& c) {
  const auto& m = c.model;
  const auto& o = c.training.optim;
  std::ostringstream y;
  y << "name: " << c.name << "\n"
    << "seed: " << c.seed << "\n"
    << "output_dir: " << c.output_dir << "\n"
    << "dataset:\n"
    << "  variant: " << data::to_string(c.dataset.variant) << "\n"
    << "  seed: " << c.dataset.seed << "\n"
    << "  mnist_dir: " << c.dataset.mnist_dir << "\n"
    << "  size: " << c.dataset.size << "\n"
    << "model:\n"
    << "  variant: " << models::to_string(m.variant) << "\n"
    << "  z_dim: " << m.z_dim << "\n"
    << "  hx_dim: " << m.hx_dim << "\n"
    << "  hy_dim: " << m.hy_dim << "\n"
    << "  encoder_hidden: " << widths_yaml(m.encoder_hidden) << "\n"
    << "  decoder_hidden: " << widths_yaml(m.decoder_hidden) << "\n"
    << "  extra_decoder_layers: " << (c.extra_decoder_layers ? "true" : "false") << "\n"
    << "  discriminator_hidden: " << widths_yaml(m.discriminator_hidden) << "\n"
    << "  recon_norm: " << m.recon_norm << "\n"
    << "  kl_weight: " << number_yaml(m.kl_weight) << "\n"
    << "  logvar_clamp: " << number_yaml(m.logvar_clamp) << "\n";
  if (!m.priors.empty()) {
    y << "priors:\n";
    for (const auto& [l, p] : m.priors) {
      y << "  " << models::to_string(l) << ":\n    kind: " << to_string(p.kind()) << "\n";
      if (p.kind() == PriorKind::kUniformBox) {
        y << "    low: " << number_yaml(p.low()) << "\n    high: " << number_yaml(p.high()) << "\n";
      } else if (p.kind() == PriorKind::kSManifold) {
        y << "    width_low: " << number_yaml(p.low()) << "\n    width_high: " << number_yaml(p.high()) << "\n";
      }
    }
  }
  y << "training:\n"
    << "  epochs: " << c.training.epochs << "\n"
    << "  batch_size: " << c.training.batch_size << "\n"
    << "  seed: " << c.training.seed << "\n"
    << "  validate_every: " << c.training.validate_every << "\n"
    << "  validation_fraction: " << number_yaml(c.training.validation_fraction) << "\n"
    << "  optimizer:\n"
    << "    kind: " << (o.recon.kind == nn::OptimizerKind::kAdam ? "adam" : "sgd") << "\n"
    << "    recon_lr: " << number_yaml(o.recon.learning_rate) << "\n"
    << "    disc_lr: " << number_yaml(o.disc.learning_rate) << "\n"
    << "    gen_lr: " << number_yaml(o.gen.learning_rate) << "\n"
    << "    beta1: " << number_yaml(o.recon.beta1) << "\n"
    << "    adversarial_beta1: " << number_yaml(o.disc.beta1) << "\n"
    << "    beta2: " << number_yaml(o.recon.beta2) << "\n"
    << "    epsilon: " << number_yaml(o.recon.epsilon) << "\n"
    << "evaluation:\n"
    << "  info_curves: " << (c.evaluation.info_curves ? "true" : "false") << "\n"
    << "  info_every: " << c.evaluation.info_every << "\n"
    << "  samples: " << c.evaluation.samples << "\n"
    << "  figures: " << (c.evaluation.figures ? "true" : "false") << "\n";
  return y.str();
}

nlohmann::json to_json(const ExperimentConfig& c) {
  const auto m = c.resolved_model();
  nlohmann::json priors = nlohmann::json::object();
  for (const auto& [l, p] : m.priors) {
    priors[models::to_string(l)] = {{"kind", to_string(p.kind())}, {"dim", p.dim()}, {"low", p.low()}, {"high", p.high()}};
  }
  const auto& o = c.training.optim;
  return {
      {"name", c.name},
      {"seed", c.seed},
      {"output_dir", c.output_dir},
      {"dataset",
       {{"variant", data::to_string(c.dataset.variant)},
        {"seed", c.dataset.seed},
        {"mnist_dir", c.dataset.mnist_dir},
        {"size", c.dataset.size}}},
      {"model",
       {{"variant", models::to_string(m.variant)},
        {"z_dim", m.z_dim},
        {"hx_dim", m.hx_dim},
        {"hy_dim", m.hy_dim},
        {"encoder_hidden", m.encoder_hidden},
        {"decoder_hidden", m.decoder_hidden},
        {"discriminator_hidden", m.discriminator_hidden},
        {"recon_norm", m.recon_norm},
        {"kl_weight", m.kl_weight},
        {"logvar_clamp", m.logvar_clamp}}},
      {"priors", priors},
      {"training",
       {{"epochs", c.training.epochs},
        {"batch_size", c.training.batch_size},
        {"seed", c.training.seed},
        {"validate_every", c.training.validate_every},
        {"validation_fraction", c.training.validation_fraction},
        {"recon_lr", o.recon.learning_rate},
        {"disc_lr", o.disc.learning_rate},
        {"gen_lr", o.gen.learning_rate},
        {"beta1", o.recon.beta1},
        {"adversarial_beta1", o.disc.beta1},
        {"beta2", o.recon.beta2},
        {"epsilon", o.recon.epsilon}}},
      {"evaluation",
       {{"info_curves", c.evaluation.info_curves},
        {"info_every", c.evaluation.info_every},
        {"samples", c.evaluation.samples},
        {"figures", c.evaluation.figures}}},
  };
}

}  // namespace mvrl::app
