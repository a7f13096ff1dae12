#include "run.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvrl/binary_io.hpp"
#include "mvrl/data/idx.hpp"
#include "mvrl/data/synthetic_digits.hpp"
#include "mvrl/errors.hpp"
#include "mvrl/eval/density.hpp"
#include "mvrl/eval/probes.hpp"
#include "mvrl/nn/checkpoint.hpp"
#include "mvrl/report/csv.hpp"
#include "mvrl/report/figures.hpp"

namespace mvrl::app {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr const char* kConfigFile = "config.yaml";
constexpr const char* kResolvedConfigFile = "config.json";
constexpr const char* kProvenanceFile = "provenance.json";
constexpr const char* kCurvesFile = "curves_losses.csv";
constexpr const char* kInfoFile = "curves_information.csv";
constexpr const char* kBestCheckpoint = "checkpoint_best.mvrl";
constexpr const char* kFinalCheckpoint = "checkpoint_final.mvrl";
constexpr const char* kSummaryFile = "summary.json";
constexpr const char* kSamplesFile = "eval_samples.mvds";
constexpr const char* kEvaluationFile = "evaluation.json";
constexpr const char* kInfoMatrixFile = "info_matrix.csv";
constexpr std::size_t kMnistTrainCount = 60000;
constexpr std::uint64_t kProbeSeed = 0x50524f;

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write " + p.string());
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_text(p, j.dump(2) + "\n"); }

std::string hash_file(const fs::path& p) { return git_blob_hash(read_file_bytes(p)); }

fs::path find_mnist_file(const fs::path& dir, const char* dashed, const char* dotted) {
  for (const char* name : {dashed, dotted}) {
    if (fs::exists(dir / name)) return dir / name;
  }
  return {};
}

struct RunContext {
  ExperimentConfig config;
  models::ModelSpec spec;
  models::ModelState state;
  data::MultiviewDataset samples;
};

RunContext open_run(const fs::path& run_dir, const char* checkpoint) {
  if (!fs::is_directory(run_dir)) throw DataError("run directory " + run_dir.string() + " does not exist");
  RunContext ctx{load_config((run_dir / kConfigFile).string()), {}, {}, {}};
  ctx.spec = ctx.config.resolved_model();
  ctx.state = models::init_model(ctx.spec, ctx.config.training.optim, ctx.config.init_seed());
  fs::path ckpt = run_dir / checkpoint;
  if (!fs::exists(ckpt)) ckpt = run_dir / kFinalCheckpoint;
  const auto params = nn::load_checkpoint(ckpt);
  models::import_params(ctx.state, params);
  ctx.samples = data::load_mvds(run_dir / kSamplesFile);
  return ctx;
}

Prior prior_for(const models::ModelSpec& spec, models::Latent l) {
  const auto it = spec.priors.find(l);
  return it != spec.priors.end() ? it->second : Prior::standard_gaussian(spec.latent_dim(l));
}

double mean_squared_recon(const models::ModelState& state, const models::ModelSpec& spec,
                          const data::MultiviewDataset& ds) {
  Rng unused(0);
  const models::Batch b{ds.view_x, ds.view_y};
  const auto enc = models::encode(state, spec, b, unused, models::EncodeMode::kMean);
  const auto rec = models::decode(state, spec, models::latents_of(enc));
  double s = 0.0;
  for (std::size_t i = 0; i < b.x.size(); ++i) {
    s += std::pow(b.x.data()[i] - rec.x_hat.data()[i], 2) + std::pow(b.y.data()[i] - rec.y_hat.data()[i], 2);
  }
  return s / double(ds.size());
}

}  // namespace

std::string git_blob_hash(std::span<const std::uint8_t> content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

fs::path mnist_dir_for(const DatasetConfig& config) {
  if (const char* env = std::getenv("MVRL_MNIST_DIR"); env && *env) return env;
  return config.mnist_dir;
}

void synth_digits(const fs::path& out_dir, std::size_t count, std::uint64_t seed) {
  data::write_mnist_dir(out_dir, data::render_synthetic_digits(count, seed));
}

data::MultiviewDataset build_configured_dataset(const DatasetConfig& config, std::string* input_hashes_json) {
  const fs::path dir = mnist_dir_for(config);
  auto mnist = data::load_mnist_dir(dir);
  if (input_hashes_json) {
    json inputs = json::object();
    for (const auto& [key, dashed, dotted] :
         {std::tuple{"images", "train-images-idx3-ubyte", "train-images.idx3-ubyte"},
          std::tuple{"labels", "train-labels-idx1-ubyte", "train-labels.idx1-ubyte"}}) {
      const fs::path p = find_mnist_file(dir, dashed, dotted);
      if (!p.empty()) inputs[key] = {{"path", p.string()}, {"git_blob", hash_file(p)}};
    }
    *input_hashes_json = inputs.dump();
  }
  if (config.size > 0) mnist = data::head(mnist, config.size);
  return data::build_dataset(mnist, config.variant, config.seed);
}

void run_train(const ExperimentConfig& config, const std::string& config_text, const fs::path& run_dir) {
  fs::create_directories(run_dir);
  write_text(run_dir / kConfigFile, config_text);
  write_json(run_dir / kResolvedConfigFile, to_json(config));

  std::string mnist_hashes;
  const auto dataset = build_configured_dataset(config.dataset, &mnist_hashes);
  const std::size_t keep = std::min(config.evaluation.samples, dataset.size());
  std::vector<std::size_t> sample_rows(keep);
  for (std::size_t i = 0; i < keep; ++i) sample_rows[i] = i;
  const auto samples = data::subset(dataset, sample_rows);

  const std::string config_hash =
      git_blob_hash(std::span(reinterpret_cast<const std::uint8_t*>(config_text.data()), config_text.size()));
  json inputs = json::parse(mnist_hashes);
  inputs["config"] = {{"path", kConfigFile}, {"git_blob", config_hash}};
  std::string combined;
  for (const auto& [k, v] : inputs.items()) combined += k + " " + v["git_blob"].get<std::string>() + "\n";
  const json provenance = {
      {"inputs", inputs},
      {"content_hash", git_blob_hash(std::span(reinterpret_cast<const std::uint8_t*>(combined.data()), combined.size()))},
      {"seeds",
       {{"master", config.seed},
        {"dataset", config.dataset.seed},
        {"model_init", config.init_seed()},
        {"training", config.training.seed},
        {"probe_split", kProbeSeed}}},
      {"dataset", {{"variant", data::to_string(dataset.variant)}, {"pairs", dataset.size()}}},
  };
  write_json(run_dir / kProvenanceFile, provenance);
  data::save_mvds(run_dir / kSamplesFile, samples, provenance.dump());

  const auto spec = config.resolved_model();
  auto state = models::init_model(spec, config.training.optim, config.init_seed());
  std::vector<report::InfoRecord> info;
  train::ExperimentReport live;
  live.variant = spec.variant;
  train::TrainHooks hooks;
  hooks.on_epoch_end = [&](const train::EpochRecord& rec, const models::ModelState& st) {
    live.epochs.push_back(rec);
    report::write_csv(run_dir / kCurvesFile, report::curves_table(live));
    if (config.evaluation.info_curves && (rec.epoch % config.evaluation.info_every == 0 || rec.epoch == config.training.epochs)) {
      info.push_back({rec.epoch, eval::info_matrix(eval::embed(st, spec, samples), kProbeSeed)});
      report::write_csv(run_dir / kInfoFile, report::information_table(info));
    }
    std::printf("epoch %zu/%zu  recon %.4f  score %.6f  (%.1fs)\n", rec.epoch, config.training.epochs, rec.train.recon,
                rec.score, rec.seconds);
    std::fflush(stdout);
  };
  hooks.on_new_best = [&](const train::EpochRecord&, const models::ModelState& st) {
    nn::save_checkpoint(run_dir / kBestCheckpoint, models::export_params(st));
  };

  const auto result = train::train(state, spec, dataset, config.training, hooks);
  nn::save_checkpoint(run_dir / kFinalCheckpoint, models::export_params(state));
  double seconds = 0.0;
  for (const auto& e : result.report.epochs) seconds += e.seconds;
  write_json(run_dir / kSummaryFile, {{"config", to_json(config)},
                                      {"best_epoch", result.report.best_epoch},
                                      {"best_score", result.report.best_score},
                                      {"epochs", result.report.epochs.size()},
                                      {"train_seconds", seconds},
                                      {"content_hash", provenance["content_hash"]}});
  if (config.evaluation.figures) {
    run_evaluate(run_dir);
    run_report(run_dir);
  }
}

void run_evaluate(const fs::path& run_dir) {
  auto ctx = open_run(run_dir, kBestCheckpoint);
  const auto embs = eval::embed(ctx.state, ctx.spec, ctx.samples);
  const auto info = eval::info_matrix(embs, kProbeSeed);
  report::CsvTable t = report::information_table({{0, info}});
  t.header.erase(t.header.begin());
  t.rows.front().erase(t.rows.front().begin());
  report::write_csv(run_dir / kInfoMatrixFile, t);

  json fit = json::object();
  for (const auto& [l, rep] : embs.reps) {
    const Prior prior = prior_for(ctx.spec, l);
    Rng rng = make_rng(ctx.config.seed, 0x4d4d44 + std::size_t(l));
    const Tensor2 draws = prior.sample(rep.rows(), rng);
    json entry = {{"mmd2", eval::mmd(rep, draws)}};
    if (prior.kind() == PriorKind::kStandardGaussian && rep.cols() == 2) entry["hole_fraction"] = eval::hole_fraction(rep);
    if (prior.kind() == PriorKind::kSManifold) {
      std::vector<double> d(rep.rows());
      for (std::size_t i = 0; i < rep.rows(); ++i) {
        d[i] = distance_to_s_manifold({rep(i, 0), rep(i, 1), rep(i, 2)}, prior.low(), prior.high());
      }
      std::nth_element(d.begin(), d.begin() + std::ptrdiff_t(d.size() / 2), d.end());
      entry["median_manifold_distance"] = d[d.size() / 2];
    }
    fit[models::to_string(l)] = entry;
  }
  json info_json = json::object();
  for (const auto& [k, v] : info.entries) info_json[models::to_string(k.first) + "_" + eval::to_string(k.second)] = v;
  write_json(run_dir / kEvaluationFile, {{"samples", ctx.samples.size()},
                                         {"info_matrix", info_json},
                                         {"posterior_fit", fit},
                                         {"mean_squared_reconstruction", mean_squared_recon(ctx.state, ctx.spec, ctx.samples)}});
}

void run_report(const fs::path& run_dir) {
  auto ctx = open_run(run_dir, kBestCheckpoint);
  const fs::path out = run_dir / "figures";
  const auto variant = ctx.spec.variant;
  const auto curves = report::report_from_curves(report::read_csv(run_dir / kCurvesFile), variant);
  std::vector<report::InfoRecord> info;
  if (fs::exists(run_dir / kInfoFile)) info = report::information_from_table(report::read_csv(run_dir / kInfoFile));
  report::plot_curves(curves, info, out);

  const auto embs = eval::embed(ctx.state, ctx.spec, ctx.samples);
  report::plot_embeddings(embs, out);
  for (const auto& [l, rep] : embs.reps) {
    if (rep.cols() == 2) report::write_kde_map(report::kde_map(rep), models::to_string(l), out);
  }
  const std::size_t rows = ctx.samples.image_rows, cols = ctx.samples.image_cols;
  if (ctx.spec.z_dim == 2) report::write_grid_walk(report::grid_walk(ctx.state, ctx.spec), rows, cols, out);
  const auto panel = report::recon_panel(ctx.state, ctx.spec, ctx.samples, 5, ctx.config.seed);
  if (panel.clamped) std::fprintf(stderr, "warning: recon panel clamped to %zu rows\n", panel.indices.size());
  report::write_recon_panel(panel, rows, cols, out);
  report::write_random_generations(report::random_generations(ctx.state, ctx.spec, 64, ctx.config.seed), rows, cols, out);
}

std::vector<ExperimentConfig> experiment_configs(const ReproduceOptions& o) {
  if (!(o.scale > 0.0 && o.scale <= 1.0)) throw ConfigError({"--scale must lie in (0, 1]"});
  auto base = [&](const std::string& name, models::Variant v, std::size_t dim) {
    ExperimentConfig c;
    c.name = o.experiment + "/" + name;
    c.seed = o.seed;
    c.output_dir = (o.out_root / o.experiment / name).string();
    c.dataset.seed = o.seed;
    c.dataset.size = std::max<std::size_t>(2, std::size_t(std::llround(o.scale * double(kMnistTrainCount))));
    if (o.mnist_dir) c.dataset.mnist_dir = *o.mnist_dir;
    c.training.seed = o.seed;
    c.training.epochs = std::max<std::size_t>(1, std::size_t(std::llround(o.scale * 100.0)));
    c.model.variant = v;
    c.model.z_dim = dim;
    if (models::is_private(v)) c.model.hx_dim = c.model.hy_dim = dim;
    if (o.hidden) c.model.encoder_hidden = c.model.decoder_hidden = *o.hidden;
    if (models::is_adversarial(v)) {
      for (auto l : c.model.latents()) c.model.priors.emplace(l, Prior::standard_gaussian(dim));
    }
    return c;
  };
  using models::Variant;
  std::vector<ExperimentConfig> out;
  if (o.experiment == "5.1a") {
    out = {base("vcca", Variant::kVccaXY, 5), base("acca", Variant::kAcca, 5)};
  } else if (o.experiment == "5.1b") {
    out = {base("vcca", Variant::kVccaXY, 2), base("acca", Variant::kAcca, 2)};
    for (auto& c : out) c.extra_decoder_layers = true;
  } else if (o.experiment == "5.2a") {
    out = {base("vcca_private", Variant::kVccaPrivate, 2), base("acca_private", Variant::kAccaPrivate, 2)};
  } else if (o.experiment == "5.2b") {
    out = {base("vcca_private", Variant::kVccaPrivate, 4), base("acca_private", Variant::kAccaPrivate, 4)};
  } else if (o.experiment == "5.3") {
    auto acca = base("acca_s_manifold", Variant::kAcca, 3);
    acca.model.priors.clear();
    acca.model.priors.emplace(models::Latent::kZ, Prior::s_manifold());
    auto priv = base("acca_private_s_manifold", Variant::kAccaPrivate, 3);
    priv.model.hx_dim = priv.model.hy_dim = 2;
    priv.model.priors.clear();
    priv.model.priors.emplace(models::Latent::kZ, Prior::s_manifold());
    priv.model.priors.emplace(models::Latent::kHx, Prior::standard_gaussian(2));
    priv.model.priors.emplace(models::Latent::kHy, Prior::standard_gaussian(2));
    out = {acca, priv};
  } else {
    throw ConfigError({"unknown experiment '" + o.experiment + "' (expected 5.1a, 5.1b, 5.2a, 5.2b or 5.3)"});
  }
  std::vector<std::string> problems;
  for (const auto& c : out) {
    for (auto& p : c.resolved_model().problems()) problems.push_back(c.name + ": " + p);
  }
  if (!problems.empty()) throw ConfigError(std::move(problems));
  return out;
}

void run_reproduce(const ReproduceOptions& options) {
  for (const auto& c : experiment_configs(options)) {
    std::printf("== %s -> %s\n", c.name.c_str(), c.output_dir.c_str());
    const std::string text = to_yaml(c);
    run_train(parse_config(text), text, c.output_dir);
  }
}

}  // namespace mvrl::app
