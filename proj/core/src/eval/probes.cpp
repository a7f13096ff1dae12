#include "mvrl/eval/probes.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

namespace mvrl::eval {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_rows(const Tensor2& emb, std::size_t n, const char* op) {
  if (emb.rows() != n) {
    throw DimensionError(std::string(op) + ": " + std::to_string(emb.rows()) + " embedding rows but " +
                         std::to_string(n) + " targets");
  }
  if (emb.cols() == 0) throw DimensionError(std::string(op) + ": embeddings have no columns");
}

// Feature means and standard deviations from the rows in `fit`.
std::pair<std::vector<double>, std::vector<double>> moments(const Tensor2& emb, std::span<const std::size_t> fit) {
  const std::size_t d = emb.cols();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t i : fit) {
    for (std::size_t c = 0; c < d; ++c) mean[c] += emb(i, c);
  }
  for (double& m : mean) m /= double(fit.size());
  for (std::size_t i : fit) {
    for (std::size_t c = 0; c < d; ++c) sd[c] += (emb(i, c) - mean[c]) * (emb(i, c) - mean[c]);
  }
  for (double& s : sd) {
    s = std::sqrt(s / double(fit.size()));
    if (!(s > 1e-12)) s = 1.0;
  }
  return {mean, sd};
}

}  // namespace

double probe_classify(const Tensor2& embeddings, std::span<const int> labels, std::uint64_t split_seed,
                      const SvmConfig& config) {
  check_rows(embeddings, labels.size(), "probe_classify");
  std::vector<int> classes(labels.begin(), labels.end());
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  if (classes.size() < 2) throw DegenerateProbeError("probe_classify: labels contain a single class");

  const auto split = data::split_indices(labels.size(), kProbeTrainFraction, split_seed);
  if (split.train.empty() || split.validation.empty()) throw DegenerateProbeError("probe_classify: too few rows to split");
  const auto [mean, sd] = moments(embeddings, split.train);
  const std::size_t d = embeddings.cols();
  const std::size_t k = classes.size();
  auto feature = [&](std::size_t i, std::vector<double>& out) {
    for (std::size_t c = 0; c < d; ++c) out[c] = (embeddings(i, c) - mean[c]) / sd[c];
  };
  auto class_index = [&](int label) {
    return std::size_t(std::lower_bound(classes.begin(), classes.end(), label) - classes.begin());
  };

  std::vector<double> w(k * d, 0.0), b(k, 0.0), x(d);
  std::vector<std::size_t> order = split.train;
  Rng rng = make_rng(split_seed, 0x53564d);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t i : order) {
      feature(i, x);
      const std::size_t truth = class_index(labels[i]);
      for (std::size_t c = 0; c < k; ++c) {
        double* wc = w.data() + c * d;
        const double y = c == truth ? 1.0 : -1.0;
        double score = b[c];
        for (std::size_t j = 0; j < d; ++j) score += wc[j] * x[j];
        const bool active = y * score < 1.0;
        for (std::size_t j = 0; j < d; ++j) wc[j] -= config.step * (config.l2 * wc[j] - (active ? y * x[j] : 0.0));
        if (active) b[c] += config.step * y;
      }
    }
  }

  std::size_t correct = 0;
  for (std::size_t i : split.validation) {
    feature(i, x);
    std::size_t best = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double score = b[c];
      for (std::size_t j = 0; j < d; ++j) score += w[c * d + j] * x[j];
      if (score > best_score) {
        best_score = score;
        best = c;
      }
    }
    correct += classes[best] == labels[i];
  }
  return double(correct) / double(split.validation.size());
}

double probe_regress(const Tensor2& embeddings, std::span<const double> targets, std::uint64_t split_seed) {
  check_rows(embeddings, targets.size(), "probe_regress");
  const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
  if (targets.empty() || *lo == *hi) throw DegenerateProbeError("probe_regress: targets are constant");
  for (double t : targets) {
    if (!std::isfinite(t)) throw DataError("probe_regress: targets contain non-finite values");
  }

  const auto split = data::split_indices(targets.size(), kProbeTrainFraction, split_seed);
  const std::size_t d = embeddings.cols();
  auto design = [&](std::span<const std::size_t> rows) {
    RowMatrix a(Eigen::Index(rows.size()), Eigen::Index(d + 1));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      a(Eigen::Index(r), 0) = 1.0;
      for (std::size_t c = 0; c < d; ++c) a(Eigen::Index(r), Eigen::Index(c + 1)) = embeddings(rows[r], c);
    }
    return a;
  };
  auto target = [&](std::span<const std::size_t> rows) {
    Eigen::VectorXd t(Eigen::Index(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) t(Eigen::Index(r)) = targets[rows[r]];
    return t;
  };
  const Eigen::VectorXd beta = design(split.train).colPivHouseholderQr().solve(target(split.train));
  const Eigen::VectorXd truth = target(split.validation);
  const Eigen::VectorXd pred = design(split.validation) * beta;
  const double ss_res = (truth - pred).squaredNorm();
  const double ss_tot = (truth.array() - truth.mean()).square().sum();
  if (!(ss_tot > 0.0)) throw DegenerateProbeError("probe_regress: held-out targets are constant");
  return 1.0 - ss_res / ss_tot;
}

std::string to_string(Factor f) {
  switch (f) {
    case Factor::kClass: return "class";
    case Factor::kRotX: return "rot_x";
    case Factor::kRotY: return "rot_y";
  }
  return "?";
}

void EmbeddingSet::validate() const {
  const std::size_t n = classes.size();
  if (rot_x.size() != n || rot_y.size() != n) throw DimensionError("embedding annotations differ in length");
  for (const auto& [l, t] : reps) {
    if (t.rows() != n) {
      throw DimensionError("representation " + models::to_string(l) + " has " + std::to_string(t.rows()) +
                           " rows, annotations have " + std::to_string(n));
    }
  }
}

EmbeddingSet embed(const models::ModelState& state, const models::ModelSpec& spec,
                   const data::MultiviewDataset& dataset, std::size_t batch_size) {
  EmbeddingSet out;
  out.classes = dataset.class_labels;
  out.rot_x = dataset.rot_x;
  out.rot_y = dataset.rot_y;
  const std::size_t n = dataset.size();
  std::map<models::Latent, std::vector<double>> buffers;
  std::vector<std::size_t> idx;
  Rng unused(0);
  for (std::size_t start = 0; start < n; start += batch_size) {
    const std::size_t end = std::min(n, start + batch_size);
    idx.resize(end - start);
    std::iota(idx.begin(), idx.end(), start);
    const models::Batch batch{select_rows(dataset.view_x, idx), select_rows(dataset.view_y, idx)};
    const auto enc = models::encode(state, spec, batch, unused, models::EncodeMode::kMean);
    for (models::Latent l : spec.latents()) {
      const auto z = enc.at(l).z.data();
      auto& buf = buffers[l];
      buf.insert(buf.end(), z.begin(), z.end());
    }
  }
  for (auto& [l, buf] : buffers) out.reps.emplace(l, Tensor2(n, spec.latent_dim(l), std::move(buf)));
  return out;
}

std::optional<double> InfoMatrix::at(models::Latent l, Factor f) const {
  auto it = entries.find({l, f});
  if (it == entries.end()) return std::nullopt;
  return it->second;
}

InfoMatrix info_matrix(const EmbeddingSet& embs, std::uint64_t split_seed) {
  embs.validate();
  InfoMatrix m;
  const bool has_rot_y = std::all_of(embs.rot_y.begin(), embs.rot_y.end(), [](double v) { return std::isfinite(v); });
  for (const auto& [l, rep] : embs.reps) {
    m.entries[{l, Factor::kClass}] = probe_classify(rep, embs.classes, split_seed);
    m.entries[{l, Factor::kRotX}] = probe_regress(rep, embs.rot_x, split_seed);
    if (has_rot_y) m.entries[{l, Factor::kRotY}] = probe_regress(rep, embs.rot_y, split_seed);
  }
  return m;
}

}  // namespace mvrl::eval
