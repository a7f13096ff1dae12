#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mvrl/data/multiview.hpp"
#include "mvrl/errors.hpp"
#include "mvrl/models/model.hpp"
#include "mvrl/tensor.hpp"

namespace mvrl::eval {

/// The probe target carries no signal to fit (one class, constant values).
class DegenerateProbeError : public DataError {
 public:
  using DataError::DataError;
};

/// Fraction of the data used to fit a probe; the rest is scored.
inline constexpr double kProbeTrainFraction = 0.8;

struct SvmConfig {
  std::size_t epochs = 50;
  double step = 0.01;
  double l2 = 1e-4;
};

/// One-vs-rest linear hinge-loss classifier trained by stochastic subgradient
/// descent on standardized features. Returns held-out accuracy.
double probe_classify(const Tensor2& embeddings, std::span<const int> labels, std::uint64_t split_seed,
                      const SvmConfig& config = {});

/// Ordinary least squares with intercept; held-out R^2 = 1 - SS_res / SS_tot.
double probe_regress(const Tensor2& embeddings, std::span<const double> targets, std::uint64_t split_seed);

enum class Factor { kClass, kRotX, kRotY };
inline constexpr std::array<Factor, 3> kAllFactors{Factor::kClass, Factor::kRotX, Factor::kRotY};
std::string to_string(Factor f);

struct EmbeddingSet {
  std::map<models::Latent, Tensor2> reps;
  std::vector<int> classes;
  std::vector<double> rot_x;
  std::vector<double> rot_y;  // NaN for the noisy dataset

  std::size_t size() const { return classes.size(); }
  /// Throws DimensionError when a representation's rows disagree with the annotations.
  void validate() const;
};

/// Encodes every pair. Variational models contribute posterior means.
EmbeddingSet embed(const models::ModelState& state, const models::ModelSpec& spec,
                   const data::MultiviewDataset& dataset, std::size_t batch_size = 500);

/// Probe score per (representation, factor): accuracy for class, R^2 for rotations.
/// Factors with no annotation (rot_y on the noisy dataset) are omitted.
struct InfoMatrix {
  std::map<std::pair<models::Latent, Factor>, double> entries;

  std::optional<double> at(models::Latent l, Factor f) const;
};

InfoMatrix info_matrix(const EmbeddingSet& embs, std::uint64_t split_seed);

}  // namespace mvrl::eval
