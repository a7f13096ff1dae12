#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mvrl/data/multiview.hpp"
#include "mvrl/models/model.hpp"
#include "mvrl/train/trainer.hpp"

namespace mvrl::app {

struct DatasetConfig {
  data::DatasetVariant variant = data::DatasetVariant::kTangled;
  std::uint64_t seed = 0;
  std::string mnist_dir = "data/mnist";  // MVRL_MNIST_DIR overrides
  std::size_t size = 10000;              // pairs used; 0 keeps every MNIST example
};

struct EvaluationConfig {
  bool info_curves = true;
  std::size_t info_every = 1;
  std::size_t samples = 2000;  // pairs kept in the run directory for probes and figures
  bool figures = true;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::uint64_t seed = 0;
  std::string output_dir = "runs/experiment";
  DatasetConfig dataset;
  models::ModelSpec model;
  bool extra_decoder_layers = false;  // two more ReLU layers in both decoders
  train::TrainConfig training;
  EvaluationConfig evaluation;

  /// The model with extra decoder layers applied.
  models::ModelSpec resolved_model() const;
  std::uint64_t init_seed() const;
};

/// Parses and validates a YAML experiment config. Throws ConfigError listing
/// every problem found (syntax, unknown keys, types, cross-field consistency).
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::string& path);

/// Canonical YAML for a config; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const ExperimentConfig& config);
nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace mvrl::app
