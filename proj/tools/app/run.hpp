#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "config.hpp"

namespace mvrl::app {

/// Exit statuses of the command-line tool.
enum ExitCode : int { kOk = 0, kConfigFailure = 2, kDataFailure = 3, kNumericFailure = 4 };

/// Git blob id: sha1("blob <size>\0" + content) as lowercase hex.
std::string git_blob_hash(std::span<const std::uint8_t> content);

/// MVRL_MNIST_DIR when set, otherwise the configured directory.
std::filesystem::path mnist_dir_for(const DatasetConfig& config);

/// Writes synthetic IDX training files (see render_synthetic_digits).
void synth_digits(const std::filesystem::path& out_dir, std::size_t count, std::uint64_t seed);

/// Loads MNIST and builds the configured paired dataset.
data::MultiviewDataset build_configured_dataset(const DatasetConfig& config, std::string* input_hashes_json = nullptr);

/// Trains one experiment into `run_dir`, then evaluates and renders figures when enabled.
void run_train(const ExperimentConfig& config, const std::string& config_text, const std::filesystem::path& run_dir);

/// Probe matrix, posterior fit statistics and reconstruction error from a run directory.
void run_evaluate(const std::filesystem::path& run_dir);

/// Renders every figure (with CSV twins) from a run directory into <run_dir>/figures.
void run_report(const std::filesystem::path& run_dir);

struct ReproduceOptions {
  std::string experiment;  // 5.1a, 5.1b, 5.2a, 5.2b, 5.3
  double scale = 1.0;
  std::filesystem::path out_root = "runs";
  std::optional<std::string> mnist_dir;
  std::optional<std::vector<std::size_t>> hidden;  // overrides the 1024 x 4 encoder/decoder widths
  std::uint64_t seed = 0;
};

/// Configs of one named experiment at the given scale.
std::vector<ExperimentConfig> experiment_configs(const ReproduceOptions& options);
void run_reproduce(const ReproduceOptions& options);

}  // namespace mvrl::app
