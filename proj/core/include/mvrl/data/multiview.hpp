#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvrl/data/idx.hpp"
#include "mvrl/tensor.hpp"

namespace mvrl::data {

enum class DatasetVariant { kTangled, kNoisy };

std::string to_string(DatasetVariant v);
std::optional<DatasetVariant> parse_dataset_variant(std::string_view s);

/// Paired views with the known factors of variation. rot_y is NaN for the noisy variant.
struct MultiviewDataset {
  Tensor2 view_x;
  Tensor2 view_y;
  std::vector<int> class_labels;
  std::vector<double> rot_x;
  std::vector<double> rot_y;
  DatasetVariant variant = DatasetVariant::kTangled;
  std::uint64_t seed = 0;
  std::size_t image_rows = 28;
  std::size_t image_cols = 28;

  std::size_t size() const { return class_labels.size(); }
  bool operator==(const MultiviewDataset&) const = default;
};

/// Largest magnitude of a sampled rotation; draws are uniform on the open interval (-kMaxRotation, kMaxRotation).
inline constexpr double kMaxRotation = 0.78539816339744830962;  // pi / 4

/// One pair per source index i: view_x = rotate(img_i, rot_x), view_y =
/// rotate(img_j, rot_y), j != i drawn uniformly from i's class. Each index
/// draws from its own substream of `seed`. Throws DataError when a class has
/// a single example.
MultiviewDataset build_tangled_mnist(const MnistSet& mnist, std::uint64_t seed);

/// As tangled, but view_y = clamp(img_j + u, 0, 1) with per-pixel u ~ U[0,1] and no rotation.
MultiviewDataset build_noisy_mnist(const MnistSet& mnist, std::uint64_t seed);

MultiviewDataset build_dataset(const MnistSet& mnist, DatasetVariant variant, std::uint64_t seed);

MultiviewDataset subset(const MultiviewDataset& ds, std::span<const std::size_t> indices);

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Seeded shuffle of [0, n) split into round(train_fraction * n) / rest. Both sides sorted.
Split split_indices(std::size_t n, double train_fraction, std::uint64_t seed);

// .mvds container (little-endian):
//   "MVDS" | u32 version | u8 variant | u64 seed | u64 count | u32 rows | u32 cols
//   i32[count] class | f64[count] rot_x | f64[count] rot_y
//   f64[count*rows*cols] view_x | f64[count*rows*cols] view_y
std::vector<std::uint8_t> encode_mvds(const MultiviewDataset& ds);
MultiviewDataset decode_mvds(std::span<const std::uint8_t> bytes);

/// Writes `path` plus a JSON sidecar (`path` with extension .json) describing
/// the generation parameters. `provenance` is merged into the sidecar verbatim.
void save_mvds(const std::filesystem::path& path, const MultiviewDataset& ds, const std::string& provenance_json = "{}");
MultiviewDataset load_mvds(const std::filesystem::path& path);

}  // namespace mvrl::data
