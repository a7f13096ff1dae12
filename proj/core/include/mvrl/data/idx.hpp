#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mvrl/tensor.hpp"

namespace mvrl::data {

/// Images flattened row-major, pixels scaled to [0,1].
struct MnistSet {
  Tensor2 images;
  std::vector<int> labels;
  std::size_t image_rows = 28;
  std::size_t image_cols = 28;

  std::size_t size() const { return labels.size(); }
};

/// Parses an IDX3 unsigned-byte image file and an IDX1 label file (big-endian
/// headers). Throws ParseError with the failing byte offset.
MnistSet parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes);

/// Inverse of parse_idx; pixels are quantized to round(255 * p).
std::vector<std::uint8_t> encode_idx_images(const MnistSet& set);
std::vector<std::uint8_t> encode_idx_labels(const MnistSet& set);

/// Looks for train-images-idx3-ubyte / train-labels-idx1-ubyte (or the
/// dotted "train-images.idx3-ubyte" spelling) in `dir`. Throws DataError
/// with a remediation hint when they are missing.
MnistSet load_mnist_dir(const std::filesystem::path& dir);

void write_mnist_dir(const std::filesystem::path& dir, const MnistSet& set);

/// The first min(n, size) examples.
MnistSet head(const MnistSet& set, std::size_t n);

}  // namespace mvrl::data
