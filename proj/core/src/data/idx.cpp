#include "mvrl/data/idx.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvrl/binary_io.hpp"
#include "mvrl/errors.hpp"

namespace mvrl::data {
namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t at, const char* what) {
  if (bytes.size() < at + 4) throw ParseError(std::string("truncated header (") + what + ")", at);
  return (std::uint32_t(bytes[at]) << 24) | (std::uint32_t(bytes[at + 1]) << 16) |
         (std::uint32_t(bytes[at + 2]) << 8) | std::uint32_t(bytes[at + 3]);
}

void put_be32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(std::uint8_t(v >> 24));
  out.push_back(std::uint8_t(v >> 16));
  out.push_back(std::uint8_t(v >> 8));
  out.push_back(std::uint8_t(v));
}

std::filesystem::path first_existing(const std::filesystem::path& dir, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    if (std::filesystem::exists(dir / n)) return dir / n;
  }
  return {};
}

}  // namespace

MnistSet parse_idx(std::span<const std::uint8_t> image_bytes, std::span<const std::uint8_t> label_bytes) {
  if (read_be32(image_bytes, 0, "image magic") != kImageMagic) {
    throw ParseError("bad image magic (expected 0x00000803)", 0);
  }
  const std::uint32_t count = read_be32(image_bytes, 4, "image count");
  const std::uint32_t rows = read_be32(image_bytes, 8, "image rows");
  const std::uint32_t cols = read_be32(image_bytes, 12, "image cols");
  if (rows == 0 || cols == 0) throw ParseError("zero image dimension", 8);

  if (read_be32(label_bytes, 0, "label magic") != kLabelMagic) {
    throw ParseError("bad label magic (expected 0x00000801)", 0);
  }
  const std::uint32_t label_count = read_be32(label_bytes, 4, "label count");
  if (label_count != count) {
    throw ParseError("image/label count mismatch: " + std::to_string(count) + " images vs " +
                         std::to_string(label_count) + " labels",
                     4);
  }

  const std::size_t pixels = std::size_t(rows) * cols;
  const std::size_t image_payload = std::size_t(count) * pixels;
  if (image_bytes.size() - 16 < image_payload) {
    throw ParseError("truncated image payload: need " + std::to_string(image_payload) + " bytes, have " +
                         std::to_string(image_bytes.size() - 16),
                     image_bytes.size());
  }
  if (label_bytes.size() - 8 < count) {
    throw ParseError("truncated label payload: need " + std::to_string(count) + " bytes, have " +
                         std::to_string(label_bytes.size() - 8),
                     label_bytes.size());
  }
  if (image_bytes.size() - 16 > image_payload) throw ParseError("trailing bytes after image payload", 16 + image_payload);
  if (label_bytes.size() - 8 > count) throw ParseError("trailing bytes after label payload", 8 + std::size_t(count));

  MnistSet set;
  set.image_rows = rows;
  set.image_cols = cols;
  std::vector<double> data(image_payload);
  for (std::size_t i = 0; i < image_payload; ++i) data[i] = double(image_bytes[16 + i]) / 255.0;
  set.images = Tensor2(count, pixels, std::move(data));
  set.labels.resize(count);
  for (std::size_t i = 0; i < count; ++i) set.labels[i] = label_bytes[8 + i];
  return set;
}

std::vector<std::uint8_t> encode_idx_images(const MnistSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + set.images.size());
  put_be32(out, kImageMagic);
  put_be32(out, std::uint32_t(set.size()));
  put_be32(out, std::uint32_t(set.image_rows));
  put_be32(out, std::uint32_t(set.image_cols));
  for (double p : set.images.data()) out.push_back(std::uint8_t(std::lround(std::clamp(p, 0.0, 1.0) * 255.0)));
  return out;
}

std::vector<std::uint8_t> encode_idx_labels(const MnistSet& set) {
  std::vector<std::uint8_t> out;
  out.reserve(8 + set.size());
  put_be32(out, kLabelMagic);
  put_be32(out, std::uint32_t(set.size()));
  for (int l : set.labels) out.push_back(std::uint8_t(l));
  return out;
}

MnistSet load_mnist_dir(const std::filesystem::path& dir) {
  const auto images = first_existing(dir, {"train-images-idx3-ubyte", "train-images.idx3-ubyte"});
  const auto labels = first_existing(dir, {"train-labels-idx1-ubyte", "train-labels.idx1-ubyte"});
  if (images.empty() || labels.empty()) {
    throw DataError("MNIST training files not found in '" + dir.string() +
                    "'. Expected train-images-idx3-ubyte and train-labels-idx1-ubyte (uncompressed). "
                    "Download and gunzip them there, point --mnist-dir or MVRL_MNIST_DIR at their directory, "
                    "or write a stand-in set with `mvrl synth-digits --out DIR`.");
  }
  return parse_idx(read_file_bytes(images), read_file_bytes(labels));
}

void write_mnist_dir(const std::filesystem::path& dir, const MnistSet& set) {
  write_file_bytes(dir / "train-images-idx3-ubyte", encode_idx_images(set));
  write_file_bytes(dir / "train-labels-idx1-ubyte", encode_idx_labels(set));
}

MnistSet head(const MnistSet& set, std::size_t n) {
  n = std::min(n, set.size());
  MnistSet out;
  out.image_rows = set.image_rows;
  out.image_cols = set.image_cols;
  std::vector<double> data(set.images.values().begin(),
                           set.images.values().begin() + std::ptrdiff_t(n * set.images.cols()));
  out.images = Tensor2(n, set.images.cols(), std::move(data));
  out.labels.assign(set.labels.begin(), set.labels.begin() + std::ptrdiff_t(n));
  return out;
}

}  // namespace mvrl::data
