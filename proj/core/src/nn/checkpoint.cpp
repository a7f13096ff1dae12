#include "mvrl/nn/checkpoint.hpp"

#include "mvrl/binary_io.hpp"

namespace mvrl::nn {
namespace {

constexpr std::string_view kMagic = "MVRL";
// Guards against allocating absurd sizes from corrupt headers.
constexpr std::uint64_t kMaxElements = std::uint64_t(1) << 32;

void write_block(ByteWriter& w, std::uint64_t rows, std::uint64_t cols, std::span<const double> data) {
  w.u64(rows);
  w.u64(cols);
  w.f64s(data);
}

std::vector<double> read_block(ByteReader& r, std::uint64_t& rows, std::uint64_t& cols) {
  const std::size_t at = r.offset();
  rows = r.u64("block rows");
  cols = r.u64("block cols");
  if (rows != 0 && cols > kMaxElements / rows) throw ParseError("implausible block shape", at);
  if (rows * cols * 8 > r.remaining()) throw ParseError("truncated block data", r.offset());
  std::vector<double> data(rows * cols);
  r.f64s(data, "block data");
  return data;
}

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(std::span<const NamedParams> networks) {
  ByteWriter w;
  w.bytes(kMagic);
  w.u32(kCheckpointVersion);
  w.u32(std::uint32_t(networks.size()));
  for (const auto& net : networks) {
    w.u32(std::uint32_t(net.name.size()));
    w.bytes(net.name);
    w.u64(net.params.weights.size());
    for (std::size_t i = 0; i < net.params.weights.size(); ++i) {
      const auto& wt = net.params.weights[i];
      write_block(w, wt.rows(), wt.cols(), wt.data());
      write_block(w, 1, net.params.biases[i].size(), net.params.biases[i]);
    }
  }
  return w.take();
}

std::vector<NamedParams> decode_checkpoint(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  if (r.bytes(4, "checkpoint header") != kMagic) throw ParseError("bad checkpoint magic (expected MVRL)", 0);
  const std::size_t version_at = r.offset();
  const std::uint32_t version = r.u32("checkpoint version");
  if (version != kCheckpointVersion) {
    throw ParseError("unsupported checkpoint version " + std::to_string(version), version_at);
  }
  const std::uint32_t count = r.u32("network count");
  std::vector<NamedParams> out;
  for (std::uint32_t n = 0; n < count; ++n) {
    NamedParams net;
    const std::uint32_t name_len = r.u32("network name length");
    net.name = r.bytes(name_len, "network name");
    const std::size_t layers_at = r.offset();
    const std::uint64_t layers = r.u64("layer count");
    if (layers > 4096) throw ParseError("implausible layer count", layers_at);
    for (std::uint64_t l = 0; l < layers; ++l) {
      std::uint64_t rows = 0, cols = 0;
      auto w = read_block(r, rows, cols);
      net.params.weights.emplace_back(rows, cols, std::move(w));
      const std::size_t bias_at = r.offset();
      std::uint64_t brows = 0, bcols = 0;
      auto b = read_block(r, brows, bcols);
      if (brows != 1 || bcols != cols) throw ParseError("bias block does not match layer width", bias_at);
      net.params.biases.push_back(std::move(b));
    }
    out.push_back(std::move(net));
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after checkpoint", r.offset());
  return out;
}

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedParams> networks) {
  write_file_bytes(path, encode_checkpoint(networks));
}

std::vector<NamedParams> load_checkpoint(const std::filesystem::path& path) {
  return decode_checkpoint(read_file_bytes(path));
}

}  // namespace mvrl::nn
