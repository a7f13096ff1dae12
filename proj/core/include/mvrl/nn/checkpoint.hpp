#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mvrl/nn/mlp.hpp"

namespace mvrl::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct NamedParams {
  std::string name;
  MlpParams params;
};

// Layout (all little-endian):
//   "MVRL" | u32 version | u32 network count
//   per network: u32 name length | UTF-8 name | u64 layer count
//     per layer: u64 rows | u64 cols | f64[rows*cols] weights
//                u64 1    | u64 cols | f64[cols] bias
std::vector<std::uint8_t> encode_checkpoint(std::span<const NamedParams> networks);
std::vector<NamedParams> decode_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const std::filesystem::path& path, std::span<const NamedParams> networks);
std::vector<NamedParams> load_checkpoint(const std::filesystem::path& path);

}  // namespace mvrl::nn
