#pragma once

#include <cstddef>
#include <cstdint>

#include "mvrl/data/idx.hpp"

namespace mvrl::data {

/// Procedurally rendered handwritten-style digits (28x28, classes 0-9 in
/// rotation so every class is equally represented). Each example gets its own
/// stroke width, slant, aspect, offset and smooth stroke warp, giving a
/// MNIST-shaped stand-in with class plus continuous style factors. Pixels are
/// quantized to bytes so the set survives an IDX round trip unchanged.
MnistSet render_synthetic_digits(std::size_t count, std::uint64_t seed);

}  // namespace mvrl::data
