#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvrl::data {

enum class Interpolation { kBilinear, kNearest };

/// Rotates a row-major image counter-clockwise (as displayed) by `angle`
/// radians about its center ((rows-1)/2, (cols-1)/2). Samples that fall
/// outside the frame read as 0. Output is clamped to [0,1].
std::vector<double> rotate_image(std::span<const double> image, std::size_t rows, std::size_t cols, double angle,
                                 Interpolation interp = Interpolation::kBilinear);

}  // namespace mvrl::data
