#include "mvrl/data/rotate.hpp"

#include <algorithm>
#include <cmath>

#include "mvrl/errors.hpp"

namespace mvrl::data {

std::vector<double> rotate_image(std::span<const double> image, std::size_t rows, std::size_t cols, double angle,
                                 Interpolation interp) {
  if (image.size() != rows * cols) throw DimensionError("rotate_image: image size != rows * cols");
  std::vector<double> out(image.size(), 0.0);
  if (angle == 0.0) {
    std::copy(image.begin(), image.end(), out.begin());
    return out;
  }
  const double cy = (double(rows) - 1.0) / 2.0;
  const double cx = (double(cols) - 1.0) / 2.0;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const auto in_frame = [&](long r, long k) { return r >= 0 && k >= 0 && r < long(rows) && k < long(cols); };
  const auto at = [&](long r, long k) { return in_frame(r, k) ? image[std::size_t(r) * cols + std::size_t(k)] : 0.0; };

  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t k = 0; k < cols; ++k) {
      // Output offset in a y-up frame, mapped back through the inverse rotation.
      const double dx = double(k) - cx;
      const double dy = cy - double(r);
      const double sx = c * dx + s * dy;
      const double sy = -s * dx + c * dy;
      const double src_col = cx + sx;
      const double src_row = cy - sy;

      double v = 0.0;
      if (interp == Interpolation::kNearest) {
        v = at(std::lround(src_row), std::lround(src_col));
      } else {
        const double r0 = std::floor(src_row);
        const double k0 = std::floor(src_col);
        const double fr = src_row - r0;
        const double fk = src_col - k0;
        const long ir = long(r0);
        const long ik = long(k0);
        v = (1 - fr) * (1 - fk) * at(ir, ik) + (1 - fr) * fk * at(ir, ik + 1) + fr * (1 - fk) * at(ir + 1, ik) +
            fr * fk * at(ir + 1, ik + 1);
      }
      out[r * cols + k] = std::clamp(v, 0.0, 1.0);
    }
  }
  return out;
}

}  // namespace mvrl::data
