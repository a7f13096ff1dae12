#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace mvrl::report {

struct Color {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  bool operator==(const Color&) const = default;
};

inline constexpr Color kWhite{255, 255, 255};
inline constexpr Color kBlack{0, 0, 0};
inline constexpr Color kGray{160, 160, 160};
inline constexpr Color kLightGray{225, 225, 225};

/// Ten distinguishable colors for class labels.
Color categorical(int index);
/// Blue (t = -1) through white (0) to red (t = +1); t is clamped.
Color diverging(double t);
/// Dark purple (t = 0) through teal to yellow (t = 1); t is clamped.
Color sequential(double t);
Color gray(double v);  // v in [0, 1], clamped

/// 8-bit RGB raster, row-major from the top-left.
class Canvas {
 public:
  Canvas(std::size_t width, std::size_t height, Color background = kWhite);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  Color at(std::size_t x, std::size_t y) const;
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  void set(long x, long y, Color c);  // ignores out-of-range pixels
  void fill_rect(long x0, long y0, long x1, long y1, Color c);  // inclusive corners
  void rect_outline(long x0, long y0, long x1, long y1, Color c);
  void line(long x0, long y0, long x1, long y1, Color c);
  void dashed_hline(long x0, long x1, long y, Color c, long dash = 6);
  void dot(long x, long y, long radius, Color c);
  /// Copies another canvas with its top-left at (x, y).
  void blit(const Canvas& src, long x, long y);

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> pixels_;
};

/// Grayscale image from intensities in [0, 1], scaled up by `scale`.
Canvas grayscale_image(std::span<const double> values, std::size_t rows, std::size_t cols, std::size_t scale = 1);

/// Encodes as PNG. Creates the parent directory.
void write_png(const std::filesystem::path& path, const Canvas& canvas);
std::vector<std::uint8_t> encode_png(const Canvas& canvas);

/// True when the bytes start with the PNG signature and an IHDR chunk.
bool looks_like_png(std::span<const std::uint8_t> bytes);

}  // namespace mvrl::report
