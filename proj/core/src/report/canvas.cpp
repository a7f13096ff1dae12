#include "mvrl/report/canvas.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "mvrl/binary_io.hpp"

namespace mvrl::report {
namespace {

Color lerp(Color a, Color b, double t) {
  auto mix = [&](std::uint8_t x, std::uint8_t y) { return std::uint8_t(std::lround(x + (double(y) - x) * t)); };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

Color ramp(std::span<const Color> stops, double t) {
  t = std::clamp(t, 0.0, 1.0) * double(stops.size() - 1);
  const auto i = std::min(std::size_t(t), stops.size() - 2);
  return lerp(stops[i], stops[i + 1], t - double(i));
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_noop(png_structp) {}

}  // namespace

Color categorical(int index) {
  static constexpr std::array<Color, 10> kPalette{{{31, 119, 180},
                                                   {255, 127, 14},
                                                   {44, 160, 44},
                                                   {214, 39, 40},
                                                   {148, 103, 189},
                                                   {140, 86, 75},
                                                   {227, 119, 194},
                                                   {127, 127, 127},
                                                   {188, 189, 34},
                                                   {23, 190, 207}}};
  return kPalette[std::size_t(((index % 10) + 10) % 10)];
}

Color diverging(double t) {
  static constexpr std::array<Color, 3> kStops{{{33, 102, 172}, {247, 247, 247}, {178, 24, 43}}};
  return ramp(kStops, 0.5 * (std::clamp(t, -1.0, 1.0) + 1.0));
}

Color sequential(double t) {
  static constexpr std::array<Color, 5> kStops{{{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  return ramp(kStops, t);
}

Color gray(double v) {
  const auto g = std::uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  return {g, g, g};
}

Canvas::Canvas(std::size_t width, std::size_t height, Color background)
    : width_(width), height_(height), pixels_(width * height * 3) {
  if (width == 0 || height == 0) throw std::invalid_argument("canvas dimensions must be positive");
  fill_rect(0, 0, long(width) - 1, long(height) - 1, background);
}

Color Canvas::at(std::size_t x, std::size_t y) const {
  const std::size_t o = (y * width_ + x) * 3;
  return {pixels_[o], pixels_[o + 1], pixels_[o + 2]};
}

void Canvas::set(long x, long y, Color c) {
  if (x < 0 || y < 0 || x >= long(width_) || y >= long(height_)) return;
  const std::size_t o = (std::size_t(y) * width_ + std::size_t(x)) * 3;
  pixels_[o] = c.r;
  pixels_[o + 1] = c.g;
  pixels_[o + 2] = c.b;
}

void Canvas::fill_rect(long x0, long y0, long x1, long y1, Color c) {
  x0 = std::max(x0, 0L);
  y0 = std::max(y0, 0L);
  x1 = std::min(x1, long(width_) - 1);
  y1 = std::min(y1, long(height_) - 1);
  for (long y = y0; y <= y1; ++y) {
    for (long x = x0; x <= x1; ++x) set(x, y, c);
  }
}

void Canvas::rect_outline(long x0, long y0, long x1, long y1, Color c) {
  line(x0, y0, x1, y0, c);
  line(x1, y0, x1, y1, c);
  line(x1, y1, x0, y1, c);
  line(x0, y1, x0, y0, c);
}

void Canvas::line(long x0, long y0, long x1, long y1, Color c) {
  const long dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
  const long dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
  long err = dx + dy;
  while (true) {
    set(x0, y0, c);
    if (x0 == x1 && y0 == y1) break;
    const long e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
}

void Canvas::dashed_hline(long x0, long x1, long y, Color c, long dash) {
  for (long x = std::min(x0, x1); x <= std::max(x0, x1); ++x) {
    if (((x - x0) / dash) % 2 == 0) set(x, y, c);
  }
}

void Canvas::dot(long x, long y, long radius, Color c) {
  for (long dy = -radius; dy <= radius; ++dy) {
    for (long dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius + radius) set(x + dx, y + dy, c);
    }
  }
}

void Canvas::blit(const Canvas& src, long x, long y) {
  for (std::size_t r = 0; r < src.height(); ++r) {
    for (std::size_t c = 0; c < src.width(); ++c) set(x + long(c), y + long(r), src.at(c, r));
  }
}

Canvas grayscale_image(std::span<const double> values, std::size_t rows, std::size_t cols, std::size_t scale) {
  if (values.size() != rows * cols) throw std::invalid_argument("grayscale_image: size mismatch");
  Canvas out(cols * scale, rows * scale);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.fill_rect(long(c * scale), long(r * scale), long((c + 1) * scale) - 1, long((r + 1) * scale) - 1,
                    gray(values[r * cols + c]));
    }
  }
  return out;
}

std::vector<std::uint8_t> encode_png(const Canvas& canvas) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw std::runtime_error("png: cannot create write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw std::runtime_error("png: cannot create info struct");
  }
  std::vector<std::uint8_t> out;
  std::vector<png_bytep> rows(canvas.height());
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("png: encoding failed");
  }
  png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
  png_set_IHDR(png, info, png_uint_32(canvas.width()), png_uint_32(canvas.height()), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  auto* base = const_cast<std::uint8_t*>(canvas.pixels().data());
  for (std::size_t r = 0; r < canvas.height(); ++r) rows[r] = base + r * canvas.width() * 3;
  png_set_rows(png, info, rows.data());
  png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void write_png(const std::filesystem::path& path, const Canvas& canvas) { write_file_bytes(path, encode_png(canvas)); }

bool looks_like_png(std::span<const std::uint8_t> bytes) {
  static constexpr std::uint8_t kSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  return bytes.size() >= 16 && std::memcmp(bytes.data(), kSig, 8) == 0 && std::memcmp(bytes.data() + 12, "IHDR", 4) == 0;
}

}  // namespace mvrl::report
