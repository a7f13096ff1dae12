#include "mvrl/data/synthetic_digits.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mvrl/rng.hpp"

namespace mvrl::data {
namespace {

struct Pt {
  double x;
  double y;
};
using Stroke = std::vector<Pt>;
using Glyph = std::vector<Stroke>;

// Elliptical arc in the glyph box (x right, y down); angles in degrees, measured
// counter-clockwise as displayed.
Stroke arc(double cx, double cy, double rx, double ry, double from, double to, int segments = 24) {
  Stroke s;
  for (int i = 0; i <= segments; ++i) {
    const double a = (from + (to - from) * i / segments) * std::numbers::pi / 180.0;
    s.push_back({cx + rx * std::cos(a), cy - ry * std::sin(a)});
  }
  return s;
}

Stroke line(std::initializer_list<Pt> pts) { return Stroke(pts); }

Stroke concat(Stroke a, const Stroke& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

const std::array<Glyph, 10>& glyphs() {
  static const std::array<Glyph, 10> g = [] {
    std::array<Glyph, 10> out;
    out[0] = {arc(0.5, 0.5, 0.36, 0.48, 0, 360, 40)};
    out[1] = {line({{0.30, 0.22}, {0.55, 0.02}, {0.55, 0.98}})};
    out[2] = {concat(arc(0.5, 0.30, 0.36, 0.28, 160, -35), line({{0.10, 0.98}, {0.92, 0.98}}))};
    out[3] = {concat(arc(0.48, 0.26, 0.33, 0.24, 155, -90), arc(0.48, 0.74, 0.38, 0.24, 90, -160))};
    out[4] = {line({{0.62, 0.02}, {0.06, 0.66}, {0.95, 0.66}}), line({{0.70, 0.30}, {0.70, 0.98}})};
    out[5] = {concat(line({{0.88, 0.02}, {0.24, 0.02}, {0.18, 0.44}}), arc(0.48, 0.68, 0.38, 0.30, 145, -155))};
    out[6] = {concat(line({{0.78, 0.02}, {0.48, 0.14}, {0.26, 0.38}}), arc(0.50, 0.72, 0.34, 0.26, 160, -200, 36))};
    out[7] = {line({{0.06, 0.02}, {0.94, 0.02}, {0.42, 0.98}})};
    out[8] = {arc(0.5, 0.26, 0.29, 0.24, 0, 360, 32), arc(0.5, 0.74, 0.36, 0.25, 0, 360, 32)};
    out[9] = {arc(0.5, 0.30, 0.34, 0.27, 0, 360, 32), line({{0.84, 0.32}, {0.74, 0.98}})};
    return out;
  }();
  return g;
}

double segment_distance(Pt p, Pt a, Pt b) {
  const double vx = b.x - a.x, vy = b.y - a.y;
  const double wx = p.x - a.x, wy = p.y - a.y;
  const double len2 = vx * vx + vy * vy;
  const double t = len2 > 0 ? std::clamp((wx * vx + wy * vy) / len2, 0.0, 1.0) : 0.0;
  const double dx = wx - t * vx, dy = wy - t * vy;
  return std::sqrt(dx * dx + dy * dy);
}

struct Style {
  double width;       // glyph box width in pixels
  double height;      // glyph box height in pixels
  double slant;       // horizontal shear per unit height
  double radius;      // stroke half-width in pixels
  double off_x, off_y;
  double warp_amp, warp_freq, warp_phase_x, warp_phase_y;
  double ink;
};

Style draw_style(Rng& rng) {
  auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
  Style s;
  s.height = u(17.0, 21.0);
  s.width = s.height * u(0.55, 0.85);
  s.slant = u(-0.30, 0.30);
  s.radius = u(0.9, 2.0);
  s.off_x = u(-1.5, 1.5);
  s.off_y = u(-1.2, 1.2);
  s.warp_amp = u(0.0, 0.06);
  s.warp_freq = u(0.6, 1.6);
  s.warp_phase_x = u(0.0, 2 * std::numbers::pi);
  s.warp_phase_y = u(0.0, 2 * std::numbers::pi);
  s.ink = u(0.85, 1.0);
  return s;
}

// Glyph-box point -> pixel coordinates (col, row) under the sample's style.
Pt place(Pt p, const Style& s) {
  const double wx = p.x + s.warp_amp * std::sin(2 * std::numbers::pi * s.warp_freq * p.y + s.warp_phase_x);
  const double wy = p.y + s.warp_amp * std::sin(2 * std::numbers::pi * s.warp_freq * p.x + s.warp_phase_y);
  const double cx = 13.5 + s.off_x, cy = 13.5 + s.off_y;
  const double y = cy + (wy - 0.5) * s.height;
  const double x = cx + (wx - 0.5) * s.width - s.slant * (wy - 0.5) * s.height;
  return {x, y};
}

}  // namespace

MnistSet render_synthetic_digits(std::size_t count, std::uint64_t seed) {
  constexpr std::size_t kSide = 28;
  MnistSet set;
  set.image_rows = kSide;
  set.image_cols = kSide;
  set.images = Tensor2(count, kSide * kSide);
  set.labels.resize(count);

  for (std::size_t i = 0; i < count; ++i) {
    Rng rng = make_rng(seed, i);
    const int label = int(i % 10);
    set.labels[i] = label;
    const Style style = draw_style(rng);

    std::vector<std::pair<Pt, Pt>> segments;
    for (const auto& stroke : glyphs()[std::size_t(label)]) {
      for (std::size_t k = 0; k + 1 < stroke.size(); ++k) {
        segments.emplace_back(place(stroke[k], style), place(stroke[k + 1], style));
      }
    }

    auto img = set.images.row(i);
    for (std::size_t r = 0; r < kSide; ++r) {
      for (std::size_t c = 0; c < kSide; ++c) {
        const Pt p{double(c), double(r)};
        double d = 1e9;
        for (const auto& [a, b] : segments) d = std::min(d, segment_distance(p, a, b));
        const double v = style.ink * std::clamp(style.radius + 0.5 - d, 0.0, 1.0);
        img[r * kSide + c] = std::round(v * 255.0) / 255.0;
      }
    }
  }
  return set;
}

}  // namespace mvrl::data
