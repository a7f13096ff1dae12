#include "mvrl/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "mvrl/errors.hpp"

namespace mvrl {
namespace {

constexpr double kPi = std::numbers::pi;

// Distance in the (x1, x3) plane from q to the unit-radius arc centered at
// `center` whose points are center + (sin t, orient * cos t), t in [t_lo, t_hi].
double arc_distance(double qx, double qz, double center_z, double orient, double t_lo, double t_hi) {
  const double vx = qx;
  const double vz = qz - center_z;
  const auto point_at = [&](double t) { return std::array<double, 2>{std::sin(t), center_z + orient * std::cos(t)}; };
  const auto dist_to = [&](std::array<double, 2> p) { return std::hypot(qx - p[0], qz - p[1]); };
  double best = std::min(dist_to(point_at(t_lo)), dist_to(point_at(t_hi)));
  const double r = std::hypot(vx, vz);
  if (r == 0.0) return 1.0;
  double t = std::atan2(vx, orient * vz);  // (-pi, pi]
  // Shift by whole turns into the arc's parameter window when possible.
  while (t < t_lo) t += 2 * kPi;
  while (t - 2 * kPi >= t_lo) t -= 2 * kPi;
  if (t >= t_lo && t <= t_hi) best = std::min(best, std::abs(r - 1.0));
  return best;
}

}  // namespace

std::string to_string(PriorKind k) {
  switch (k) {
    case PriorKind::kStandardGaussian: return "standard_gaussian";
    case PriorKind::kUniformBox: return "uniform_box";
    case PriorKind::kSManifold: return "s_manifold";
  }
  return "?";
}

std::optional<PriorKind> parse_prior_kind(std::string_view s) {
  if (s == "standard_gaussian" || s == "gaussian") return PriorKind::kStandardGaussian;
  if (s == "uniform_box" || s == "uniform") return PriorKind::kUniformBox;
  if (s == "s_manifold") return PriorKind::kSManifold;
  return std::nullopt;
}

Prior Prior::standard_gaussian(std::size_t dim) {
  if (dim == 0) throw DimensionError("standard_gaussian prior needs dim >= 1");
  return Prior(PriorKind::kStandardGaussian, dim, 0.0, 0.0);
}

Prior Prior::uniform_box(std::size_t dim, double low, double high) {
  if (dim == 0) throw DimensionError("uniform_box prior needs dim >= 1");
  if (!(low < high)) throw std::invalid_argument("uniform_box prior needs low < high");
  return Prior(PriorKind::kUniformBox, dim, low, high);
}

Prior Prior::s_manifold(double width_low, double width_high) {
  if (!(width_low < width_high)) throw std::invalid_argument("s_manifold prior needs width_low < width_high");
  return Prior(PriorKind::kSManifold, 3, width_low, width_high);
}

Tensor2 Prior::sample(std::size_t n, Rng& rng) const {
  Tensor2 out(n, dim_);
  switch (kind_) {
    case PriorKind::kStandardGaussian: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (double& v : out.data()) v = normal(rng);
      break;
    }
    case PriorKind::kUniformBox: {
      std::uniform_real_distribution<double> uni(low_, high_);
      for (double& v : out.data()) v = uni(rng);
      break;
    }
    case PriorKind::kSManifold: {
      std::uniform_real_distribution<double> arc(-kSManifoldHalfSpan, kSManifoldHalfSpan);
      std::uniform_real_distribution<double> width(low_, high_);
      for (std::size_t i = 0; i < n; ++i) {
        const double t = arc(rng);
        const double w = width(rng);
        auto row = out.row(i);
        row[0] = std::sin(t);
        row[1] = w;
        row[2] = (t < 0 ? -1.0 : 1.0) * (std::cos(t) - 1.0);
      }
      break;
    }
  }
  return out;
}

double distance_to_s_manifold(const std::array<double, 3>& p, double width_low, double width_high) {
  // The surface is (planar S-curve) x [width_low, width_high] along x2, so the
  // squared distance splits into the in-plane and the width components.
  const double curve = std::min(arc_distance(p[0], p[2], -1.0, 1.0, 0.0, kSManifoldHalfSpan),
                                arc_distance(p[0], p[2], 1.0, -1.0, -kSManifoldHalfSpan, 0.0));
  const double dw = std::max({0.0, width_low - p[1], p[1] - width_high});
  return std::hypot(curve, dw);
}

}  // namespace mvrl
