#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mvrl/rng.hpp"
#include "mvrl/tensor.hpp"

namespace mvrl {

enum class PriorKind { kStandardGaussian, kUniformBox, kSManifold };

std::string to_string(PriorKind k);
std::optional<PriorKind> parse_prior_kind(std::string_view s);

/// A samplable distribution over R^dim. Deliberately exposes no density:
/// the adversarial models only ever need draws.
class Prior {
 public:
  static Prior standard_gaussian(std::size_t dim);
  /// Independent U[low, high) per coordinate.
  static Prior uniform_box(std::size_t dim, double low = -1.0, double high = 1.0);
  /// A 2-D uniform sheet wrapped into an S in R^3:
  ///   t ~ U(-3pi/2, 3pi/2), w ~ U(width_low, width_high)
  ///   point = (sin t, w, sign(t) * (cos t - 1))
  /// so every sample satisfies x1^2 + (1 - |x3|)^2 = 1.
  static Prior s_manifold(double width_low = 0.0, double width_high = 2.0);

  PriorKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return dim_; }
  double low() const noexcept { return low_; }
  double high() const noexcept { return high_; }

  /// n i.i.d. rows; deterministic in the rng state.
  Tensor2 sample(std::size_t n, Rng& rng) const;

  bool operator==(const Prior&) const = default;

 private:
  Prior(PriorKind kind, std::size_t dim, double low, double high) : kind_(kind), dim_(dim), low_(low), high_(high) {}

  PriorKind kind_;
  std::size_t dim_;
  double low_;
  double high_;
};

inline constexpr double kSManifoldHalfSpan = 4.71238898038468985769;  // 3pi/2

/// Euclidean distance from p to the S-manifold surface with the given width range.
double distance_to_s_manifold(const std::array<double, 3>& p, double width_low = 0.0, double width_high = 2.0);

}  // namespace mvrl
