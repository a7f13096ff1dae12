#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mvrl/tensor.hpp"

namespace mvrl::eval {

/// Bandwidth of the posterior density maps.
inline constexpr double kKdeBandwidth = 0.2;

/// log[(1/n) sum_i N(q; p_i, h^2 I)] per query row, via log-sum-exp.
std::vector<double> kde_log_density(const Tensor2& points, const Tensor2& queries, double bandwidth = kKdeBandwidth);

/// Median pairwise Euclidean distance of the pooled rows (deterministic subsample above 2000 rows).
double median_heuristic(const Tensor2& a, const Tensor2& b);

/// Unbiased Gaussian-kernel MMD^2, clamped at 0. The bandwidth defaults to the
/// median heuristic. Symmetric in its arguments bit for bit.
double mmd(const Tensor2& a, const Tensor2& b, std::optional<double> bandwidth = std::nullopt);

/// Cell centers of a square grid over (lo, hi)^2 with the given step, row-major from (lo, lo).
Tensor2 grid_centers(double lo, double hi, double step);

struct HoleFractionConfig {
  double lo = -4.0;
  double hi = 4.0;
  double step = 0.1;
  double radius = 1.5;      // cells within this many standard deviations of the origin
  double threshold = 0.1;   // relative to the prior density at the cell
  double bandwidth = kKdeBandwidth;
};

/// Fraction of grid cells inside the standard-normal prior's radius ball where
/// the KDE of `points` (n x 2) falls below threshold * prior density.
double hole_fraction(const Tensor2& points, const HoleFractionConfig& config = {});

}  // namespace mvrl::eval
