#include "mvrl/eval/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mvrl/errors.hpp"

namespace mvrl::eval {
namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

double kernel_sum(const Tensor2& a, const Tensor2& b, double inv2s2, bool same) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto ai = a.row(i);
    for (std::size_t j = same ? i + 1 : 0; j < b.rows(); ++j) s += std::exp(-sq_dist(ai, b.row(j)) * inv2s2);
  }
  return same ? 2.0 * s : s;
}

// Deterministic total order on tensors, used to make two-sample statistics
// independent of argument order.
bool tensor_less(const Tensor2& a, const Tensor2& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  const auto av = a.data();
  const auto bv = b.data();
  return std::lexicographical_compare(av.begin(), av.end(), bv.begin(), bv.end());
}

}  // namespace

std::vector<double> kde_log_density(const Tensor2& points, const Tensor2& queries, double bandwidth) {
  if (!(bandwidth > 0.0)) throw std::invalid_argument("kde bandwidth must be > 0");
  if (points.rows() == 0) throw DataError("kde needs at least one point");
  if (points.cols() != queries.cols()) throw DimensionError("kde: points and queries differ in dimension");
  const double d = double(points.cols());
  const double inv2h2 = 1.0 / (2.0 * bandwidth * bandwidth);
  const double log_norm = -0.5 * d * std::log(2.0 * std::numbers::pi * bandwidth * bandwidth) -
                          std::log(double(points.rows()));
  std::vector<double> out(queries.rows());
  std::vector<double> expo(points.rows());
  for (std::size_t q = 0; q < queries.rows(); ++q) {
    const auto qr = queries.row(q);
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < points.rows(); ++i) {
      expo[i] = -sq_dist(qr, points.row(i)) * inv2h2;
      mx = std::max(mx, expo[i]);
    }
    double s = 0.0;
    for (double e : expo) s += std::exp(e - mx);
    out[q] = log_norm + mx + std::log(s);
  }
  return out;
}

double median_heuristic(const Tensor2& a, const Tensor2& b) {
  Tensor2 pooled = vconcat(a, b);
  constexpr std::size_t kCap = 2000;
  if (pooled.rows() > kCap) {
    std::vector<std::size_t> keep(kCap);
    for (std::size_t i = 0; i < kCap; ++i) keep[i] = i * pooled.rows() / kCap;
    pooled = select_rows(pooled, keep);
  }
  std::vector<double> dists;
  dists.reserve(pooled.rows() * (pooled.rows() - 1) / 2);
  for (std::size_t i = 0; i < pooled.rows(); ++i) {
    for (std::size_t j = i + 1; j < pooled.rows(); ++j) dists.push_back(std::sqrt(sq_dist(pooled.row(i), pooled.row(j))));
  }
  if (dists.empty()) return 1.0;
  auto mid = dists.begin() + std::ptrdiff_t(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid > 0.0 ? *mid : 1.0;
}

double mmd(const Tensor2& a_in, const Tensor2& b_in, std::optional<double> bandwidth) {
  if (a_in.cols() != b_in.cols()) {
    throw DimensionError("mmd: samples have dimensions " + std::to_string(a_in.cols()) + " and " +
                         std::to_string(b_in.cols()));
  }
  if (a_in.rows() < 2 || b_in.rows() < 2) throw DataError("mmd: each sample needs at least 2 rows");
  const bool swap = tensor_less(b_in, a_in);
  const Tensor2& a = swap ? b_in : a_in;
  const Tensor2& b = swap ? a_in : b_in;
  const double sigma = bandwidth ? *bandwidth : median_heuristic(a, b);
  if (!(sigma > 0.0)) throw std::invalid_argument("mmd bandwidth must be > 0");
  const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
  const double m = double(a.rows());
  const double n = double(b.rows());
  const double kaa = kernel_sum(a, a, inv2s2, true) / (m * (m - 1.0));
  const double kbb = kernel_sum(b, b, inv2s2, true) / (n * (n - 1.0));
  const double kab = kernel_sum(a, b, inv2s2, false) / (m * n);
  return std::max(0.0, kaa + kbb - 2.0 * kab);
}

Tensor2 grid_centers(double lo, double hi, double step) {
  if (!(hi > lo) || !(step > 0.0)) throw std::invalid_argument("grid needs hi > lo and step > 0");
  const auto cells = std::size_t(std::llround((hi - lo) / step));
  Tensor2 out(cells * cells, 2);
  for (std::size_t r = 0; r < cells; ++r) {
    for (std::size_t c = 0; c < cells; ++c) {
      out(r * cells + c, 0) = lo + (double(c) + 0.5) * step;
      out(r * cells + c, 1) = lo + (double(r) + 0.5) * step;
    }
  }
  return out;
}

double hole_fraction(const Tensor2& points, const HoleFractionConfig& config) {
  if (points.cols() != 2) throw DimensionError("hole_fraction needs 2-D points");
  const Tensor2 grid = grid_centers(config.lo, config.hi, config.step);
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < grid.rows(); ++i) {
    if (std::hypot(grid(i, 0), grid(i, 1)) <= config.radius) inside.push_back(i);
  }
  if (inside.empty()) throw std::invalid_argument("hole_fraction: no grid cell lies inside the prior ball");
  const Tensor2 queries = select_rows(grid, inside);
  const auto log_q = kde_log_density(points, queries, config.bandwidth);
  std::size_t holes = 0;
  for (std::size_t i = 0; i < queries.rows(); ++i) {
    const double r2 = queries(i, 0) * queries(i, 0) + queries(i, 1) * queries(i, 1);
    const double log_p = -std::log(2.0 * std::numbers::pi) - 0.5 * r2;
    holes += log_q[i] < std::log(config.threshold) + log_p;
  }
  return double(holes) / double(queries.rows());
}

}  // namespace mvrl::eval
