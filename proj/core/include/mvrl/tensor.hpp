#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace mvrl {

/// Dense row-major matrix of doubles. Batches are rows, features are columns.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws DimensionError when data.size() != rows * cols.
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Tensor2 from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool operator==(const Tensor2&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// a * b
Tensor2 matmul(const Tensor2& a, const Tensor2& b);
/// transpose(a) * b
Tensor2 matmul_tn(const Tensor2& a, const Tensor2& b);
/// a * transpose(b)
Tensor2 matmul_nt(const Tensor2& a, const Tensor2& b);

/// Column-wise concatenation; row counts must agree.
Tensor2 hconcat(const Tensor2& a, const Tensor2& b);
Tensor2 vconcat(const Tensor2& a, const Tensor2& b);
Tensor2 slice_cols(const Tensor2& t, std::size_t begin, std::size_t count);
Tensor2 select_rows(const Tensor2& t, std::span<const std::size_t> indices);

bool all_finite(const Tensor2& t) noexcept;
bool all_finite(std::span<const double> values) noexcept;

}  // namespace mvrl
