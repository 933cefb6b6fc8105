// Dense row-major double matrix, sized for the small per-concept blocks
// this model works with (K x D, K x K, D x D).
#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace cleki {

class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, double value = 0.0)
      : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, value) {
    assert(rows >= 0 && cols >= 0);
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }
  double operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return data_[static_cast<size_t>(r) * cols_ + c];
  }

  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }
  std::span<double> row_span(int r) { return {row(r), static_cast<size_t>(cols_)}; }
  std::span<const double> row_span(int r) const { return {row(r), static_cast<size_t>(cols_)}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& storage() { return data_; }
  const std::vector<double>& storage() const { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool operator==(const Matrix& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double l2_norm(std::span<const double> a) {
  return std::sqrt(dot(a, a));
}

// out = x * W + b where x is a row vector of length W.rows().
inline void affine_row(std::span<const double> x, const Matrix& w,
                       std::span<const double> b, std::span<double> out) {
  assert(static_cast<int>(x.size()) == w.rows());
  assert(out.size() == b.size() && static_cast<int>(out.size()) == w.cols());
  for (int c = 0; c < w.cols(); ++c) out[c] = b[c];
  for (int r = 0; r < w.rows(); ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* wr = w.row(r);
    for (int c = 0; c < w.cols(); ++c) out[c] += xr * wr[c];
  }
}

// out = W * x where x is a column vector of length W.cols().
inline void matvec(const Matrix& w, std::span<const double> x, std::span<double> out) {
  assert(static_cast<int>(x.size()) == w.cols());
  assert(static_cast<int>(out.size()) == w.rows());
  for (int r = 0; r < w.rows(); ++r) out[r] = dot({w.row(r), static_cast<size_t>(w.cols())}, x);
}

// Logistic function kept strictly inside (0, 1): saturated values are pulled
// back to the nearest representable interior point so row norms stay positive
// and log terms stay finite.
inline double sigmoid(double x) {
  const double s = 1.0 / (1.0 + std::exp(-x));
  if (s >= 1.0) return 1.0 - 1e-16;
  if (s <= 0.0) return 1e-300;
  return s;
}

}  // namespace cleki
