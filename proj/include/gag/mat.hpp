#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gag/error.hpp"

namespace gag {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Everything in this library is small
// enough that a flat vector plus index arithmetic beats a real linear-algebra
// dependency.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    return data_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<double> row(std::size_t r) {
    return {data_.data() + r * cols_, cols_};
  }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  // Appends (or drops trailing) rows; existing entries keep their position
  // because storage is row-major.
  void resize_rows(std::size_t new_rows) {
    data_.resize(new_rows * cols_, 0.0);
    rows_ = new_rows;
  }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  bool operator==(const Mat&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

// y = W x + b, with W shaped (out, in).
inline void affine(const Mat& weight, std::span<const double> bias,
                   std::span<const double> x, std::span<double> y) {
  if (weight.cols() != x.size() || weight.rows() != y.size() ||
      bias.size() != y.size()) {
    throw ShapeError("affine: weight " + std::to_string(weight.rows()) + "x" +
                     std::to_string(weight.cols()) + " does not map input " +
                     std::to_string(x.size()) + " to output " +
                     std::to_string(y.size()));
  }
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    y[r] = bias[r] + dot(weight.row(r), x);
  }
}

// dW += g xT  (g spans rows of dW, x spans columns)
inline void add_outer(Mat& dw, std::span<const double> g,
                      std::span<const double> x) {
  for (std::size_t r = 0; r < dw.rows(); ++r) {
    axpy(g[r], x, dw.row(r));
  }
}

// dx += WT g
inline void add_matvec_transposed(const Mat& weight, std::span<const double> g,
                                  std::span<double> dx) {
  for (std::size_t r = 0; r < weight.rows(); ++r) {
    axpy(g[r], weight.row(r), dx);
  }
}

}  // namespace gag
