#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace lpgnn {

// Dense row-major matrix of doubles. Rows are the unit of access everywhere
// in this codebase (one row per node, per arc, ...).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }
  std::span<double> row_span(int r) { return {row(r), static_cast<std::size_t>(cols)}; }
  std::span<const double> row_span(int r) const {
    return {row(r), static_cast<std::size_t>(cols)};
  }

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  void set_zero() { std::fill(data.begin(), data.end(), 0.0); }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

}  // namespace lpgnn
