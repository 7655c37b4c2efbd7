// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>
#include <string>

#include "cycfuse/cube.hpp"
#include "cycfuse/error.hpp"

namespace cycfuse {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

/// Network activation: one row of `data` per channel, each row holding the
/// channel image in row-major order. Same memory layout as HsiCube.
template <typename T>
struct Tensor {
  int rows = 0;
  int cols = 0;
  Mat<T> data;

  Tensor() = default;
  Tensor(int channels, int rows_, int cols_) : rows(rows_), cols(cols_), data(Mat<T>::Zero(channels, rows_ * cols_)) {}

  int channels() const noexcept { return static_cast<int>(data.rows()); }
  Eigen::Index pixels() const noexcept { return static_cast<Eigen::Index>(rows) * cols; }

  T& at(int c, int r, int col) { return data(c, static_cast<Eigen::Index>(r) * cols + col); }
  T at(int c, int r, int col) const { return data(c, static_cast<Eigen::Index>(r) * cols + col); }

  bool same_shape(const Tensor& o) const noexcept {
    return channels() == o.channels() && rows == o.rows && cols == o.cols;
  }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.rows = rows;
    out.cols = cols;
    out.data = data.template cast<U>();
    return out;
  }
};

template <typename T>
std::string shape_string(const Tensor<T>& t) {
  return "(" + std::to_string(t.channels()) + "," + std::to_string(t.rows) + "," + std::to_string(t.cols) + ")";
}

template <typename T>
void require_same_shape(const Tensor<T>& a, const Tensor<T>& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
  }
}

template <typename T>
Tensor<T> to_tensor(const HsiCube& cube) {
  Tensor<T> t(cube.bands(), cube.rows(), cube.cols());
  const auto values = cube.data();
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = static_cast<T>(values[i]);
  return t;
}

/// Converts back to a cube, clamping into [0,1] (a no-op for sigmoid outputs
/// and convex combinations of valid cubes, up to rounding).
template <typename T>
HsiCube to_cube(const Tensor<T>& t, std::string name = {},
                std::optional<std::vector<double>> wavelengths_nm = std::nullopt) {
  std::vector<float> values(static_cast<std::size_t>(t.data.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto v = static_cast<float>(t.data.data()[i]);
    if (!std::isfinite(v)) throw DataError("to_cube: non-finite activation");
    values[i] = std::clamp(v, 0.0f, 1.0f);
  }
  return HsiCube(t.channels(), t.rows, t.cols, std::move(values), std::move(wavelengths_nm), std::move(name));
}

}  // namespace cycfuse
