// SPDX-License-Identifier: Apache-2.0
// Helpers shared by the unit tests and the acceptance runner.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cycfuse/cube.hpp"
#include "cycfuse/degradation.hpp"
#include "cycfuse/model.hpp"
#include "cycfuse/tensor.hpp"

namespace cycfuse::testing {

inline HsiCube random_cube(int bands, int rows, int cols, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  std::vector<float> v(static_cast<std::size_t>(bands) * rows * cols);
  for (auto& x : v) x = u(rng);
  return HsiCube(bands, rows, cols, std::move(v));
}

template <typename T>
Tensor<T> random_tensor(int channels, int rows, int cols, std::uint64_t seed, double lo = 0.05, double hi = 0.95) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  Tensor<T> t(channels, rows, cols);
  for (Eigen::Index i = 0; i < t.data.size(); ++i) t.data.data()[i] = static_cast<T>(u(rng));
  return t;
}

inline PsfKernel random_kernel(int s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat<double> w(s, s);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng) + 0.01;
  return PsfKernel(w / w.sum());
}

inline SrfMatrix random_srf(int l, int L, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Mat<double> w(l, L);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng) + 0.01;
  for (int r = 0; r < l; ++r) w.row(r) /= w.row(r).sum();
  return SrfMatrix(w);
}

/// Explicit block loop: out(b, i, j) = sum_{p,q} k(p,q) x(b, i*S+p, j*S+q).
inline std::vector<double> brute_spatial(const HsiCube& x, const Mat<double>& k) {
  const int s = static_cast<int>(k.rows());
  const int h = x.rows() / s, w = x.cols() / s;
  std::vector<double> out(static_cast<std::size_t>(x.bands()) * h * w, 0.0);
  for (int b = 0; b < x.bands(); ++b)
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) {
        double acc = 0.0;
        for (int p = 0; p < s; ++p)
          for (int q = 0; q < s; ++q) acc += k(p, q) * x.at(b, i * s + p, j * s + q);
        out[(static_cast<std::size_t>(b) * h + i) * w + j] = acc;
      }
  return out;
}

/// Explicit per-pixel matrix-vector product.
inline std::vector<double> brute_spectral(const HsiCube& x, const Mat<double>& r) {
  const int l = static_cast<int>(r.rows());
  std::vector<double> out(static_cast<std::size_t>(l) * x.rows() * x.cols(), 0.0);
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j)
      for (int o = 0; o < l; ++o) {
        double acc = 0.0;
        for (int b = 0; b < x.bands(); ++b) acc += r(o, b) * x.at(b, i, j);
        out[(static_cast<std::size_t>(o) * x.rows() + i) * x.cols() + j] = acc;
      }
  return out;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<param>[index]"
  std::size_t checked = 0;
};

/// Central differences over every scalar of every parameter tensor whose
/// group passes `select`. The relative error of one entry is
/// |a - n| / max(|a|, |n|, floor), so entries with near-zero gradient are
/// judged on absolute error against `floor`.
inline GradCheckResult grad_check(ModelParams<double> m, const ModelParams<double>& analytic,
                                  const std::function<double(const ModelParams<double>&)>& f,
                                  const std::function<bool(const ParamView<double>&)>& select, double h = 1e-5,
                                  double floor = 1e-5) {
  GradCheckResult res;
  auto views = parameter_views(m);
  auto gviews = parameter_views(analytic);
  for (std::size_t v = 0; v < views.size(); ++v) {
    if (!select(views[v])) continue;
    auto& vals = views[v].values;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      const double orig = vals[i];
      vals[i] = orig + h;
      const double fp = f(m);
      vals[i] = orig - h;
      const double fm = f(m);
      vals[i] = orig;
      const double num = (fp - fm) / (2.0 * h);
      const double ana = gviews[v].values[i];
      const double rel = std::abs(ana - num) / std::max({std::abs(ana), std::abs(num), floor});
      ++res.checked;
      if (rel > res.max_rel_error) {
        res.max_rel_error = rel;
        res.worst = views[v].name + "[" + std::to_string(i) + "]";
      }
    }
  }
  return res;
}

/// Miniature configuration used by the gradient checks.
inline Architecture mini_arch() {
  Architecture a;
  a.hsi_bands = 4;
  a.msi_bands = 2;
  a.scale = 2;
  a.widths = {4, 4};
  return a;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("cycfuse_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace cycfuse::testing
