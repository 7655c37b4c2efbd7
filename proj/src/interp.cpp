// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/interp.hpp"

#include <cmath>
#include <map>
#include <mutex>

namespace cycfuse {

double cubic_weight(double x, double a) {
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

template <typename T>
Mat<T> bicubic_matrix(int n, int factor) {
  if (n < 1 || factor < 1) throw ArgumentError("bicubic_matrix: size and factor must be positive");
  Mat<double> m = Mat<double>::Zero(static_cast<Eigen::Index>(n) * factor, n);
  for (int o = 0; o < n * factor; ++o) {
    const double src = (o + 0.5) / factor - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    for (int tap = -1; tap <= 2; ++tap) {
      const double w = cubic_weight(t - tap);
      m(o, reflect_index(static_cast<int>(base) + tap, n)) += w;
    }
  }
  return m.cast<T>();
}

namespace {

template <typename T>
const Mat<T>& cached_matrix(int n, int factor) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, Mat<T>> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find({n, factor});
  if (it == cache.end()) it = cache.emplace(std::pair{n, factor}, bicubic_matrix<T>(n, factor)).first;
  return it->second;
}

template <typename T>
using ChannelMap = Eigen::Map<Mat<T>>;
template <typename T>
using ConstChannelMap = Eigen::Map<const Mat<T>>;

}  // namespace

template <typename T>
Tensor<T> upsample_bicubic(const Tensor<T>& x, int factor) {
  const Mat<T>& vr = cached_matrix<T>(x.rows, factor);
  const Mat<T>& vc = cached_matrix<T>(x.cols, factor);
  Tensor<T> out(x.channels(), x.rows * factor, x.cols * factor);
  Mat<T> tmp;
  for (int c = 0; c < x.channels(); ++c) {
    ConstChannelMap<T> in(x.data.row(c).data(), x.rows, x.cols);
    ChannelMap<T> dst(out.data.row(c).data(), out.rows, out.cols);
    tmp.noalias() = vr * in;
    dst.noalias() = tmp * vc.transpose();
  }
  return out;
}

template <typename T>
Tensor<T> upsample_bicubic_backward(const Tensor<T>& grad_out, int in_rows, int in_cols, int factor) {
  const Mat<T>& vr = cached_matrix<T>(in_rows, factor);
  const Mat<T>& vc = cached_matrix<T>(in_cols, factor);
  Tensor<T> grad_in(grad_out.channels(), in_rows, in_cols);
  Mat<T> tmp;
  for (int c = 0; c < grad_out.channels(); ++c) {
    ConstChannelMap<T> g(grad_out.data.row(c).data(), grad_out.rows, grad_out.cols);
    ChannelMap<T> dst(grad_in.data.row(c).data(), in_rows, in_cols);
    tmp.noalias() = vr.transpose() * g;
    dst.noalias() = tmp * vc;
  }
  return grad_in;
}

template Mat<float> bicubic_matrix<float>(int, int);
template Mat<double> bicubic_matrix<double>(int, int);
template Tensor<float> upsample_bicubic(const Tensor<float>&, int);
template Tensor<double> upsample_bicubic(const Tensor<double>&, int);
template Tensor<float> upsample_bicubic_backward(const Tensor<float>&, int, int, int);
template Tensor<double> upsample_bicubic_backward(const Tensor<double>&, int, int, int);

HsiCube bicubic_baseline(const HsiCube& lr_hsi, int factor) {
  const auto up = upsample_bicubic(to_tensor<double>(lr_hsi), factor);
  return to_cube(up, "bicubic_baseline", lr_hsi.wavelengths_nm());
}

}  // namespace cycfuse
