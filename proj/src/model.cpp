// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/model.hpp"

#include <bit>
#include <cmath>
#include <random>

#include "cycfuse/error.hpp"
#include "cycfuse/interp.hpp"
#include "cycfuse/rng.hpp"

namespace cycfuse {

int Architecture::num_interp_blocks() const {
  if (scale < 1 || !std::has_single_bit(static_cast<unsigned>(scale))) {
    throw ConfigError("scale ratio must be a power of two, got " + std::to_string(scale));
  }
  return std::countr_zero(static_cast<unsigned>(scale));
}

void Architecture::validate() const {
  num_interp_blocks();
  if (hsi_bands < 1 || msi_bands < 1) throw ConfigError("band counts must be positive");
  if (widths.empty()) throw ConfigError("architecture widths must be non-empty");
  for (int w : widths) {
    if (w < 1) throw ConfigError("architecture widths must all be >= 1");
  }
}

namespace {

// ---------------------------------------------------------------- parameters

template <typename M, typename F>
void visit_conv(M& conv, const std::string& prefix, ParamGroup group, F&& f) {
  f(prefix + ".weight", group, std::vector<int>{conv.out_channels, conv.in_channels, conv.kernel_size, conv.kernel_size},
    conv.weight.data(), conv.weight.size());
  f(prefix + ".bias", group, std::vector<int>{conv.out_channels}, conv.bias.data(), conv.bias.size());
}

template <typename M, typename F>
void visit_layer(M& layer, const std::string& prefix, ParamGroup group, F&& f) {
  visit_conv(layer.conv, prefix + ".conv", group, f);
  const int n = static_cast<int>(layer.norm.scale.size());
  f(prefix + ".norm.scale", group, std::vector<int>{n}, layer.norm.scale.data(), layer.norm.scale.size());
  f(prefix + ".norm.shift", group, std::vector<int>{n}, layer.norm.shift.data(), layer.norm.shift.size());
}

template <typename M, typename F>
void visit_parameters(M& m, F&& f) {
  const auto deg = ParamGroup::degradation;
  f(std::string("psf_logits"), deg, std::vector<int>{static_cast<int>(m.psf_logits.rows()), static_cast<int>(m.psf_logits.cols())},
    m.psf_logits.data(), m.psf_logits.size());
  f(std::string("srf_logits"), deg, std::vector<int>{static_cast<int>(m.srf_logits.rows()), static_cast<int>(m.srf_logits.cols())},
    m.srf_logits.data(), m.srf_logits.size());
  const auto spa = ParamGroup::spatial_upsampler;
  for (std::size_t i = 0; i < m.spatial.blocks.size(); ++i) {
    visit_layer(m.spatial.blocks[i], "spatial.block" + std::to_string(i), spa, f);
  }
  visit_layer(m.spatial.refine, "spatial.refine", spa, f);
  visit_conv(m.spatial.output, "spatial.output", spa, f);
  const auto spe = ParamGroup::spectral_upsampler;
  for (std::size_t i = 0; i < m.spectral.hidden.size(); ++i) {
    visit_layer(m.spectral.hidden[i], "spectral.hidden" + std::to_string(i), spe, f);
  }
  visit_conv(m.spectral.output, "spectral.output", spe, f);
}

template <typename T>
Conv2d<T> make_conv(int in, int out, int k) {
  Conv2d<T> c;
  c.in_channels = in;
  c.out_channels = out;
  c.kernel_size = k;
  c.weight = Mat<T>::Zero(out, in * k * k);
  c.bias = Vec<T>::Zero(out);
  return c;
}

template <typename T>
ConvNormLayer<T> make_layer(int in, int out, int k) {
  ConvNormLayer<T> l;
  l.conv = make_conv<T>(in, out, k);
  l.norm.scale = Vec<T>::Ones(out);
  l.norm.shift = Vec<T>::Zero(out);
  return l;
}

template <typename T>
ModelParams<T> make_shapes(const Architecture& arch) {
  arch.validate();
  ModelParams<T> m;
  m.arch = arch;
  m.psf_logits = Mat<T>::Zero(arch.scale, arch.scale);
  m.srf_logits = Mat<T>::Zero(arch.msi_bands, arch.hsi_bands);
  int channels = arch.hsi_bands;
  for (int i = 0; i < arch.num_interp_blocks(); ++i) {
    m.spatial.blocks.push_back(make_layer<T>(channels, arch.block_width(i), 3));
    channels = arch.block_width(i);
  }
  m.spatial.refine = make_layer<T>(channels, arch.widths.back(), 1);
  m.spatial.output = make_conv<T>(arch.widths.back(), arch.hsi_bands, 1);
  channels = arch.msi_bands;
  for (int w : arch.widths) {
    m.spectral.hidden.push_back(make_layer<T>(channels, w, 1));
    channels = w;
  }
  m.spectral.output = make_conv<T>(channels, arch.hsi_bands, 1);
  return m;
}

template <typename T>
void fill_kaiming(T* data, Eigen::Index n, int fan_in, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
  for (Eigen::Index i = 0; i < n; ++i) data[i] = static_cast<T>(normal(rng));
}

template <typename T>
void init_conv(Conv2d<T>& c, Rng& rng) {
  fill_kaiming(c.weight.data(), c.weight.size(), c.in_channels * c.kernel_size * c.kernel_size, rng);
}

// ------------------------------------------------------------------- layers

template <typename T>
Mat<T> im2col3(const Mat<T>& x, int rows, int cols) {
  const int channels = static_cast<int>(x.rows());
  const Eigen::Index pixels = static_cast<Eigen::Index>(rows) * cols;
  Mat<T> out(static_cast<Eigen::Index>(channels) * 9, pixels);
  for (int c = 0; c < channels; ++c) {
    const T* src = x.row(c).data();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        T* dst = out.row((c * 3 + ky) * 3 + kx).data();
        for (int r = 0; r < rows; ++r) {
          const int sr = r + ky - 1;
          T* line = dst + static_cast<std::size_t>(r) * cols;
          if (sr < 0 || sr >= rows) {
            std::fill(line, line + cols, T(0));
            continue;
          }
          const T* sline = src + static_cast<std::size_t>(sr) * cols;
          const int lo = kx == 0 ? 1 : 0;
          const int hi = kx == 2 ? cols - 1 : cols;
          if (kx == 0) line[0] = T(0);
          if (kx == 2) line[cols - 1] = T(0);
          for (int col = lo; col < hi; ++col) line[col] = sline[col + kx - 1];
        }
      }
    }
  }
  return out;
}

template <typename T>
Mat<T> col2im3(const Mat<T>& columns, int channels, int rows, int cols) {
  Mat<T> out = Mat<T>::Zero(channels, static_cast<Eigen::Index>(rows) * cols);
  for (int c = 0; c < channels; ++c) {
    T* dst = out.row(c).data();
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const T* src = columns.row((c * 3 + ky) * 3 + kx).data();
        for (int r = 0; r < rows; ++r) {
          const int sr = r + ky - 1;
          if (sr < 0 || sr >= rows) continue;
          const T* line = src + static_cast<std::size_t>(r) * cols;
          T* dline = dst + static_cast<std::size_t>(sr) * cols;
          const int lo = kx == 0 ? 1 : 0;
          const int hi = kx == 2 ? cols - 1 : cols;
          for (int col = lo; col < hi; ++col) dline[col + kx - 1] += line[col];
        }
      }
    }
  }
  return out;
}

template <typename T>
Mat<T> conv_apply(const Conv2d<T>& conv, const Mat<T>& columns) {
  Mat<T> out(conv.out_channels, columns.cols());
  out.noalias() = conv.weight * columns;
  out.colwise() += conv.bias;
  return out;
}

template <typename T>
Mat<T> conv_columns(const Conv2d<T>& conv, const Tensor<T>& x) {
  if (x.channels() != conv.in_channels) {
    throw ShapeError("convolution expects " + std::to_string(conv.in_channels) + " channels, got " +
                     std::to_string(x.channels()));
  }
  return conv.kernel_size == 3 ? im2col3(x.data, x.rows, x.cols) : x.data;
}

/// conv -> IN -> ReLU; fills `trace` (columns are moved in).
template <typename T>
Mat<T> layer_forward(const ConvNormLayer<T>& layer, Mat<T> columns, LayerTrace<T>& trace) {
  Mat<T> pre = conv_apply(layer.conv, columns);
  const auto n = static_cast<T>(pre.cols());
  Vec<T> mean = pre.rowwise().sum() / n;
  pre.colwise() -= mean;
  Vec<T> var = pre.array().square().rowwise().sum() / n;
  trace.inv_std = (var.array() + static_cast<T>(kInstanceNormEps)).rsqrt();
  pre = trace.inv_std.asDiagonal() * pre;
  trace.activated = (layer.norm.scale.asDiagonal() * pre).colwise() + layer.norm.shift;
  trace.activated = trace.activated.cwiseMax(T(0));
  trace.normalized = std::move(pre);
  trace.columns = std::move(columns);
  return trace.activated;
}

/// Returns the gradient w.r.t. the layer's conv input columns (empty when not needed).
template <typename T>
Mat<T> layer_backward(const ConvNormLayer<T>& layer, const LayerTrace<T>& trace, Mat<T> grad,
                      ConvNormLayer<T>& grads, bool need_input_grad) {
  grad = (trace.activated.array() > T(0)).select(grad, T(0));
  grads.norm.shift += grad.rowwise().sum();
  grads.norm.scale += grad.cwiseProduct(trace.normalized).rowwise().sum();
  Mat<T> dxhat = layer.norm.scale.asDiagonal() * grad;
  const auto n = static_cast<T>(dxhat.cols());
  const Vec<T> sum_d = dxhat.rowwise().sum();
  const Vec<T> sum_dx = dxhat.cwiseProduct(trace.normalized).rowwise().sum();
  // dpre = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
  Mat<T> dpre = dxhat;
  dpre.colwise() -= sum_d / n;
  dpre -= (sum_dx / n).asDiagonal() * trace.normalized;
  dpre = trace.inv_std.asDiagonal() * dpre;
  grads.conv.weight.noalias() += dpre * trace.columns.transpose();
  grads.conv.bias += dpre.rowwise().sum();
  if (!need_input_grad) return {};
  Mat<T> dcol(layer.conv.weight.cols(), dpre.cols());
  dcol.noalias() = layer.conv.weight.transpose() * dpre;
  return dcol;
}

template <typename T>
Mat<T> sigmoid_output_forward(const Conv2d<T>& conv, const Mat<T>& input) {
  Mat<T> pre = conv_apply(conv, input);
  return (T(1) / (T(1) + (-pre.array()).exp())).matrix();
}

template <typename T>
Mat<T> sigmoid_output_backward(const Conv2d<T>& conv, const Mat<T>& input, const Mat<T>& output,
                               const Mat<T>& grad, Conv2d<T>& grads) {
  const Mat<T> dpre = (grad.array() * output.array() * (T(1) - output.array())).matrix();
  grads.weight.noalias() += dpre * input.transpose();
  grads.bias += dpre.rowwise().sum();
  Mat<T> dinput(conv.weight.cols(), dpre.cols());
  dinput.noalias() = conv.weight.transpose() * dpre;
  return dinput;
}

template <typename T>
Tensor<T> wrap(Mat<T> data, int rows, int cols) {
  Tensor<T> t;
  t.rows = rows;
  t.cols = cols;
  t.data = std::move(data);
  return t;
}

}  // namespace

// ------------------------------------------------------------ public: params

template <typename T>
std::vector<ParamView<T>> parameter_views(ModelParams<T>& m) {
  std::vector<ParamView<T>> views;
  visit_parameters(m, [&](std::string name, ParamGroup group, std::vector<int> shape, T* data, Eigen::Index n) {
    views.push_back({std::move(name), group, std::move(shape), std::span<T>(data, static_cast<std::size_t>(n))});
  });
  return views;
}

template <typename T>
std::vector<ParamView<const T>> parameter_views(const ModelParams<T>& m) {
  std::vector<ParamView<const T>> views;
  visit_parameters(m, [&](std::string name, ParamGroup group, std::vector<int> shape, const T* data, Eigen::Index n) {
    views.push_back({std::move(name), group, std::move(shape), std::span<const T>(data, static_cast<std::size_t>(n))});
  });
  return views;
}

template <typename T>
ModelParams<T> init_params(const Architecture& arch, std::uint64_t seed) {
  ModelParams<T> m = make_shapes<T>(arch);
  if (arch.logit_init == LogitInit::kaiming) {
    Rng psf_rng(derive_seed(seed, "init/psf"));
    fill_kaiming(m.psf_logits.data(), m.psf_logits.size(), static_cast<int>(m.psf_logits.cols()), psf_rng);
    Rng srf_rng(derive_seed(seed, "init/srf"));
    fill_kaiming(m.srf_logits.data(), m.srf_logits.size(), static_cast<int>(m.srf_logits.cols()), srf_rng);
  }
  Rng spa_rng(derive_seed(seed, "init/spatial"));
  for (auto& b : m.spatial.blocks) init_conv(b.conv, spa_rng);
  init_conv(m.spatial.refine.conv, spa_rng);
  init_conv(m.spatial.output, spa_rng);
  Rng spe_rng(derive_seed(seed, "init/spectral"));
  for (auto& l : m.spectral.hidden) init_conv(l.conv, spe_rng);
  init_conv(m.spectral.output, spe_rng);
  return m;
}

template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& m) {
  ModelParams<T> z = make_shapes<T>(m.arch);
  for (auto& v : parameter_views(z)) std::fill(v.values.begin(), v.values.end(), T(0));
  z.frozen_degradation = m.frozen_degradation;
  return z;
}

template <typename U, typename T>
ModelParams<U> cast_params(const ModelParams<T>& m) {
  ModelParams<U> out = make_shapes<U>(m.arch);
  out.frozen_degradation = m.frozen_degradation;
  auto src = parameter_views(m);
  auto dst = parameter_views(out);
  for (std::size_t i = 0; i < src.size(); ++i) {
    std::transform(src[i].values.begin(), src[i].values.end(), dst[i].values.begin(),
                   [](T v) { return static_cast<U>(v); });
  }
  return out;
}

template <typename T>
void inject_degradation(ModelParams<T>& m, const PsfKernel& k, const SrfMatrix& r) {
  if (k.scale() != m.arch.scale) throw ShapeError("injected PSF kernel size does not match the scale ratio");
  if (r.msi_bands() != m.arch.msi_bands || r.hsi_bands() != m.arch.hsi_bands) {
    throw ShapeError("injected SRF shape does not match the architecture");
  }
  m.psf_logits = k.weights().cwiseMax(1e-12).array().log().matrix().template cast<T>();
  m.srf_logits = r.weights().cwiseMax(1e-12).array().log().matrix().template cast<T>();
  m.frozen_degradation = true;
}

// ------------------------------------------------------------------ softmax

template <typename T>
Mat<T> softmax_all(const Mat<T>& logits) {
  Mat<T> e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

template <typename T>
Mat<T> softmax_rows(const Mat<T>& logits) {
  Mat<T> e = (logits.colwise() - logits.rowwise().maxCoeff()).array().exp().matrix();
  const Vec<T> totals = e.rowwise().sum();
  return totals.cwiseInverse().asDiagonal() * e;
}

template <typename T>
Mat<T> softmax_all_backward(const Mat<T>& probs, const Mat<T>& grad_probs) {
  const T inner = probs.cwiseProduct(grad_probs).sum();
  return probs.cwiseProduct((grad_probs.array() - inner).matrix());
}

template <typename T>
Mat<T> softmax_rows_backward(const Mat<T>& probs, const Mat<T>& grad_probs) {
  const Vec<T> inner = probs.cwiseProduct(grad_probs).rowwise().sum();
  Mat<T> centered = grad_probs;
  centered.colwise() -= inner;
  return probs.cwiseProduct(centered);
}

PsfKernel psf_kernel(const Mat<double>& logits) { return PsfKernel(softmax_all(logits)); }
SrfMatrix srf_matrix(const Mat<double>& logits) { return SrfMatrix(softmax_rows(logits)); }

// ------------------------------------------------------------------ modules

template <typename T>
Tensor<T> degrade_spatial(const ModelParams<T>& m, const Tensor<T>& x) {
  return spatial_degrade(x, softmax_all(m.psf_logits));
}

template <typename T>
Tensor<T> degrade_spectral(const ModelParams<T>& m, const Tensor<T>& x) {
  return spectral_degrade(x, softmax_rows(m.srf_logits));
}

template <typename T>
Tensor<T> degrade_spatial_backward(const ModelParams<T>& m, const Tensor<T>& x, const Tensor<T>& grad_out,
                                   ModelParams<T>& grads, bool need_input_grad) {
  const Mat<T> kernel = softmax_all(m.psf_logits);
  Tensor<T> grad_x;
  Mat<T> grad_kernel = Mat<T>::Zero(kernel.rows(), kernel.cols());
  spatial_degrade_backward(x, kernel, grad_out, need_input_grad ? &grad_x : nullptr,
                           m.frozen_degradation ? nullptr : &grad_kernel);
  if (!m.frozen_degradation) grads.psf_logits += softmax_all_backward(kernel, grad_kernel);
  return grad_x;
}

template <typename T>
Tensor<T> degrade_spectral_backward(const ModelParams<T>& m, const Tensor<T>& x, const Tensor<T>& grad_out,
                                    ModelParams<T>& grads, bool need_input_grad) {
  const Mat<T> srf = softmax_rows(m.srf_logits);
  Tensor<T> grad_x;
  Mat<T> grad_srf = Mat<T>::Zero(srf.rows(), srf.cols());
  spectral_degrade_backward(x, srf, grad_out, need_input_grad ? &grad_x : nullptr,
                            m.frozen_degradation ? nullptr : &grad_srf);
  if (!m.frozen_degradation) grads.srf_logits += softmax_rows_backward(srf, grad_srf);
  return grad_x;
}

template <typename T>
Tensor<T> upsample_spatial(const ModelParams<T>& m, const Tensor<T>& y, SpatialTrace<T>* trace) {
  if (y.channels() != m.arch.hsi_bands) {
    throw ShapeError("spatial upsampler expects " + std::to_string(m.arch.hsi_bands) + " bands, got " +
                     std::to_string(y.channels()));
  }
  SpatialTrace<T> local;
  SpatialTrace<T>& tr = trace ? *trace : local;
  tr = SpatialTrace<T>{};
  Tensor<T> x = y;
  for (const auto& block : m.spatial.blocks) {
    tr.block_rows.push_back(x.rows);
    tr.block_cols.push_back(x.cols);
    const Tensor<T> up = upsample_bicubic(x, 2);
    tr.blocks.emplace_back();
    x = wrap(layer_forward(block, conv_columns(block.conv, up), tr.blocks.back()), up.rows, up.cols);
  }
  x = wrap(layer_forward(m.spatial.refine, conv_columns(m.spatial.refine.conv, x), tr.refine), x.rows, x.cols);
  tr.output = sigmoid_output_forward(m.spatial.output, x.data);
  return wrap(trace ? Mat<T>(tr.output) : std::move(tr.output), x.rows, x.cols);
}

template <typename T>
Tensor<T> upsample_spatial_backward(const ModelParams<T>& m, const SpatialTrace<T>& tr, const Tensor<T>& grad_out,
                                    ModelParams<T>& grads, bool need_input_grad) {
  const int out_rows = grad_out.rows;
  const int out_cols = grad_out.cols;
  Mat<T> grad = sigmoid_output_backward(m.spatial.output, tr.refine.activated, tr.output, grad_out.data,
                                        grads.spatial.output);
  grad = layer_backward(m.spatial.refine, tr.refine, std::move(grad), grads.spatial.refine, true);
  int rows = out_rows;
  int cols = out_cols;
  for (std::size_t i = m.spatial.blocks.size(); i-- > 0;) {
    const bool need = need_input_grad || i > 0;
    Mat<T> dcol = layer_backward(m.spatial.blocks[i], tr.blocks[i], std::move(grad), grads.spatial.blocks[i], need);
    if (!need) return {};
    const Mat<T> dup = col2im3(dcol, m.spatial.blocks[i].conv.in_channels, rows, cols);
    rows = tr.block_rows[i];
    cols = tr.block_cols[i];
    grad = upsample_bicubic_backward(wrap(dup, rows * 2, cols * 2), rows, cols, 2).data;
  }
  if (!need_input_grad) return {};
  return wrap(std::move(grad), rows, cols);
}

template <typename T>
Tensor<T> upsample_spectral(const ModelParams<T>& m, const Tensor<T>& z, SpectralTrace<T>* trace) {
  if (z.channels() != m.arch.msi_bands) {
    throw ShapeError("spectral upsampler expects " + std::to_string(m.arch.msi_bands) + " bands, got " +
                     std::to_string(z.channels()));
  }
  SpectralTrace<T> local;
  SpectralTrace<T>& tr = trace ? *trace : local;
  tr = SpectralTrace<T>{};
  Mat<T> x = z.data;
  for (const auto& layer : m.spectral.hidden) {
    tr.hidden.emplace_back();
    x = layer_forward(layer, std::move(x), tr.hidden.back());
  }
  tr.output = sigmoid_output_forward(m.spectral.output, x);
  tr.input = std::move(x);
  return wrap(trace ? Mat<T>(tr.output) : std::move(tr.output), z.rows, z.cols);
}

template <typename T>
Tensor<T> upsample_spectral_backward(const ModelParams<T>& m, const SpectralTrace<T>& tr, const Tensor<T>& grad_out,
                                     ModelParams<T>& grads, bool need_input_grad) {
  Mat<T> grad = sigmoid_output_backward(m.spectral.output, tr.input, tr.output, grad_out.data, grads.spectral.output);
  for (std::size_t i = m.spectral.hidden.size(); i-- > 0;) {
    const bool need = need_input_grad || i > 0;
    grad = layer_backward(m.spectral.hidden[i], tr.hidden[i], std::move(grad), grads.spectral.hidden[i], need);
    if (!need) return {};
  }
  return wrap(std::move(grad), grad_out.rows, grad_out.cols);
}

template <typename T>
Tensor<T> fuse(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z) {
  const Tensor<T> a = upsample_spatial(m, y);
  const Tensor<T> b = upsample_spectral(m, z);
  if (!a.same_shape(b)) {
    throw ShapeError("fuse: branch outputs disagree " + shape_string(a) + " vs " + shape_string(b));
  }
  return wrap(Mat<T>((a.data + b.data) * T(0.5)), a.rows, a.cols);
}

HsiCube fuse(const ModelParams<float>& m, const HsiCube& y, const HsiCube& z) {
  return to_cube(fuse(m, to_tensor<float>(y), to_tensor<float>(z)), "fused", y.wavelengths_nm());
}

#define CYCFUSE_INSTANTIATE(T)                                                                                      \
  template std::vector<ParamView<T>> parameter_views(ModelParams<T>&);                                              \
  template std::vector<ParamView<const T>> parameter_views(const ModelParams<T>&);                                  \
  template ModelParams<T> init_params<T>(const Architecture&, std::uint64_t);                                       \
  template ModelParams<T> zeros_like(const ModelParams<T>&);                                                        \
  template void inject_degradation(ModelParams<T>&, const PsfKernel&, const SrfMatrix&);                            \
  template Mat<T> softmax_all(const Mat<T>&);                                                                       \
  template Mat<T> softmax_rows(const Mat<T>&);                                                                      \
  template Mat<T> softmax_all_backward(const Mat<T>&, const Mat<T>&);                                               \
  template Mat<T> softmax_rows_backward(const Mat<T>&, const Mat<T>&);                                              \
  template Tensor<T> degrade_spatial(const ModelParams<T>&, const Tensor<T>&);                                      \
  template Tensor<T> degrade_spectral(const ModelParams<T>&, const Tensor<T>&);                                     \
  template Tensor<T> upsample_spatial(const ModelParams<T>&, const Tensor<T>&, SpatialTrace<T>*);                   \
  template Tensor<T> upsample_spectral(const ModelParams<T>&, const Tensor<T>&, SpectralTrace<T>*);                 \
  template Tensor<T> degrade_spatial_backward(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&,            \
                                              ModelParams<T>&, bool);                                               \
  template Tensor<T> degrade_spectral_backward(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                               ModelParams<T>&, bool);                                              \
  template Tensor<T> upsample_spatial_backward(const ModelParams<T>&, const SpatialTrace<T>&, const Tensor<T>&,     \
                                               ModelParams<T>&, bool);                                              \
  template Tensor<T> upsample_spectral_backward(const ModelParams<T>&, const SpectralTrace<T>&, const Tensor<T>&,   \
                                                ModelParams<T>&, bool);                                             \
  template Tensor<T> fuse(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);

CYCFUSE_INSTANTIATE(float)
CYCFUSE_INSTANTIATE(double)
#undef CYCFUSE_INSTANTIATE

template ModelParams<double> cast_params<double, float>(const ModelParams<float>&);
template ModelParams<float> cast_params<float, double>(const ModelParams<double>&);
template ModelParams<float> cast_params<float, float>(const ModelParams<float>&);
template ModelParams<double> cast_params<double, double>(const ModelParams<double>&);

}  // namespace cycfuse
