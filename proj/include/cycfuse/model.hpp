// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cycfuse/degradation.hpp"
#include "cycfuse/tensor.hpp"

namespace cycfuse {

/// Convolution with square kernel (1 or 3), stride 1 and zero padding k/2.
/// Weight columns are ordered (in_channel, ky, kx).
template <typename T>
struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_size = 1;
  Mat<T> weight;
  Vec<T> bias;
};

/// Per-channel affine applied after standardizing each channel over its pixels.
template <typename T>
struct InstanceNorm {
  Vec<T> scale;
  Vec<T> shift;
};

inline constexpr double kInstanceNormEps = 1e-5;

/// conv -> instance norm -> ReLU
template <typename T>
struct ConvNormLayer {
  Conv2d<T> conv;
  InstanceNorm<T> norm;
};

/// LrHSI -> HrHSI: one [x2 bicubic, 3x3 conv layer] block per octave of the
/// scale ratio, then a 1x1 refining layer and a 1x1 sigmoid output layer.
template <typename T>
struct SpatialUpsampler {
  std::vector<ConvNormLayer<T>> blocks;
  ConvNormLayer<T> refine;
  Conv2d<T> output;
};

/// HrMSI -> HrHSI: pointwise hidden layers then a pointwise sigmoid output.
template <typename T>
struct SpectralUpsampler {
  std::vector<ConvNormLayer<T>> hidden;
  Conv2d<T> output;
};

enum class LogitInit { kaiming, uniform };

struct Architecture {
  int hsi_bands = 0;
  int msi_bands = 0;
  int scale = 0;
  /// Hidden widths. The spectral upsampler uses all of them; interpolation
  /// block i of the spatial upsampler uses widths[min(i, n-1)] and the
  /// refining layer uses widths.back().
  std::vector<int> widths{32, 64, 128, 128, 128};
  LogitInit logit_init = LogitInit::kaiming;

  int num_interp_blocks() const;
  int block_width(int i) const { return widths[std::min<std::size_t>(i, widths.size() - 1)]; }
  void validate() const;
};

template <typename T>
struct ModelParams {
  Architecture arch;
  Mat<T> psf_logits;  // S x S
  Mat<T> srf_logits;  // l x L
  SpatialUpsampler<T> spatial;
  SpectralUpsampler<T> spectral;
  bool frozen_degradation = false;
};

enum class ParamGroup { degradation, spatial_upsampler, spectral_upsampler };

template <typename T>
struct ParamView {
  std::string name;
  ParamGroup group;
  std::vector<int> shape;
  std::span<T> values;
};

/// Every parameter tensor in checkpoint order.
template <typename T>
std::vector<ParamView<T>> parameter_views(ModelParams<T>& m);
template <typename T>
std::vector<ParamView<const T>> parameter_views(const ModelParams<T>& m);

/// Conv weights and logits Kaiming-normal (fan-in, ReLU gain), biases zero,
/// norm scale one / shift zero. Each group draws from its own derived stream.
template <typename T>
ModelParams<T> init_params(const Architecture& arch, std::uint64_t seed);

template <typename T>
ModelParams<T> zeros_like(const ModelParams<T>& m);

template <typename U, typename T>
ModelParams<U> cast_params(const ModelParams<T>& m);

/// Fixes the degradation logits to log(max(w, 1e-12)) of known operators and
/// freezes them.
template <typename T>
void inject_degradation(ModelParams<T>& m, const PsfKernel& k, const SrfMatrix& r);

// Simplex parameterizations.
template <typename T>
Mat<T> softmax_all(const Mat<T>& logits);
template <typename T>
Mat<T> softmax_rows(const Mat<T>& logits);
/// Pulls a gradient w.r.t. softmax outputs back to the logits.
template <typename T>
Mat<T> softmax_all_backward(const Mat<T>& probs, const Mat<T>& grad_probs);
template <typename T>
Mat<T> softmax_rows_backward(const Mat<T>& probs, const Mat<T>& grad_probs);

PsfKernel psf_kernel(const Mat<double>& logits);
SrfMatrix srf_matrix(const Mat<double>& logits);

template <typename T>
struct LayerTrace {
  Mat<T> columns;     // conv input (im2col'ed for 3x3)
  Mat<T> normalized;  // standardized conv output
  Vec<T> inv_std;
  Mat<T> activated;   // ReLU output
};

template <typename T>
struct SpatialTrace {
  std::vector<int> block_rows;  // input size of each interpolation step
  std::vector<int> block_cols;
  std::vector<LayerTrace<T>> blocks;
  LayerTrace<T> refine;
  Mat<T> output;  // sigmoid values
};

template <typename T>
struct SpectralTrace {
  std::vector<LayerTrace<T>> hidden;
  Mat<T> input;
  Mat<T> output;
};

// The four transformation modules. Upsamplers optionally record a trace for
// the matching backward call; backward calls accumulate into `grads` and
// return the input gradient when requested (an empty tensor otherwise).

template <typename T>
Tensor<T> degrade_spatial(const ModelParams<T>& m, const Tensor<T>& x);
template <typename T>
Tensor<T> degrade_spectral(const ModelParams<T>& m, const Tensor<T>& x);
template <typename T>
Tensor<T> upsample_spatial(const ModelParams<T>& m, const Tensor<T>& y, SpatialTrace<T>* trace = nullptr);
template <typename T>
Tensor<T> upsample_spectral(const ModelParams<T>& m, const Tensor<T>& z, SpectralTrace<T>* trace = nullptr);

template <typename T>
Tensor<T> degrade_spatial_backward(const ModelParams<T>& m, const Tensor<T>& x, const Tensor<T>& grad_out,
                                   ModelParams<T>& grads, bool need_input_grad);
template <typename T>
Tensor<T> degrade_spectral_backward(const ModelParams<T>& m, const Tensor<T>& x, const Tensor<T>& grad_out,
                                    ModelParams<T>& grads, bool need_input_grad);
template <typename T>
Tensor<T> upsample_spatial_backward(const ModelParams<T>& m, const SpatialTrace<T>& trace, const Tensor<T>& grad_out,
                                    ModelParams<T>& grads, bool need_input_grad);
template <typename T>
Tensor<T> upsample_spectral_backward(const ModelParams<T>& m, const SpectralTrace<T>& trace,
                                     const Tensor<T>& grad_out, ModelParams<T>& grads, bool need_input_grad);

/// Mean of the two super-resolution branches.
template <typename T>
Tensor<T> fuse(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z);
HsiCube fuse(const ModelParams<float>& m, const HsiCube& y, const HsiCube& z);

}  // namespace cycfuse
