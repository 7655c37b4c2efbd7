// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cycfuse/cube.hpp"
#include "cycfuse/tensor.hpp"

namespace cycfuse {

/// Cubic convolution kernel with free parameter a (a = -0.5 is Catmull-Rom).
double cubic_weight(double x, double a = -0.5);

/// Folds an out-of-range sample index back into [0, n) by mirroring about the
/// outer pixel edges: -1 -> 0, -2 -> 1, n -> n-1.
int reflect_index(int i, int n);

/// 1-D resampling operator of shape (n*factor) x n using half-pixel centers:
/// output sample o reads source position (o + 0.5)/factor - 0.5.
template <typename T>
Mat<T> bicubic_matrix(int n, int factor);

/// Separable bicubic upsampling of every channel by an integer factor.
template <typename T>
Tensor<T> upsample_bicubic(const Tensor<T>& x, int factor);

/// Adjoint of upsample_bicubic, used for backpropagation.
template <typename T>
Tensor<T> upsample_bicubic_backward(const Tensor<T>& grad_out, int in_rows, int in_cols, int factor);

/// Band-wise bicubic upsampling of a cube, clamped into [0,1]. This is the
/// interpolation baseline fused results are compared against.
HsiCube bicubic_baseline(const HsiCube& lr_hsi, int factor);

}  // namespace cycfuse
