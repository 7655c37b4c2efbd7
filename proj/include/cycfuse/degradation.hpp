// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

#include "cycfuse/cube.hpp"
#include "cycfuse/tensor.hpp"

namespace cycfuse {

/// Shared S x S blur kernel applied per band with stride S.
/// Non-negative entries summing to one.
class PsfKernel {
 public:
  explicit PsfKernel(Mat<double> weights);

  int scale() const noexcept { return static_cast<int>(weights_.rows()); }
  const Mat<double>& weights() const noexcept { return weights_; }

 private:
  Mat<double> weights_;
};

/// Row-stochastic l x L spectral response: each MSI band is a convex
/// combination of the L hyperspectral bands.
class SrfMatrix {
 public:
  explicit SrfMatrix(Mat<double> weights);

  int msi_bands() const noexcept { return static_cast<int>(weights_.rows()); }
  int hsi_bands() const noexcept { return static_cast<int>(weights_.cols()); }
  const Mat<double>& weights() const noexcept { return weights_; }

 private:
  Mat<double> weights_;
};

inline constexpr double kSimplexTolerance = 1e-6;

// Tensor-level operators. These are the forward functions of the learnable
// degradation modules as well as the simulator.

/// Each output pixel is the kernel-weighted sum of its disjoint S x S block.
template <typename T>
Tensor<T> spatial_degrade(const Tensor<T>& x, const Mat<T>& kernel);

/// Accumulates gradients of a spatial_degrade call. Either output pointer may be null.
template <typename T>
void spatial_degrade_backward(const Tensor<T>& x, const Mat<T>& kernel, const Tensor<T>& grad_out,
                              Tensor<T>* grad_x, Mat<T>* grad_kernel);

/// Per-pixel spectral mixing: out(:, p) = srf * x(:, p).
template <typename T>
Tensor<T> spectral_degrade(const Tensor<T>& x, const Mat<T>& srf);

template <typename T>
void spectral_degrade_backward(const Tensor<T>& x, const Mat<T>& srf, const Tensor<T>& grad_out,
                               Tensor<T>* grad_x, Mat<T>* grad_srf);

// Cube-level operators (32-bit arithmetic).
HsiCube spatial_degrade(const HsiCube& x, const PsfKernel& k);
HsiCube spectral_degrade(const HsiCube& x, const SrfMatrix& r);

PsfKernel make_block_average_kernel(int scale);

/// Reads an l x L response table (one MSI band per row) and normalizes each
/// row to sum to one. An optional first line starting with '#' is skipped.
SrfMatrix load_srf_csv(const std::filesystem::path& path);
void save_srf_csv(const SrfMatrix& r, const std::filesystem::path& path);

/// Same CSV layout for an S x S kernel; normalized by its grand total.
PsfKernel load_psf_csv(const std::filesystem::path& path);
void save_psf_csv(const PsfKernel& k, const std::filesystem::path& path);

struct SimulatedPair {
  HsiCube lr_hsi;
  HsiCube hr_msi;
};

/// Produces (LrHSI, HrMSI) from a reference HrHSI. When `noise_snr_db` is
/// set, white Gaussian noise is added to each output with
/// sigma^2 = mean(signal^2) / 10^(snr/10), drawn from streams derived from
/// `seed`; outputs are then clamped into [0,1].
SimulatedPair simulate_pair(const HsiCube& x, const PsfKernel& k, const SrfMatrix& r,
                            std::optional<double> noise_snr_db = std::nullopt, std::uint64_t seed = 0);

/// Noise added by simulate_pair before clamping, exposed for SNR checks.
Tensor<double> awgn_noise(const Tensor<double>& signal, double snr_db, std::uint64_t seed);

}  // namespace cycfuse
