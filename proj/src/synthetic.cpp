// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "cycfuse/error.hpp"
#include "cycfuse/rng.hpp"

namespace cycfuse {

namespace {

std::vector<double> smooth_spectrum(int bands, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> s(bands, 0.1 + 0.2 * unit(rng));
  const int bumps = 1 + static_cast<int>(unit(rng) * 3.0);
  for (int k = 0; k < bumps; ++k) {
    const double center = unit(rng) * (bands - 1);
    const double width = 1.5 + unit(rng) * bands / 3.0;
    const double amp = 0.3 + 0.7 * unit(rng);
    for (int b = 0; b < bands; ++b) {
      const double d = (b - center) / width;
      s[b] += amp * std::exp(-0.5 * d * d);
    }
  }
  const double peak = *std::max_element(s.begin(), s.end());
  for (double& v : s) v /= peak;
  return s;
}

}  // namespace

HsiCube make_blob_scene(const BlobSceneSpec& spec, std::uint64_t seed) {
  if (spec.bands < 1 || spec.rows < 1 || spec.cols < 1 || spec.blobs < 0) {
    throw ArgumentError("blob scene: dimensions must be positive");
  }
  Rng rng(derive_seed(seed, "scene"));
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const std::size_t pixels = static_cast<std::size_t>(spec.rows) * spec.cols;
  std::vector<double> cube(static_cast<std::size_t>(spec.bands) * pixels, 0.0);

  const auto background = smooth_spectrum(spec.bands, rng);
  for (int b = 0; b < spec.bands; ++b) {
    for (std::size_t p = 0; p < pixels; ++p) cube[b * pixels + p] = 0.15 * background[b];
  }

  for (int k = 0; k < spec.blobs; ++k) {
    const auto spectrum = smooth_spectrum(spec.bands, rng);
    const double cy = unit(rng) * spec.rows;
    const double cx = unit(rng) * spec.cols;
    const double sigma = spec.min_sigma_px + unit(rng) * (spec.max_sigma_px - spec.min_sigma_px);
    const double amp = 0.4 + 0.6 * unit(rng);
    for (int r = 0; r < spec.rows; ++r) {
      for (int c = 0; c < spec.cols; ++c) {
        const double d2 = ((r + 0.5 - cy) * (r + 0.5 - cy) + (c + 0.5 - cx) * (c + 0.5 - cx)) / (sigma * sigma);
        const double a = amp * std::exp(-0.5 * d2);
        if (a < 1e-6) continue;
        const std::size_t p = static_cast<std::size_t>(r) * spec.cols + c;
        for (int b = 0; b < spec.bands; ++b) cube[b * pixels + p] += a * spectrum[b];
      }
    }
  }

  const double peak = *std::max_element(cube.begin(), cube.end());
  const double gain = peak > 0.0 ? 0.9 / peak : 1.0;
  std::vector<float> data(cube.size());
  for (std::size_t i = 0; i < cube.size(); ++i) data[i] = static_cast<float>(std::clamp(cube[i] * gain, 0.0, 1.0));

  std::vector<double> wavelengths(spec.bands);
  for (int b = 0; b < spec.bands; ++b) {
    wavelengths[b] = spec.bands == 1 ? spec.first_wavelength_nm
                                     : spec.first_wavelength_nm + (spec.last_wavelength_nm - spec.first_wavelength_nm) *
                                                                      b / (spec.bands - 1);
  }
  return HsiCube(spec.bands, spec.rows, spec.cols, std::move(data), std::move(wavelengths), "blob_scene");
}

SrfMatrix make_gaussian_srf(int msi_bands, int hsi_bands) {
  if (msi_bands < 1 || hsi_bands < 1) throw ArgumentError("gaussian SRF: band counts must be positive");
  Mat<double> w(msi_bands, hsi_bands);
  const double spacing = static_cast<double>(hsi_bands) / msi_bands;
  const double sigma = 0.75 * spacing;
  for (int i = 0; i < msi_bands; ++i) {
    const double center = (i + 0.5) * spacing - 0.5;
    for (int j = 0; j < hsi_bands; ++j) {
      const double d = (j - center) / sigma;
      w(i, j) = std::exp(-0.5 * d * d);
    }
    w.row(i) /= w.row(i).sum();
  }
  return SrfMatrix(std::move(w));
}

}  // namespace cycfuse
