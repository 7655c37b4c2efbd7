// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "cycfuse/cube.hpp"
#include "cycfuse/degradation.hpp"

namespace cycfuse {

/// Smooth test scene: Gaussian blobs, each carrying its own smooth random
/// spectrum, over a spectrally flat-ish background.
struct BlobSceneSpec {
  int bands = 16;
  int rows = 64;
  int cols = 64;
  int blobs = 24;
  double min_sigma_px = 3.0;
  double max_sigma_px = 10.0;
  double first_wavelength_nm = 400.0;
  double last_wavelength_nm = 700.0;
};

HsiCube make_blob_scene(const BlobSceneSpec& spec, std::uint64_t seed);

/// Broad Gaussian responses with evenly spaced centers, rows summing to one.
SrfMatrix make_gaussian_srf(int msi_bands, int hsi_bands);

}  // namespace cycfuse
