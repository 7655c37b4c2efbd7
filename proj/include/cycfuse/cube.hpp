// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cycfuse {

/// A radiance cube laid out band-major: index = band*rows*cols + row*cols + col.
/// All values lie in [0,1]; the constructor enforces this together with the
/// shape and wavelength invariants, so a constructed cube is always valid.
class HsiCube {
 public:
  HsiCube(int bands, int rows, int cols, std::vector<float> data,
          std::optional<std::vector<double>> wavelengths_nm = std::nullopt,
          std::string name = {});

  static HsiCube filled(int bands, int rows, int cols, float value, std::string name = {});

  int bands() const noexcept { return bands_; }
  int rows() const noexcept { return rows_; }
  int cols() const noexcept { return cols_; }
  std::size_t pixels() const noexcept { return static_cast<std::size_t>(rows_) * cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  float at(int band, int row, int col) const {
    return data_[static_cast<std::size_t>(band) * pixels() + static_cast<std::size_t>(row) * cols_ + col];
  }
  std::span<const float> data() const noexcept { return data_; }
  std::span<const float> band(int b) const;

  const std::optional<std::vector<double>>& wavelengths_nm() const noexcept { return wavelengths_nm_; }
  const std::string& name() const noexcept { return name_; }

  bool same_shape(const HsiCube& other) const noexcept {
    return bands_ == other.bands_ && rows_ == other.rows_ && cols_ == other.cols_;
  }

  friend bool operator==(const HsiCube&, const HsiCube&) = default;

 private:
  int bands_;
  int rows_;
  int cols_;
  std::vector<float> data_;
  std::optional<std::vector<double>> wavelengths_nm_;
  std::string name_;
};

/// Reads `<name>.hsc.json` and its sibling payload. Headers may carry
/// `"normalized": false`, in which case the payload is min-max scaled into
/// [0,1] and the applied range is appended to the cube name as
/// `|minmax=<min>,<max>`. Otherwise values are clamped into [0,1].
HsiCube load_cube(const std::filesystem::path& header_path);

/// Writes header + payload. A path without the `.hsc.json` suffix gets it
/// appended. Output bytes depend only on the cube contents.
void save_cube(const HsiCube& cube, const std::filesystem::path& header_path);

/// Header path actually used by save_cube for `path`.
std::filesystem::path cube_header_path(const std::filesystem::path& path);

/// Writes band `band` as a binary PGM (P5, maxval 255), pixel = round(255 v),
/// rounding half away from zero.
void export_band_image(const HsiCube& cube, int band, const std::filesystem::path& path);

/// 8-bit quantization used by export_band_image.
unsigned char to_8bit(float v);

}  // namespace cycfuse
