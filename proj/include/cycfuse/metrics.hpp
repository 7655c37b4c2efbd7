// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "cycfuse/cube.hpp"

namespace cycfuse {

/// Quality of an estimate against ground truth, all on the 8-bit scale
/// (values multiplied by 255). Ideal values: psnr +inf, sam 0, ergas 0, ssim 1.
struct MetricsReport {
  double psnr_db = 0.0;
  double sam_deg = 0.0;
  double ergas = 0.0;
  double ssim = 0.0;
  std::vector<double> rmse_per_band;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

inline constexpr double kPeak8Bit = 255.0;

std::vector<double> rmse_per_band(const HsiCube& gt, const HsiCube& est);

/// Mean over bands of 20 log10(255 / rmse_b); +inf if any band is exact.
double psnr(const HsiCube& gt, const HsiCube& est);

/// Mean spectral angle in degrees over pixels where both spectra have norm
/// >= 1e-8. Throws UndefinedMetricError when no pixel qualifies.
double sam(const HsiCube& gt, const HsiCube& est);

/// (100/S) sqrt(mean_b (rmse_b / mean_b)^2), mean_b taken over gt band b.
double ergas(const HsiCube& gt, const HsiCube& est, int scale);

/// Mean SSIM over bands; 11x11 Gaussian window (sigma 1.5), K1 0.01,
/// K2 0.03, dynamic range 255, averaged over all fully-inside windows.
double ssim(const HsiCube& gt, const HsiCube& est);

MetricsReport evaluate(const HsiCube& gt, const HsiCube& est, int scale);

/// {psnr_db, sam_deg, ergas, ssim, rmse_per_band}; infinities as "inf".
nlohmann::json to_json(const MetricsReport& report);
MetricsReport report_from_json(const nlohmann::json& j);

void write_report(const MetricsReport& report, const std::filesystem::path& path);
MetricsReport read_report(const std::filesystem::path& path);

/// "PSNR=... SAM=... ERGAS=... SSIM=..."
std::string summary_line(const MetricsReport& report);

}  // namespace cycfuse
