// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "cycfuse/error.hpp"

namespace cycfuse {

using nlohmann::json;

namespace {

constexpr int kSsimWindow = 11;
constexpr double kSsimSigma = 1.5;
constexpr double kSsimK1 = 0.01;
constexpr double kSsimK2 = 0.03;
constexpr double kNormFloor = 1e-8;

void require_same(const HsiCube& gt, const HsiCube& est, const char* what) {
  if (!gt.same_shape(est)) {
    throw ShapeError(std::string(what) + ": cube shapes differ (" + std::to_string(gt.bands()) + "," +
                     std::to_string(gt.rows()) + "," + std::to_string(gt.cols()) + ") vs (" +
                     std::to_string(est.bands()) + "," + std::to_string(est.rows()) + "," +
                     std::to_string(est.cols()) + ")");
  }
}

std::vector<double> gaussian_window() {
  std::vector<double> w(kSsimWindow);
  double total = 0.0;
  for (int i = 0; i < kSsimWindow; ++i) {
    const double d = i - kSsimWindow / 2;
    w[i] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
    total += w[i];
  }
  for (double& v : w) v /= total;
  return w;
}

/// Separable "valid" filtering: output is (rows-10) x (cols-10).
std::vector<double> filter_valid(const std::vector<double>& img, int rows, int cols, const std::vector<double>& w) {
  const int out_rows = rows - kSsimWindow + 1;
  const int out_cols = cols - kSsimWindow + 1;
  std::vector<double> horiz(static_cast<std::size_t>(rows) * out_cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) acc += w[k] * img[static_cast<std::size_t>(r) * cols + c + k];
      horiz[static_cast<std::size_t>(r) * out_cols + c] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(out_rows) * out_cols);
  for (int r = 0; r < out_rows; ++r) {
    for (int c = 0; c < out_cols; ++c) {
      double acc = 0.0;
      for (int k = 0; k < kSsimWindow; ++k) acc += w[k] * horiz[static_cast<std::size_t>(r + k) * out_cols + c];
      out[static_cast<std::size_t>(r) * out_cols + c] = acc;
    }
  }
  return out;
}

double band_ssim(std::span<const float> a, std::span<const float> b, int rows, int cols, const std::vector<double>& w) {
  const std::size_t n = a.size();
  std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = kPeak8Bit * a[i];
    y[i] = kPeak8Bit * b[i];
    xx[i] = x[i] * x[i];
    yy[i] = y[i] * y[i];
    xy[i] = x[i] * y[i];
  }
  const auto mu_x = filter_valid(x, rows, cols, w);
  const auto mu_y = filter_valid(y, rows, cols, w);
  const auto e_xx = filter_valid(xx, rows, cols, w);
  const auto e_yy = filter_valid(yy, rows, cols, w);
  const auto e_xy = filter_valid(xy, rows, cols, w);
  const double c1 = std::pow(kSsimK1 * kPeak8Bit, 2);
  const double c2 = std::pow(kSsimK2 * kPeak8Bit, 2);
  double total = 0.0;
  for (std::size_t i = 0; i < mu_x.size(); ++i) {
    const double mx = mu_x[i];
    const double my = mu_y[i];
    const double vx = e_xx[i] - mx * mx;
    const double vy = e_yy[i] - my * my;
    const double cov = e_xy[i] - mx * my;
    total += ((2 * mx * my + c1) * (2 * cov + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
  }
  return total / static_cast<double>(mu_x.size());
}

json number_or_inf(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  return json(v);
}

double read_number(const json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("metrics report: missing '") + key + "'");
  const auto& v = j[key];
  if (v.is_string()) {
    if (v == "inf") return std::numeric_limits<double>::infinity();
    if (v == "-inf") return -std::numeric_limits<double>::infinity();
    throw FormatError(std::string("metrics report: bad value for '") + key + "'");
  }
  if (!v.is_number()) throw FormatError(std::string("metrics report: '") + key + "' is not a number");
  return v.get<double>();
}

}  // namespace

std::vector<double> rmse_per_band(const HsiCube& gt, const HsiCube& est) {
  require_same(gt, est, "rmse_per_band");
  std::vector<double> out(gt.bands());
  for (int b = 0; b < gt.bands(); ++b) {
    const auto g = gt.band(b);
    const auto e = est.band(b);
    double sq = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = kPeak8Bit * static_cast<double>(g[i]) - kPeak8Bit * static_cast<double>(e[i]);
      sq += d * d;
    }
    out[b] = std::sqrt(sq / static_cast<double>(g.size()));
  }
  return out;
}

double psnr(const HsiCube& gt, const HsiCube& est) {
  const auto rmse = rmse_per_band(gt, est);
  double total = 0.0;
  for (double r : rmse) {
    if (r == 0.0) return std::numeric_limits<double>::infinity();
    total += 20.0 * std::log10(kPeak8Bit / r);
  }
  return total / static_cast<double>(rmse.size());
}

double sam(const HsiCube& gt, const HsiCube& est) {
  require_same(gt, est, "sam");
  const std::size_t pixels = gt.pixels();
  const auto g = gt.data();
  const auto e = est.data();
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t p = 0; p < pixels; ++p) {
    double ng = 0.0, ne = 0.0;
    for (int b = 0; b < gt.bands(); ++b) {
      const double gv = g[b * pixels + p];
      const double ev = e[b * pixels + p];
      ng += gv * gv;
      ne += ev * ev;
    }
    ng = std::sqrt(ng);
    ne = std::sqrt(ne);
    if (ng < kNormFloor || ne < kNormFloor) continue;
    // 2 atan2(|u - v|, |u + v|) on unit vectors stays accurate for nearly
    // parallel spectra, where acos of the cosine loses half the digits.
    double diff = 0.0, sum = 0.0;
    for (int b = 0; b < gt.bands(); ++b) {
      const double u = g[b * pixels + p] / ng;
      const double v = e[b * pixels + p] / ne;
      diff += (u - v) * (u - v);
      sum += (u + v) * (u + v);
    }
    total += 2.0 * std::atan2(std::sqrt(diff), std::sqrt(sum));
    ++counted;
  }
  if (counted == 0) throw UndefinedMetricError("sam: every pixel has a zero spectrum");
  return total / static_cast<double>(counted) * 180.0 / std::numbers::pi;
}

double ergas(const HsiCube& gt, const HsiCube& est, int scale) {
  if (scale <= 0) throw ArgumentError("ergas: scale must be positive");
  const auto rmse = rmse_per_band(gt, est);
  double acc = 0.0;
  for (int b = 0; b < gt.bands(); ++b) {
    double mean = 0.0;
    for (float v : gt.band(b)) mean += kPeak8Bit * static_cast<double>(v);
    mean /= static_cast<double>(gt.pixels());
    if (mean < kNormFloor) throw UndefinedMetricError("ergas: ground-truth band " + std::to_string(b) + " has zero mean");
    acc += (rmse[b] / mean) * (rmse[b] / mean);
  }
  return 100.0 / scale * std::sqrt(acc / gt.bands());
}

double ssim(const HsiCube& gt, const HsiCube& est) {
  require_same(gt, est, "ssim");
  if (gt.rows() < kSsimWindow || gt.cols() < kSsimWindow) {
    throw ArgumentError("ssim: spatial size must be at least 11x11");
  }
  const auto w = gaussian_window();
  double total = 0.0;
  for (int b = 0; b < gt.bands(); ++b) total += band_ssim(gt.band(b), est.band(b), gt.rows(), gt.cols(), w);
  return total / gt.bands();
}

MetricsReport evaluate(const HsiCube& gt, const HsiCube& est, int scale) {
  MetricsReport r;
  r.rmse_per_band = rmse_per_band(gt, est);
  r.psnr_db = psnr(gt, est);
  r.sam_deg = sam(gt, est);
  r.ergas = ergas(gt, est, scale);
  r.ssim = ssim(gt, est);
  return r;
}

json to_json(const MetricsReport& report) {
  json j;
  j["psnr_db"] = number_or_inf(report.psnr_db);
  j["sam_deg"] = number_or_inf(report.sam_deg);
  j["ergas"] = number_or_inf(report.ergas);
  j["ssim"] = number_or_inf(report.ssim);
  j["rmse_per_band"] = report.rmse_per_band;
  return j;
}

MetricsReport report_from_json(const json& j) {
  MetricsReport r;
  r.psnr_db = read_number(j, "psnr_db");
  r.sam_deg = read_number(j, "sam_deg");
  r.ergas = read_number(j, "ergas");
  r.ssim = read_number(j, "ssim");
  if (!j.contains("rmse_per_band") || !j["rmse_per_band"].is_array()) {
    throw FormatError("metrics report: missing 'rmse_per_band'");
  }
  r.rmse_per_band = j["rmse_per_band"].get<std::vector<double>>();
  return r;
}

void write_report(const MetricsReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(report).dump(2) << '\n';
}

MetricsReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return report_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw FormatError("corrupt metrics report " + path.string() + ": " + e.what());
  }
}

std::string summary_line(const MetricsReport& report) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4);
  s << "PSNR=" << report.psnr_db << " SAM=" << report.sam_deg << " ERGAS=" << report.ergas << " SSIM=" << report.ssim;
  return s.str();
}

}  // namespace cycfuse
