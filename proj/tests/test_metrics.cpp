// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <limits>

#include "cycfuse/error.hpp"
#include "cycfuse/metrics.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace cycfuse;
using namespace cycfuse::testing;

namespace {

HsiCube map_values(const HsiCube& c, const std::function<float(float)>& f) {
  std::vector<float> v(c.data().begin(), c.data().end());
  for (auto& x : v) x = f(x);
  return HsiCube(c.bands(), c.rows(), c.cols(), v);
}

// Every pixel carries the spectrum (a0, a1).
HsiCube two_band_pixels(float a0, float a1, int rows, int cols) {
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  std::vector<float> g(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    g[i] = a0;
    g[n + i] = a1;
  }
  return HsiCube(2, rows, cols, g);
}

HsiCube pattern_32() {
  std::vector<float> v(32 * 32);
  for (int r = 0; r < 32; ++r)
    for (int c = 0; c < 32; ++c) v[r * 32 + c] = 0.5f + 0.45f * std::sin(0.9f * r) * std::cos(0.7f * c);
  return HsiCube(1, 32, 32, v);
}

}  // namespace

TEST_CASE("rmse_per_band examples") {
  HsiCube g = random_cube(3, 8, 8, 1);
  for (double r : rmse_per_band(g, g)) CHECK(r == 0.0);
  auto r = rmse_per_band(HsiCube::filled(4, 5, 5, 0.5f), HsiCube::filled(4, 5, 5, 0.6f));
  for (double v : r) CHECK(v == doctest::Approx(25.5).epsilon(1e-6));
  CHECK_THROWS_AS(rmse_per_band(g, random_cube(3, 8, 7, 1)), ShapeError);

  // Permuting bands of both cubes permutes the output.
  HsiCube e = random_cube(3, 8, 8, 2);
  auto swap01 = [](const HsiCube& c) {
    std::vector<float> v;
    for (int b : {1, 0, 2}) {
      auto band = c.band(b);
      v.insert(v.end(), band.begin(), band.end());
    }
    return HsiCube(3, c.rows(), c.cols(), v);
  };
  auto base = rmse_per_band(g, e);
  auto perm = rmse_per_band(swap01(g), swap01(e));
  CHECK(perm[0] == base[1]);
  CHECK(perm[1] == base[0]);
  CHECK(perm[2] == base[2]);
}

TEST_CASE("psnr examples") {
  HsiCube g = random_cube(2, 6, 6, 3);
  CHECK(psnr(g, g) == std::numeric_limits<double>::infinity());
  CHECK(psnr(HsiCube::filled(1, 4, 4, 0.5f), HsiCube::filled(1, 4, 4, 0.6f)) == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(psnr(HsiCube::filled(2, 4, 4, 0.0f), HsiCube::filled(2, 4, 4, 1.0f)) == doctest::Approx(0.0));
}

TEST_CASE("psnr decreases as perturbation grows") {
  HsiCube g = random_cube(4, 16, 16, 4, 0.3f, 0.7f);
  HsiCube noise = random_cube(4, 16, 16, 5);
  double prev = std::numeric_limits<double>::infinity();
  for (float a : {0.005f, 0.01f, 0.02f, 0.05f, 0.1f, 0.2f}) {
    std::vector<float> v(g.data().size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = g.data()[i] + a * (noise.data()[i] - 0.5f);
    const double p = psnr(g, HsiCube(4, 16, 16, v));
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("sam examples") {
  HsiCube g = random_cube(5, 4, 4, 6, 0.1f, 1.0f);
  CHECK(sam(g, g) == doctest::Approx(0.0).epsilon(1e-6));
  HsiCube a = two_band_pixels(1, 0, 3, 3);
  HsiCube b = two_band_pixels(0, 1, 3, 3);
  HsiCube c = two_band_pixels(1, 1, 3, 3);
  CHECK(sam(a, b) == doctest::Approx(90.0));
  CHECK(sam(a, c) == doctest::Approx(45.0));
  CHECK(sam(c, a) == sam(a, c));
  CHECK_THROWS_AS(sam(HsiCube::filled(2, 3, 3, 0.0f), a), UndefinedMetricError);

  // Zero-spectrum pixels are left out of the mean.
  std::vector<float> v(a.data().begin(), a.data().end());
  v[0] = 0.0f;
  CHECK(sam(HsiCube(2, 3, 3, v), b) == doctest::Approx(90.0));
}

TEST_CASE("sam of collinear spectra is zero") {
  // Rounding near cos = 1 must not leak into the angle.
  HsiCube g = random_cube(1, 20, 20, 10, 0.02f, 1.0f);
  HsiCube e = random_cube(1, 20, 20, 11, 0.02f, 1.0f);
  CHECK(sam(g, e) == 0.0);
  HsiCube m = random_cube(8, 20, 20, 12, 0.02f, 1.0f);
  CHECK(sam(m, map_values(m, [](float x) { return 0.5f * x; })) < 1e-9);
}

TEST_CASE("ergas examples") {
  HsiCube g = random_cube(3, 6, 6, 7, 0.1f, 0.9f);
  CHECK(ergas(g, g, 8) == 0.0);
  // mean 127.5, rmse 12.75 -> (100/32) * 0.1
  std::vector<float> gv(16), ev(16);
  for (int i = 0; i < 16; ++i) {
    gv[i] = i % 2 ? 0.25f : 0.75f;
    ev[i] = gv[i] + 0.05f;
  }
  CHECK(ergas(HsiCube(1, 4, 4, gv), HsiCube(1, 4, 4, ev), 32) == doctest::Approx(0.3125).epsilon(1e-5));

  HsiCube e = random_cube(3, 6, 6, 8, 0.1f, 0.9f);
  auto half = [](float x) { return 0.5f * x; };
  CHECK(ergas(map_values(g, half), map_values(e, half), 8) == doctest::Approx(ergas(g, e, 8)).epsilon(1e-6));
  CHECK_THROWS_AS(ergas(HsiCube::filled(1, 4, 4, 0.0f), HsiCube::filled(1, 4, 4, 0.1f), 8),
                  UndefinedMetricError);
}

TEST_CASE("ssim examples") {
  HsiCube p = pattern_32();
  CHECK(ssim(p, p) == doctest::Approx(1.0).epsilon(1e-12));
  auto inv = map_values(p, [](float x) { return 1.0f - x; });
  CHECK(ssim(p, inv) < 0.5);
  CHECK(ssim(p, inv) == doctest::Approx(oracle::ssim(p, inv)).epsilon(1e-9));

  auto dim = map_values(p, [](float x) { return 0.8f * x; });
  auto shifted = map_values(dim, [](float x) { return x + 0.1f; });
  CHECK(ssim(shifted, shifted) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ssim(dim, dim) - ssim(shifted, shifted)) < 1e-6);

  CHECK_THROWS_AS(ssim(random_cube(1, 10, 20, 1), random_cube(1, 10, 20, 2)), ArgumentError);
}

TEST_CASE("evaluate agrees with the oracles") {
  for (int t = 0; t < 3; ++t) {
    HsiCube g = random_cube(16, 32, 32, 50 + t, 0.05f, 0.95f);
    HsiCube e = random_cube(16, 32, 32, 80 + t, 0.05f, 0.95f);
    MetricsReport r = evaluate(g, e, 8);
    CHECK(std::abs(r.psnr_db - oracle::psnr(g, e)) < 1e-6);
    CHECK(std::abs(r.sam_deg - oracle::sam(g, e)) < 1e-6);
    CHECK(std::abs(r.ergas - oracle::ergas(g, e, 8)) < 1e-6);
    CHECK(std::abs(r.ssim - oracle::ssim(g, e)) < 1e-6);
    auto ref = oracle::rmse(g, e);
    for (int b = 0; b < 16; ++b) CHECK(std::abs(r.rmse_per_band[b] - ref[b]) < 1e-6);
    CHECK(r.psnr_db == psnr(g, e));
    CHECK(r.ssim == ssim(g, e));
  }
}

TEST_CASE("ideal estimate gives the ideal row") {
  HsiCube g = random_cube(4, 16, 16, 9, 0.1f, 0.9f);
  MetricsReport r = evaluate(g, g, 4);
  CHECK(std::isinf(r.psnr_db));
  CHECK(r.sam_deg == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(r.ergas == 0.0);
  CHECK(r.ssim == doctest::Approx(1.0));
  for (double v : r.rmse_per_band) CHECK(v == 0.0);
}

TEST_CASE("report JSON round trip and summary line") {
  MetricsReport r;
  r.psnr_db = std::numeric_limits<double>::infinity();
  r.sam_deg = 0.0;
  r.ergas = 0.0;
  r.ssim = 1.0;
  r.rmse_per_band = {0.0, 0.0};
  auto j = to_json(r);
  CHECK(j["psnr_db"] == "inf");
  MetricsReport back = report_from_json(j);
  CHECK(std::isinf(back.psnr_db));
  CHECK(back.rmse_per_band == r.rmse_per_band);
  CHECK(summary_line(r) == "PSNR=inf SAM=0.0000 ERGAS=0.0000 SSIM=1.0000");

  auto dir = scratch_dir("metrics");
  MetricsReport e = evaluate(random_cube(2, 12, 12, 1), random_cube(2, 12, 12, 2), 4);
  write_report(e, dir / "r.json");
  MetricsReport read = read_report(dir / "r.json");
  CHECK(read.psnr_db == e.psnr_db);
  CHECK(read.rmse_per_band == e.rmse_per_band);
  write_report(e, dir / "r2.json");
  CHECK(read_file(dir / "r.json") == read_file(dir / "r2.json"));
}
