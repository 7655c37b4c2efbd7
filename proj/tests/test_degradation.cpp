// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <fstream>
#include <algorithm>
#include <numeric>

#include "cycfuse/degradation.hpp"
#include "cycfuse/error.hpp"
#include "cycfuse/rng.hpp"
#include "support.hpp"

using namespace cycfuse;
using namespace cycfuse::testing;

namespace {

HsiCube ramp_4x4() {
  std::vector<float> v(16);
  for (int i = 0; i < 16; ++i) v[i] = static_cast<float>(i + 1) / 16.0f;
  return HsiCube(1, 4, 4, v);
}

HsiCube permute_bands(const HsiCube& c, const std::vector<int>& perm) {
  std::vector<float> v;
  for (int b : perm) {
    auto band = c.band(b);
    v.insert(v.end(), band.begin(), band.end());
  }
  return HsiCube(c.bands(), c.rows(), c.cols(), v);
}

}  // namespace

TEST_CASE("operator types validate their simplex constraints") {
  CHECK_NOTHROW(PsfKernel(Mat<double>::Constant(2, 2, 0.25)));
  CHECK_THROWS_AS(PsfKernel(Mat<double>::Constant(2, 2, 0.3)), DataError);
  Mat<double> neg(1, 2);
  neg << 1.5, -0.5;
  CHECK_THROWS_AS(SrfMatrix{neg}, DataError);
  CHECK_THROWS_AS(PsfKernel(Mat<double>::Constant(2, 3, 1.0 / 6)), ShapeError);
}

TEST_CASE("spatial_degrade: constant cube stays constant") {
  HsiCube c = HsiCube::filled(3, 8, 8, 0.5f);
  HsiCube out = spatial_degrade(c, random_kernel(4, 3));
  CHECK(out.rows() == 2);
  for (float v : out.data()) CHECK(v == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("spatial_degrade: uniform 2x2 kernel gives block means") {
  HsiCube out = spatial_degrade(ramp_4x4(), make_block_average_kernel(2));
  const std::vector<double> expected{3.5 / 16, 5.5 / 16, 11.5 / 16, 13.5 / 16};
  REQUIRE(out.data().size() == 4);
  for (int i = 0; i < 4; ++i) CHECK(out.data()[i] == doctest::Approx(expected[i]).epsilon(1e-7));
}

TEST_CASE("spatial_degrade: one-hot kernel selects the block's top-left sample") {
  Mat<double> k = Mat<double>::Zero(2, 2);
  k(0, 0) = 1.0;
  HsiCube out = spatial_degrade(ramp_4x4(), PsfKernel(k));
  const std::vector<float> expected{1 / 16.f, 3 / 16.f, 9 / 16.f, 11 / 16.f};
  for (int i = 0; i < 4; ++i) CHECK(out.data()[i] == expected[i]);
}

TEST_CASE("spatial_degrade rejects non-divisible sizes") {
  CHECK_THROWS_AS(spatial_degrade(HsiCube::filled(1, 6, 8, 0.5f), make_block_average_kernel(4)), ShapeError);
}

TEST_CASE("spectral_degrade examples") {
  HsiCube x = random_cube(3, 4, 5, 1);
  HsiCube same = spectral_degrade(x, SrfMatrix(Mat<double>::Identity(3, 3)));
  CHECK(std::equal(same.data().begin(), same.data().end(), x.data().begin(), x.data().end()));

  Mat<double> r(1, 2);
  r << 0.5, 0.5;
  HsiCube px(2, 1, 1, {0.2f, 0.6f});
  CHECK(spectral_degrade(px, SrfMatrix(r)).data()[0] == doctest::Approx(0.4).epsilon(1e-7));

  HsiCube flat = HsiCube::filled(5, 3, 3, 0.3f);
  HsiCube flat_out = spectral_degrade(flat, random_srf(2, 5, 9));
  for (float v : flat_out.data()) CHECK(v == doctest::Approx(0.3).epsilon(1e-6));

  CHECK_THROWS_AS(spectral_degrade(x, random_srf(2, 4, 1)), ShapeError);
}

TEST_CASE("degradations match brute-force loops") {
  for (int t = 0; t < 10; ++t) {
    HsiCube x = random_cube(1 + t % 5, 16, 24, 100 + t);
    PsfKernel k = random_kernel(t % 2 ? 4 : 8, 200 + t);
    SrfMatrix r = random_srf(2, x.bands(), 300 + t);
    auto sp = spatial_degrade(x, k);
    auto ref = brute_spatial(x, k.weights());
    for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(sp.data()[i] - ref[i]) < 1e-6);
    auto se = spectral_degrade(x, r);
    auto ref2 = brute_spectral(x, r.weights());
    for (std::size_t i = 0; i < ref2.size(); ++i) CHECK(std::abs(se.data()[i] - ref2[i]) < 1e-6);
  }
}

TEST_CASE("degradations commute with each other and with permutations") {
  HsiCube x = random_cube(6, 16, 16, 5);
  PsfKernel k = random_kernel(4, 6);
  SrfMatrix r = random_srf(3, 6, 7);
  HsiCube a = spectral_degrade(spatial_degrade(x, k), r);
  HsiCube b = spatial_degrade(spectral_degrade(x, r), k);
  for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(std::abs(a.data()[i] - b.data()[i]) < 1e-5);

  const std::vector<int> perm{3, 0, 5, 1, 4, 2};
  HsiCube lhs = spatial_degrade(permute_bands(x, perm), k);
  HsiCube rhs = permute_bands(spatial_degrade(x, k), perm);
  CHECK(lhs == rhs);

  // Swapping two pixels of the input swaps them in the spectral output.
  std::vector<float> v(x.data().begin(), x.data().end());
  const int p = 3, q = 200, n = x.pixels();
  for (int bnd = 0; bnd < x.bands(); ++bnd) std::swap(v[bnd * n + p], v[bnd * n + q]);
  HsiCube xs(x.bands(), x.rows(), x.cols(), v);
  HsiCube s1 = spectral_degrade(x, r), s2 = spectral_degrade(xs, r);
  for (int o = 0; o < 3; ++o) {
    CHECK(s2.data()[o * n + p] == s1.data()[o * n + q]);
    CHECK(s2.data()[o * n + q] == s1.data()[o * n + p]);
  }
}

TEST_CASE("degradations are linear") {
  HsiCube x1 = random_cube(4, 8, 8, 21, 0.1f, 0.4f);
  HsiCube x2 = random_cube(4, 8, 8, 22, 0.1f, 0.4f);
  std::vector<float> mix(x1.data().size());
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 0.7f * x1.data()[i] + 1.3f * x2.data()[i];
  HsiCube xm(4, 8, 8, mix);
  PsfKernel k = random_kernel(2, 23);
  SrfMatrix r = random_srf(2, 4, 24);
  auto check = [](const HsiCube& m, const HsiCube& a, const HsiCube& b) {
    for (std::size_t i = 0; i < m.data().size(); ++i) {
      CHECK(std::abs(m.data()[i] - (0.7f * a.data()[i] + 1.3f * b.data()[i])) < 1e-5);
    }
  };
  check(spatial_degrade(xm, k), spatial_degrade(x1, k), spatial_degrade(x2, k));
  check(spectral_degrade(xm, r), spectral_degrade(x1, r), spectral_degrade(x2, r));
}

TEST_CASE("block-average kernels") {
  CHECK(make_block_average_kernel(1).weights()(0, 0) == 1.0);
  CHECK((make_block_average_kernel(2).weights().array() == 0.25).all());
  auto k32 = make_block_average_kernel(32);
  CHECK((k32.weights().array() == 1.0 / 1024).all());
  CHECK(std::abs(k32.weights().sum() - 1.0) < 1e-6);
  CHECK_THROWS_AS(make_block_average_kernel(0), ArgumentError);
  CHECK_THROWS_AS(make_block_average_kernel(-2), ArgumentError);
}

TEST_CASE("SRF CSV loading") {
  auto dir = scratch_dir("srf_csv");
  std::ofstream(dir / "a.csv") << "# nikon,2 bands\n2,2\n1,3\n";
  SrfMatrix r = load_srf_csv(dir / "a.csv");
  CHECK(r.weights()(0, 0) == 0.5);
  CHECK(r.weights()(0, 1) == 0.5);
  CHECK(r.weights()(1, 0) == 0.25);
  CHECK(r.weights()(1, 1) == 0.75);

  save_srf_csv(r, dir / "b.csv");
  CHECK(load_srf_csv(dir / "b.csv").weights() == r.weights());

  std::ofstream(dir / "zero.csv") << "0,0\n1,1\n";
  CHECK_THROWS_AS(load_srf_csv(dir / "zero.csv"), DataError);
  std::ofstream(dir / "neg.csv") << "1,-1,2\n";
  CHECK_THROWS_AS(load_srf_csv(dir / "neg.csv"), DataError);
  std::ofstream(dir / "ragged.csv") << "1,2,3\n1,2\n";
  CHECK_THROWS_AS(load_srf_csv(dir / "ragged.csv"), FormatError);
}

TEST_CASE("PSF CSV round trip") {
  auto dir = scratch_dir("psf_csv");
  PsfKernel k = random_kernel(4, 77);
  save_psf_csv(k, dir / "k.csv");
  PsfKernel back = load_psf_csv(dir / "k.csv");
  CHECK((back.weights() - k.weights()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("simulate_pair: noiseless composition") {
  HsiCube x = random_cube(4, 8, 8, 31);
  PsfKernel k = make_block_average_kernel(4);
  SrfMatrix r(Mat<double>::Identity(4, 4));
  SimulatedPair p = simulate_pair(x, k, r);
  CHECK(std::equal(p.hr_msi.data().begin(), p.hr_msi.data().end(), x.data().begin(), x.data().end()));
  auto ref = brute_spatial(x, k.weights());
  for (std::size_t i = 0; i < ref.size(); ++i) CHECK(std::abs(p.lr_hsi.data()[i] - ref[i]) < 1e-6);
}

TEST_CASE("simulate_pair: noise is seeded") {
  HsiCube x = random_cube(4, 16, 16, 32, 0.2f, 0.8f);
  auto a = simulate_pair(x, make_block_average_kernel(4), random_srf(2, 4, 3), 25.0, 9);
  auto b = simulate_pair(x, make_block_average_kernel(4), random_srf(2, 4, 3), 25.0, 9);
  auto c = simulate_pair(x, make_block_average_kernel(4), random_srf(2, 4, 3), 25.0, 10);
  CHECK(a.lr_hsi == b.lr_hsi);
  CHECK(a.hr_msi == b.hr_msi);
  CHECK_FALSE(a.hr_msi == c.hr_msi);
}

TEST_CASE("awgn_noise hits the requested SNR") {
  Tensor<double> s = to_tensor<double>(random_cube(8, 64, 64, 40));
  Tensor<double> n = awgn_noise(s, 30.0, 41);
  const double snr = 10.0 * std::log10(s.data.squaredNorm() / n.data.squaredNorm());
  CHECK(std::abs(snr - 30.0) < 0.5);
}
