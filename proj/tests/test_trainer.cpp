// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <numeric>

#include "cycfuse/error.hpp"
#include "cycfuse/optimizer.hpp"
#include "cycfuse/schedule.hpp"
#include "cycfuse/synthetic.hpp"
#include "cycfuse/trainer.hpp"
#include "support.hpp"

using namespace cycfuse;
using namespace cycfuse::testing;

namespace {

struct SmallPair {
  HsiCube x;
  PsfKernel k;
  SrfMatrix r;
  Tensor<float> y;
  Tensor<float> z;
  Architecture arch;
};

SmallPair small_pair() {
  BlobSceneSpec spec;
  spec.bands = 8;
  spec.rows = 16;
  spec.cols = 16;
  spec.blobs = 6;
  spec.min_sigma_px = 1.5;
  spec.max_sigma_px = 4.0;
  HsiCube x = make_blob_scene(spec, 3);
  PsfKernel k = make_block_average_kernel(4);
  SrfMatrix r = make_gaussian_srf(2, 8);
  SimulatedPair p = simulate_pair(x, k, r);
  Architecture a;
  a.hsi_bands = 8;
  a.msi_bands = 2;
  a.scale = 4;
  a.widths = {6, 6};
  return {x, k, r, to_tensor<float>(p.lr_hsi), to_tensor<float>(p.hr_msi), a};
}

TrainConfig short_config(long pre, long warm, long anneal) {
  TrainConfig c;
  c.pretrain_iters = pre;
  c.warmup_iters = warm;
  c.anneal_iters = anneal;
  c.seed = 5;
  return c;
}

bool same_group(const ModelParams<float>& a, const ModelParams<float>& b, bool degradation) {
  auto va = parameter_views(a);
  auto vb = parameter_views(b);
  for (std::size_t i = 0; i < va.size(); ++i) {
    if ((va[i].group == ParamGroup::degradation) != degradation) continue;
    if (!std::equal(va[i].values.begin(), va[i].values.end(), vb[i].values.begin())) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("one-cycle schedule values") {
  TrainConfig c;  // 10k warmup, 20k anneal, max 0.01
  CHECK(lr_at(10000, c) == 0.01);
  CHECK(lr_at(0, c) == doctest::Approx(4e-4).epsilon(1e-12));
  CHECK(std::abs(lr_at(29999, c) - 1e-6) < 1e-6);
  CHECK(lr_at(29999, c) == doctest::Approx(1e-6).epsilon(1e-9));
  CHECK_THROWS_AS(lr_at(-1, c), ArgumentError);
  CHECK_THROWS_AS(lr_at(30000, c), ArgumentError);

  OneCycleSchedule s(10000, 20000, 0.01);
  CHECK(std::abs(s.warmup_value(10000) - s.anneal_value(10000)) <= 1e-9);
  for (long t = 1; t < 10000; t += 97) CHECK(s.at(t) > s.at(t - 1));
  for (long t = 10001; t < 30000; t += 97) CHECK(s.at(t) < s.at(t - 1));
}

TEST_CASE("schedule edge cases") {
  OneCycleSchedule no_warmup(0, 5, 1.0);
  CHECK(no_warmup.at(0) == 1.0);
  CHECK(no_warmup.at(4) == doctest::Approx(1e-4));
  OneCycleSchedule no_anneal(4, 0, 1.0);
  CHECK(no_anneal.at(0) == doctest::Approx(1.0 / 25));
  CHECK_THROWS_AS(no_anneal.at(4), ArgumentError);
  OneCycleSchedule empty(0, 0, 1.0);
  CHECK(empty.total_iters() == 0);
}

TEST_CASE("config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.max_lr = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.warmup_iters = -1;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = TrainConfig{};
  c.adam.beta2 = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_fusion_mode("noblind") == FusionMode::noblind);
  CHECK_THROWS_AS(parse_fusion_mode("semi"), ConfigError);
}

TEST_CASE("first Adam step moves each parameter by lr against its gradient sign") {
  Architecture a = mini_arch();
  auto m = init_params<double>(a, 0);
  auto g = zeros_like(m);
  g.psf_logits.setConstant(0.3);
  g.psf_logits(0, 0) = -2.0;
  g.spectral.output.bias.setConstant(5.0);
  auto before = m;
  Adam<double> adam(m, AdamSettings{});
  adam.step(m, g, 0.01, ParamMask{true, false});
  CHECK(adam.steps_taken() == 1);
  CHECK(m.psf_logits(0, 0) == doctest::Approx(before.psf_logits(0, 0) + 0.01));
  CHECK(m.psf_logits(1, 1) == doctest::Approx(before.psf_logits(1, 1) - 0.01));
  CHECK(m.spectral.output.bias == before.spectral.output.bias);

  Adam<double> fresh(m, AdamSettings{});
  fresh.step(m, g, 0.01, ParamMask{false, true});
  CHECK(m.spectral.output.bias(0) == doctest::Approx(before.spectral.output.bias(0) - 0.01));
}

TEST_CASE("pretrain touches only the degradation logits") {
  auto p = small_pair();
  auto m0 = init_params<float>(p.arch, 1);
  auto [m0b, h0] = pretrain(m0, p.y, p.z, short_config(0, 0, 0));
  CHECK(h0.records.empty());
  CHECK(same_group(m0b, m0, true));

  auto cfg = short_config(40, 0, 0);
  auto [m1, h1] = pretrain(m0, p.y, p.z, cfg);
  auto [m2, h2] = pretrain(m0, p.y, p.z, cfg);
  CHECK(m1.psf_logits == m2.psf_logits);
  CHECK(m1.srf_logits == m2.srf_logits);
  CHECK_FALSE(m1.srf_logits == m0.srf_logits);
  CHECK(same_group(m1, m0, false));
  REQUIRE(h1.records.size() == 40);
  for (const auto& r : h1.records) {
    CHECK(r.phase == Phase::pretrain);
    CHECK(r.lr == cfg.pretrain_lr);
    CHECK(r.loss.total > 0.0);
  }
  CHECK(h1.records.back().loss.total < h1.records.front().loss.total);
}

TEST_CASE("pretrain refuses non-blind models") {
  auto p = small_pair();
  auto m = init_params<float>(p.arch, 1);
  auto cfg = short_config(5, 0, 0);
  cfg.mode = FusionMode::noblind;
  CHECK_THROWS_AS(pretrain(m, p.y, p.z, cfg), ModeError);
  cfg.mode = FusionMode::blind;
  inject_degradation(m, p.k, p.r);
  CHECK_THROWS_AS(pretrain(m, p.y, p.z, cfg), ModeError);
}

TEST_CASE("train: zero iterations, frozen logits, schedule and determinism") {
  auto p = small_pair();
  auto m = init_params<float>(p.arch, 2);
  auto [same, h0] = train(m, p.y, p.z, short_config(0, 0, 0));
  CHECK(h0.records.empty());
  CHECK(same_group(same, m, true));
  CHECK(same_group(same, m, false));

  inject_degradation(m, p.k, p.r);
  auto cfg = short_config(0, 5, 10);
  auto [a, ha] = train(m, p.y, p.z, cfg);
  auto [b, hb] = train(m, p.y, p.z, cfg);
  CHECK(same_group(a, m, true));
  CHECK_FALSE(same_group(a, m, false));
  CHECK(history_csv(ha) == history_csv(hb));
  CHECK(same_group(a, b, false));
  REQUIRE(ha.records.size() == 15);
  for (const auto& r : ha.records) {
    CHECK(r.phase == Phase::train);
    CHECK(r.lr == lr_at(r.iter, cfg));
    CHECK(std::abs(r.loss.total - (r.loss.mm + r.loss.cyc + r.loss.ide)) < 1e-6);
  }

  cfg.use_cycle = false;
  auto [c, hc] = train(m, p.y, p.z, cfg);
  for (const auto& r : hc.records) CHECK(r.loss.cyc == 0.0);
}

TEST_CASE("train rejects inconsistent shapes before stepping") {
  auto p = small_pair();
  auto m = init_params<float>(p.arch, 2);
  Tensor<float> bad(2, 12, 16);
  CHECK_THROWS_AS(train(m, p.y, bad, short_config(0, 1, 1)), ShapeError);
}

TEST_CASE("smoothed training loss decreases") {
  auto p = small_pair();
  auto m = init_params<float>(p.arch, 4);
  inject_degradation(m, p.k, p.r);
  auto [trained, h] = train(m, p.y, p.z, short_config(0, 100, 200));
  const auto& r = h.records;
  auto window_mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < from + 100; ++i) s += r[i].loss.total;
    return s / 100.0;
  };
  CHECK(window_mean(r.size() - 100) < window_mean(0));
}

TEST_CASE("divergence is reported with the last finite iteration") {
  auto p = small_pair();
  auto m = init_params<float>(p.arch, 2);
  inject_degradation(m, p.k, p.r);
  auto cfg = short_config(0, 0, 50);
  cfg.max_lr = 1e38;
  try {
    train(m, p.y, p.z, cfg);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.failed_iter() >= 1);
    CHECK(e.last_finite_iter() == e.failed_iter() - 1);
  }
}

TEST_CASE("run_fusion phases and output shape") {
  auto p = small_pair();
  HsiCube y = to_cube(p.y), z = to_cube(p.z);
  auto res = run_fusion(y, z, short_config(6, 2, 3), p.arch);
  CHECK(res.fused.bands() == 8);
  CHECK(res.fused.rows() == 16);
  CHECK(res.fused.cols() == 16);
  REQUIRE(res.history.records.size() == 11);
  CHECK(res.history.phase(Phase::pretrain).size() == 6);
  CHECK(res.history.phase(Phase::train).size() == 5);
  CHECK(res.history.records[5].phase == Phase::pretrain);
  CHECK(res.history.records[6].phase == Phase::train);
  for (const auto& r : res.history.phase(Phase::pretrain)) CHECK(r.loss.total > 0.0);

  auto noblind = short_config(6, 2, 3);
  noblind.mode = FusionMode::noblind;
  CHECK_THROWS_AS(run_fusion(y, z, noblind, p.arch), ModeError);
  auto nb = run_fusion(y, z, noblind, p.arch, KnownDegradation{p.k, p.r});
  CHECK(nb.history.phase(Phase::pretrain).empty());
  CHECK(nb.params.frozen_degradation);

  CHECK_THROWS_AS(run_fusion(z, y, short_config(0, 1, 1), p.arch), ShapeError);
}

TEST_CASE("history CSV layout") {
  TrainHistory h;
  h.records.push_back({Phase::pretrain, 0, 0.001, {0, 0, 0, 0.5}});
  h.records.push_back({Phase::train, 0, 0.0004, {0.1, 0.2, 0.3, 0.6000000000000001}});
  const std::string csv = history_csv(h);
  CHECK(csv ==
        "phase,iter,lr,mm,cyc,ide,total\n"
        "pretrain,0,0.001,0,0,0,0.5\n"
        "train,0,4e-04,0.1,0.2,0.3,0.6000000000000001\n");
  auto dir = scratch_dir("history");
  write_history_csv(h, dir / "h.csv");
  CHECK(read_file(dir / "h.csv") == csv);
}
