// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/trainer.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <mutex>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "cycfuse/error.hpp"
#include "cycfuse/rng.hpp"
#include "cycfuse/schedule.hpp"

namespace cycfuse {

std::string to_string(FusionMode mode) { return mode == FusionMode::blind ? "blind" : "noblind"; }

FusionMode parse_fusion_mode(const std::string& s) {
  if (s == "blind") return FusionMode::blind;
  if (s == "noblind") return FusionMode::noblind;
  throw ConfigError("unknown fusion mode '" + s + "' (expected blind or noblind)");
}

void TrainConfig::validate() const {
  if (pretrain_iters < 0 || warmup_iters < 0 || anneal_iters < 0) {
    throw ConfigError("iteration counts must be >= 0");
  }
  if (!(max_lr > 0.0) || !std::isfinite(max_lr)) throw ConfigError("max_lr must be positive");
  if (!(pretrain_lr > 0.0) || !std::isfinite(pretrain_lr)) throw ConfigError("pretrain_lr must be positive");
  if (!(adam.beta1 > 0.0 && adam.beta1 < 1.0) || !(adam.beta2 > 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in (0,1)");
  }
  if (!(adam.eps > 0.0)) throw ConfigError("Adam eps must be positive");
}

double lr_at(long iter, const TrainConfig& cfg) {
  return OneCycleSchedule(cfg.warmup_iters, cfg.anneal_iters, cfg.max_lr).at(iter);
}

std::vector<HistoryRecord> TrainHistory::phase(Phase p) const {
  std::vector<HistoryRecord> out;
  for (const auto& r : records) {
    if (r.phase == p) out.push_back(r);
  }
  return out;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void check_pair(const ModelParams<float>& m, const Tensor<float>& y, const Tensor<float>& z) {
  if (y.channels() != m.arch.hsi_bands || z.channels() != m.arch.msi_bands || z.rows != y.rows * m.arch.scale ||
      z.cols != y.cols * m.arch.scale) {
    throw ShapeError("training pair " + shape_string(y) + " / " + shape_string(z) +
                     " is inconsistent with the model (L=" + std::to_string(m.arch.hsi_bands) +
                     ", l=" + std::to_string(m.arch.msi_bands) + ", S=" + std::to_string(m.arch.scale) + ")");
  }
}

// Each iteration allocates and frees the same multi-megabyte activation
// buffers. Keep them on the heap instead of fresh mmap'ed pages, which would
// page-fault on every iteration and dominate the run time.
void keep_large_blocks_on_heap() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 1 << 30);
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
  });
#endif
}

long last_finite(const TrainHistory& h, Phase p) {
  long last = -1;
  for (const auto& r : h.records) {
    if (r.phase == p) last = r.iter;
  }
  return last;
}

}  // namespace

std::string history_csv(const TrainHistory& history) {
  std::string out = "phase,iter,lr,mm,cyc,ide,total\n";
  for (const auto& r : history.records) {
    out += r.phase == Phase::pretrain ? "pretrain" : "train";
    out += ',';
    out += std::to_string(r.iter);
    for (double v : {r.lr, r.loss.mm, r.loss.cyc, r.loss.ide, r.loss.total}) {
      out += ',';
      append_number(out, v);
    }
    out += '\n';
  }
  return out;
}

void write_history_csv(const TrainHistory& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << history_csv(history);
  if (!out) throw IoError("failed writing " + path.string());
}

std::pair<ModelParams<float>, TrainHistory> pretrain(ModelParams<float> m, const Tensor<float>& y,
                                                     const Tensor<float>& z, const TrainConfig& cfg,
                                                     const ProgressFn& progress) {
  if (cfg.mode != FusionMode::blind || m.frozen_degradation) {
    throw ModeError("pretraining estimates the degradation operators and only runs in blind mode");
  }
  cfg.validate();
  check_pair(m, y, z);
  keep_large_blocks_on_heap();
  TrainHistory history;
  Adam<float> adam(m, cfg.adam);
  ModelParams<float> grads = zeros_like(m);
  for (long it = 0; it < cfg.pretrain_iters; ++it) {
    grads.psf_logits.setZero();
    grads.srf_logits.setZero();
    LossBreakdown loss;
    loss.total = loss_pretrain(m, y, z, &grads);
    if (!std::isfinite(loss.total)) {
      throw DivergenceError("pretraining loss became non-finite at iteration " + std::to_string(it), it,
                            last_finite(history, Phase::pretrain));
    }
    history.records.push_back({Phase::pretrain, it, cfg.pretrain_lr, loss});
    if (progress) progress(Phase::pretrain, it, loss);
    adam.step(m, grads, cfg.pretrain_lr, ParamMask{true, false});
  }
  return {std::move(m), std::move(history)};
}

std::pair<ModelParams<float>, TrainHistory> train(ModelParams<float> m, const Tensor<float>& y, const Tensor<float>& z,
                                                  const TrainConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  check_pair(m, y, z);
  keep_large_blocks_on_heap();
  const OneCycleSchedule schedule(cfg.warmup_iters, cfg.anneal_iters, cfg.max_lr);
  TrainHistory history;
  Adam<float> adam(m, cfg.adam);
  const ParamMask mask{!m.frozen_degradation, true};
  for (long it = 0; it < schedule.total_iters(); ++it) {
    ModelParams<float> grads = zeros_like(m);
    const LossBreakdown loss = loss_total(m, y, z, cfg.use_cycle, &grads);
    if (!std::isfinite(loss.total)) {
      throw DivergenceError("training loss became non-finite at iteration " + std::to_string(it), it,
                            last_finite(history, Phase::train));
    }
    const double lr = schedule.at(it);
    history.records.push_back({Phase::train, it, lr, loss});
    if (progress) progress(Phase::train, it, loss);
    adam.step(m, grads, lr, mask);
  }
  return {std::move(m), std::move(history)};
}

FusionResult run_fusion(const HsiCube& lr_hsi, const HsiCube& hr_msi, const TrainConfig& cfg, Architecture arch,
                        const std::optional<KnownDegradation>& known, const ProgressFn& progress) {
  cfg.validate();
  arch.hsi_bands = lr_hsi.bands();
  arch.msi_bands = hr_msi.bands();
  if (arch.msi_bands >= arch.hsi_bands) {
    throw ShapeError("HrMSI must have fewer bands than LrHSI (" + std::to_string(arch.msi_bands) +
                     " >= " + std::to_string(arch.hsi_bands) + ")");
  }
  const Tensor<float> y = to_tensor<float>(lr_hsi);
  const Tensor<float> z = to_tensor<float>(hr_msi);

  ModelParams<float> m = init_params<float>(arch, derive_seed(cfg.seed, "init"));
  check_pair(m, y, z);

  TrainHistory history;
  if (cfg.mode == FusionMode::noblind) {
    if (!known) throw ModeError("non-blind fusion needs the PSF kernel and SRF matrix");
    inject_degradation(m, known->psf, known->srf);
  } else {
    auto [pretrained, pre_history] = pretrain(std::move(m), y, z, cfg, progress);
    m = std::move(pretrained);
    history = std::move(pre_history);
  }

  auto [trained, train_history] = train(std::move(m), y, z, cfg, progress);
  history.records.insert(history.records.end(), train_history.records.begin(), train_history.records.end());

  HsiCube fused = to_cube(fuse(trained, y, z), "fused", lr_hsi.wavelengths_nm());
  return FusionResult{std::move(fused), std::move(history), std::move(trained)};
}

}  // namespace cycfuse
