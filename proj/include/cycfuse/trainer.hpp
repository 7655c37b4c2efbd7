// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cycfuse/cube.hpp"
#include "cycfuse/degradation.hpp"
#include "cycfuse/losses.hpp"
#include "cycfuse/model.hpp"
#include "cycfuse/optimizer.hpp"

namespace cycfuse {

enum class FusionMode { blind, noblind };

std::string to_string(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& s);

struct TrainConfig {
  long pretrain_iters = 10000;
  double pretrain_lr = 1e-3;
  long warmup_iters = 10000;
  long anneal_iters = 20000;
  double max_lr = 0.01;
  std::uint64_t seed = 0;
  FusionMode mode = FusionMode::blind;
  bool use_cycle = true;
  AdamSettings adam;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

/// Learning rate of training iteration `iter` under the one-cycle schedule.
double lr_at(long iter, const TrainConfig& cfg);

enum class Phase { pretrain, train };

struct HistoryRecord {
  Phase phase;
  long iter;
  double lr;
  LossBreakdown loss;  // pretrain rows carry the pretraining loss in `total`
};

struct TrainHistory {
  std::vector<HistoryRecord> records;

  std::vector<HistoryRecord> phase(Phase p) const;
};

/// CSV with header phase,iter,lr,mm,cyc,ide,total; numbers in shortest
/// round-trip form so identical runs give identical bytes.
void write_history_csv(const TrainHistory& history, const std::filesystem::path& path);
std::string history_csv(const TrainHistory& history);

/// Per-iteration callback (phase, iteration, loss); may be empty.
using ProgressFn = std::function<void(Phase, long, const LossBreakdown&)>;

/// Full-pair Adam steps on the pretraining loss at fixed lr, touching only
/// the degradation logits. Throws ModeError in non-blind mode.
std::pair<ModelParams<float>, TrainHistory> pretrain(ModelParams<float> m, const Tensor<float>& y,
                                                     const Tensor<float>& z, const TrainConfig& cfg,
                                                     const ProgressFn& progress = {});

/// warmup + anneal Adam steps on the full objective following the one-cycle
/// schedule. Degradation logits stay fixed when the model is frozen.
std::pair<ModelParams<float>, TrainHistory> train(ModelParams<float> m, const Tensor<float>& y,
                                                  const Tensor<float>& z, const TrainConfig& cfg,
                                                  const ProgressFn& progress = {});

struct KnownDegradation {
  PsfKernel psf;
  SrfMatrix srf;
};

struct FusionResult {
  HsiCube fused;
  TrainHistory history;
  ModelParams<float> params;
};

/// init -> (pretrain when blind) -> train -> fuse. Non-blind mode requires
/// `known` and freezes the injected operators.
FusionResult run_fusion(const HsiCube& lr_hsi, const HsiCube& hr_msi, const TrainConfig& cfg, Architecture arch,
                        const std::optional<KnownDegradation>& known = std::nullopt,
                        const ProgressFn& progress = {});

}  // namespace cycfuse
