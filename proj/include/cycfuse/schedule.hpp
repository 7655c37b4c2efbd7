// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace cycfuse {

/// One-cycle learning rate: linear warmup from max_lr/25 to max_lr over
/// [0, warmup), then cosine annealing from max_lr down to max_lr/1e4 reached
/// at the last iteration warmup + anneal - 1.
class OneCycleSchedule {
 public:
  static constexpr double kStartDivisor = 25.0;
  static constexpr double kFinalDivisor = 1e4;

  OneCycleSchedule(long warmup_iters, long anneal_iters, double max_lr);

  long total_iters() const noexcept { return warmup_ + anneal_; }
  double max_lr() const noexcept { return max_lr_; }
  double start_lr() const noexcept { return max_lr_ / kStartDivisor; }
  double final_lr() const noexcept { return max_lr_ / kFinalDivisor; }

  /// Throws ArgumentError outside [0, total_iters()).
  double at(long iter) const;

  /// The two branches as continuous functions of t, for inspecting the junction.
  double warmup_value(double t) const;
  double anneal_value(double t) const;

 private:
  long warmup_;
  long anneal_;
  double max_lr_;
};

}  // namespace cycfuse
