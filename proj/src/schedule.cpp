// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cycfuse/error.hpp"

namespace cycfuse {

OneCycleSchedule::OneCycleSchedule(long warmup_iters, long anneal_iters, double max_lr)
    : warmup_(warmup_iters), anneal_(anneal_iters), max_lr_(max_lr) {
  if (warmup_ < 0 || anneal_ < 0) throw ArgumentError("schedule iteration counts must be >= 0");
  if (!(max_lr_ > 0.0) || !std::isfinite(max_lr_)) throw ArgumentError("max_lr must be positive");
}

double OneCycleSchedule::warmup_value(double t) const {
  if (warmup_ == 0) return max_lr_;
  return start_lr() + (max_lr_ - start_lr()) * (t / static_cast<double>(warmup_));
}

double OneCycleSchedule::anneal_value(double t) const {
  const double span = static_cast<double>(std::max<long>(1, anneal_ - 1));
  const double progress = std::clamp((t - static_cast<double>(warmup_)) / span, 0.0, 1.0);
  return final_lr() + (max_lr_ - final_lr()) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

double OneCycleSchedule::at(long iter) const {
  if (iter < 0 || iter >= total_iters()) {
    throw ArgumentError("iteration " + std::to_string(iter) + " outside schedule [0," + std::to_string(total_iters()) + ")");
  }
  if (iter < warmup_) return warmup_value(static_cast<double>(iter));
  return anneal_value(static_cast<double>(iter));
}

}  // namespace cycfuse
