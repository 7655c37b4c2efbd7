// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "cycfuse/model.hpp"

namespace cycfuse {

struct AdamSettings {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  bool operator==(const AdamSettings&) const = default;
};

/// Which parameter groups a step may modify.
struct ParamMask {
  bool degradation = true;
  bool upsamplers = true;

  bool allows(ParamGroup g) const noexcept {
    return g == ParamGroup::degradation ? degradation : upsamplers;
  }
};

/// Adam with bias correction. Moment buffers are kept in double regardless of
/// the parameter precision. Masked-out groups are left bit-for-bit unchanged.
template <typename T>
class Adam {
 public:
  Adam(const ModelParams<T>& shape, AdamSettings settings);

  void step(ModelParams<T>& params, const ModelParams<T>& grads, double lr, ParamMask mask);
  long steps_taken() const noexcept { return t_; }

 private:
  AdamSettings settings_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  long t_ = 0;
};

}  // namespace cycfuse
