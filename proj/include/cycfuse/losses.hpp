// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "cycfuse/model.hpp"
#include "cycfuse/tensor.hpp"

namespace cycfuse {

/// Mean-absolute-error components of the fusion objective.
struct LossBreakdown {
  double mm = 0.0;   // marginal matching
  double cyc = 0.0;  // cycle consistency
  double ide = 0.0;  // agreement of the two super-resolution branches
  double total = 0.0;
};

/// Which objective terms to evaluate. The full objective is the unweighted
/// sum of all three; disabling `cycle` gives the cycle-free ablation.
struct ObjectiveTerms {
  bool marginal = true;
  bool cycle = true;
  bool identity = true;
};

/// sum |a - b| / element count, accumulated in double.
template <typename T>
double l1_mean(const Tensor<T>& a, const Tensor<T>& b);

/// Forward (and optionally backward) evaluation of the selected terms. When
/// `grads` is non-null it must be shaped like `m`; gradients are accumulated
/// into it. Degradation logit gradients stay zero when m is frozen.
template <typename T>
LossBreakdown evaluate_objective(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z,
                                 ObjectiveTerms terms, ModelParams<T>* grads = nullptr);

/// |Z - Fz(Gy(Y))| + |Y - Fy(Gz(Z))|
template <typename T>
double loss_marginal(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z);

/// |Y - Fy(Gz(Fz(Gy(Y))))| + |Z - Fz(Gy(Fy(Gz(Z))))|
template <typename T>
double loss_cycle(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z);

/// |Gy(Y) - Gz(Z)|
template <typename T>
double loss_identity(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z);

template <typename T>
LossBreakdown loss_total(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z, bool use_cycle,
                         ModelParams<T>* grads = nullptr);

/// |Fz(Y) - Fy(Z)|: both observations degraded to the common low-resolution
/// multispectral cube. Only the degradation logits receive gradient.
template <typename T>
double loss_pretrain(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z, ModelParams<T>* grads = nullptr);

}  // namespace cycfuse
