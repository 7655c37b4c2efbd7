// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/losses.hpp"

#include <cmath>

namespace cycfuse {

namespace {

/// d l1_mean(target, pred) / d pred
template <typename T>
Tensor<T> l1_grad(const Tensor<T>& target, const Tensor<T>& pred) {
  Tensor<T> g;
  g.rows = pred.rows;
  g.cols = pred.cols;
  const T inv_n = T(1) / static_cast<T>(pred.data.size());
  g.data = (pred.data - target.data).array().sign().matrix() * inv_n;
  return g;
}

template <typename T>
void add_into(Tensor<T>& acc, const Tensor<T>& g) {
  if (acc.data.size() == 0) {
    acc = g;
  } else {
    acc.data += g.data;
  }
}

}  // namespace

template <typename T>
double l1_mean(const Tensor<T>& a, const Tensor<T>& b) {
  require_same_shape(a, b, "l1_mean");
  if (a.data.size() == 0) return 0.0;
  double sum = 0.0;
  const T* pa = a.data.data();
  const T* pb = b.data.data();
  for (Eigen::Index i = 0; i < a.data.size(); ++i) sum += std::abs(static_cast<double>(pa[i]) - static_cast<double>(pb[i]));
  return sum / static_cast<double>(a.data.size());
}

template <typename T>
LossBreakdown evaluate_objective(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z,
                                 ObjectiveTerms terms, ModelParams<T>* grads) {
  if (y.channels() != m.arch.hsi_bands || z.channels() != m.arch.msi_bands) {
    throw ShapeError("objective: band counts " + std::to_string(y.channels()) + "/" + std::to_string(z.channels()) +
                     " do not match the model (" + std::to_string(m.arch.hsi_bands) + "/" +
                     std::to_string(m.arch.msi_bands) + ")");
  }
  if (z.rows != y.rows * m.arch.scale || z.cols != y.cols * m.arch.scale) {
    throw ShapeError("objective: HrMSI " + shape_string(z) + " is not LrHSI " + shape_string(y) + " times scale " +
                     std::to_string(m.arch.scale));
  }

  LossBreakdown out;
  const bool backward = grads != nullptr;
  const bool need_mm_chain = terms.marginal || terms.cycle;

  // Branch outputs: A = Gy(Y), B = Gz(Z).
  SpatialTrace<T> trace_a;
  SpectralTrace<T> trace_b;
  const Tensor<T> a = upsample_spatial(m, y, backward ? &trace_a : nullptr);
  const Tensor<T> b = upsample_spectral(m, z, backward ? &trace_b : nullptr);

  Tensor<T> z_hat;  // Fz(A)
  Tensor<T> y_hat;  // Fy(B)
  if (need_mm_chain) {
    z_hat = degrade_spectral(m, a);
    y_hat = degrade_spatial(m, b);
  }

  Tensor<T> grad_z_hat;
  Tensor<T> grad_y_hat;
  Tensor<T> grad_a;
  Tensor<T> grad_b;

  if (terms.marginal) {
    out.mm = l1_mean(z, z_hat) + l1_mean(y, y_hat);
    if (backward) {
      add_into(grad_z_hat, l1_grad(z, z_hat));
      add_into(grad_y_hat, l1_grad(y, y_hat));
    }
  }

  if (terms.cycle) {
    // Y -> Gy -> Fz -> Gz -> Fy
    SpectralTrace<T> trace_c;
    const Tensor<T> c = upsample_spectral(m, z_hat, backward ? &trace_c : nullptr);
    const Tensor<T> y_cycle = degrade_spatial(m, c);
    // Z -> Gz -> Fy -> Gy -> Fz
    SpatialTrace<T> trace_d;
    const Tensor<T> d = upsample_spatial(m, y_hat, backward ? &trace_d : nullptr);
    const Tensor<T> z_cycle = degrade_spectral(m, d);
    out.cyc = l1_mean(y, y_cycle) + l1_mean(z, z_cycle);

    if (backward) {
      const Tensor<T> grad_c = degrade_spatial_backward(m, c, l1_grad(y, y_cycle), *grads, true);
      add_into(grad_z_hat, upsample_spectral_backward(m, trace_c, grad_c, *grads, true));
      const Tensor<T> grad_d = degrade_spectral_backward(m, d, l1_grad(z, z_cycle), *grads, true);
      add_into(grad_y_hat, upsample_spatial_backward(m, trace_d, grad_d, *grads, true));
    }
  }

  if (backward && need_mm_chain) {
    grad_a = degrade_spectral_backward(m, a, grad_z_hat, *grads, true);
    grad_b = degrade_spatial_backward(m, b, grad_y_hat, *grads, true);
  }

  if (terms.identity) {
    out.ide = l1_mean(a, b);
    if (backward) {
      const Tensor<T> g = l1_grad(b, a);
      add_into(grad_a, g);
      Tensor<T> neg = g;
      neg.data = -g.data;
      add_into(grad_b, neg);
    }
  }

  if (backward) {
    if (grad_a.data.size() != 0) upsample_spatial_backward(m, trace_a, grad_a, *grads, false);
    if (grad_b.data.size() != 0) upsample_spectral_backward(m, trace_b, grad_b, *grads, false);
  }

  out.total = out.mm + out.cyc + out.ide;
  return out;
}

template <typename T>
double loss_marginal(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z) {
  return evaluate_objective(m, y, z, ObjectiveTerms{true, false, false}).mm;
}

template <typename T>
double loss_cycle(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z) {
  return evaluate_objective(m, y, z, ObjectiveTerms{false, true, false}).cyc;
}

template <typename T>
double loss_identity(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z) {
  return evaluate_objective(m, y, z, ObjectiveTerms{false, false, true}).ide;
}

template <typename T>
LossBreakdown loss_total(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z, bool use_cycle,
                         ModelParams<T>* grads) {
  return evaluate_objective(m, y, z, ObjectiveTerms{true, use_cycle, true}, grads);
}

template <typename T>
double loss_pretrain(const ModelParams<T>& m, const Tensor<T>& y, const Tensor<T>& z, ModelParams<T>* grads) {
  const Tensor<T> from_y = degrade_spectral(m, y);
  const Tensor<T> from_z = degrade_spatial(m, z);
  if (!from_y.same_shape(from_z)) {
    throw ShapeError("pretrain: cross-degraded cubes disagree " + shape_string(from_y) + " vs " + shape_string(from_z));
  }
  const double loss = l1_mean(from_y, from_z);
  if (grads) {
    const Tensor<T> g = l1_grad(from_z, from_y);  // d/d from_y
    degrade_spectral_backward(m, y, g, *grads, false);
    Tensor<T> neg = g;
    neg.data = -g.data;
    degrade_spatial_backward(m, z, neg, *grads, false);
  }
  return loss;
}

#define CYCFUSE_INSTANTIATE(T)                                                                                   \
  template double l1_mean(const Tensor<T>&, const Tensor<T>&);                                                   \
  template LossBreakdown evaluate_objective(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&,           \
                                            ObjectiveTerms, ModelParams<T>*);                                    \
  template double loss_marginal(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template double loss_cycle(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);                         \
  template double loss_identity(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&);                      \
  template LossBreakdown loss_total(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&, bool,             \
                                    ModelParams<T>*);                                                            \
  template double loss_pretrain(const ModelParams<T>&, const Tensor<T>&, const Tensor<T>&, ModelParams<T>*);

CYCFUSE_INSTANTIATE(float)
CYCFUSE_INSTANTIATE(double)
#undef CYCFUSE_INSTANTIATE

}  // namespace cycfuse
