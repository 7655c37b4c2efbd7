// SPDX-License-Identifier: Apache-2.0
#include "cycfuse/optimizer.hpp"

#include <cmath>

namespace cycfuse {

template <typename T>
Adam<T>::Adam(const ModelParams<T>& shape, AdamSettings settings) : settings_(settings) {
  for (const auto& view : parameter_views(shape)) {
    m_.emplace_back(view.values.size(), 0.0);
    v_.emplace_back(view.values.size(), 0.0);
  }
}

template <typename T>
void Adam<T>::step(ModelParams<T>& params, const ModelParams<T>& grads, double lr, ParamMask mask) {
  ++t_;
  const double b1 = settings_.beta1;
  const double b2 = settings_.beta2;
  const double correction1 = 1.0 - std::pow(b1, static_cast<double>(t_));
  const double correction2 = 1.0 - std::pow(b2, static_cast<double>(t_));
  const double step_size = lr / correction1;
  const double sqrt_c2 = std::sqrt(correction2);

  auto pviews = parameter_views(params);
  const auto gviews = parameter_views(grads);
  for (std::size_t k = 0; k < pviews.size(); ++k) {
    if (!mask.allows(pviews[k].group)) continue;
    if (pviews[k].group == ParamGroup::degradation && params.frozen_degradation) continue;
    auto& m = m_[k];
    auto& v = v_[k];
    auto p = pviews[k].values;
    const auto g = gviews[k].values;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double gi = g[i];
      m[i] = b1 * m[i] + (1.0 - b1) * gi;
      v[i] = b2 * v[i] + (1.0 - b2) * gi * gi;
      const double denom = std::sqrt(v[i]) / sqrt_c2 + settings_.eps;
      p[i] = static_cast<T>(static_cast<double>(p[i]) - step_size * m[i] / denom);
    }
  }
}

template class Adam<float>;
template class Adam<double>;

}  // namespace cycfuse
