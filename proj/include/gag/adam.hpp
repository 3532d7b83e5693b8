#pragma once

#include <cmath>
#include <vector>

#include "gag/backward.hpp"
#include "gag/error.hpp"
#include "gag/model.hpp"

namespace gag {

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEpsilon = 1e-8;

// One bias-corrected Adam update over every parameter tensor. Refuses
// non-finite gradients before touching any state, and verifies the updated
// parameters stayed finite.
inline void adam_step(ModelParams& params, const Gradients& grads,
                      const ModelConfig& config) {
  std::vector<Tensor*> tensors;
  params.for_each_tensor([&](Tensor& t) { tensors.push_back(&t); });
  std::vector<const Mat*> grad_mats;
  grads.for_each_mat([&](const Mat& m) { grad_mats.push_back(&m); });

  if (tensors.size() != grad_mats.size()) {
    throw ShapeError("adam_step: gradient tensor count mismatch");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const Mat& g = *grad_mats[i];
    if (g.rows() != tensors[i]->value.rows() ||
        g.cols() != tensors[i]->value.cols()) {
      throw ShapeError("adam_step: gradient shape mismatch");
    }
    if (!g.all_finite()) {
      throw NumericError("adam_step: gradient contains NaN/Inf, update refused");
    }
  }

  const double lr = config.learning_rate;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    Tensor& t = *tensors[i];
    const Mat& g = *grad_mats[i];
    const std::int64_t step = ++t.step;
    const double corr1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(step));
    const double corr2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(step));
    for (std::size_t j = 0; j < t.value.size(); ++j) {
      const double grad = g.data()[j];
      double& m1 = t.moment1.data()[j];
      double& m2 = t.moment2.data()[j];
      m1 = kAdamBeta1 * m1 + (1.0 - kAdamBeta1) * grad;
      m2 = kAdamBeta2 * m2 + (1.0 - kAdamBeta2) * grad * grad;
      t.value.data()[j] -=
          lr * (m1 / corr1) / (std::sqrt(m2 / corr2) + kAdamEpsilon);
    }
    if (!t.value.all_finite()) {
      throw NumericError("adam_step: parameters became non-finite");
    }
  }
}

}  // namespace gag
