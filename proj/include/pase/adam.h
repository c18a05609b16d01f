// pase/adam.h

// Copyright 2026  The pase-cpp Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

#include "pase/tensor.h"

namespace pase {

template <typename Real>
struct AdamConfig {
  Real learning_rate = Real(5e-4);
  Real beta1 = Real(0.9);
  Real beta2 = Real(0.999);
  Real eps = Real(1e-8);
};

// Bias-corrected Adam over a fixed parameter list. A step with any non-finite
// gradient is rejected (throws) before touching parameters or moments.
template <typename Real>
class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Variable<Real>> params, AdamConfig<Real> config);

  void step();
  void zero_grad();

  void set_learning_rate(Real lr) { config_.learning_rate = lr; }
  Real learning_rate() const { return config_.learning_rate; }
  int64_t step_count() const { return step_count_; }
  const std::vector<Variable<Real>>& params() const { return params_; }

  // Serialization hooks: per-parameter moment buffers and the step counter.
  std::vector<std::vector<Real>>& first_moments() { return m_; }
  std::vector<std::vector<Real>>& second_moments() { return v_; }
  void set_step_count(int64_t t) { step_count_ = t; }

 private:
  std::vector<Variable<Real>> params_;
  AdamConfig<Real> config_;
  std::vector<std::vector<Real>> m_, v_;
  int64_t step_count_ = 0;
};

using AdamOptimizerf = AdamOptimizer<float>;

}  // namespace pase
