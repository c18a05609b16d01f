// pase/adam.cc

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

#include "pase/adam.h"

#include <cmath>
#include <stdexcept>

namespace pase {

template <typename Real>
AdamOptimizer<Real>::AdamOptimizer(std::vector<Variable<Real>> params,
                                   AdamConfig<Real> config)
    : params_(std::move(params)), config_(config) {
  check_arg(config_.learning_rate > Real(0), "adam: learning rate must be > 0");
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const auto& p : params_) {
    check_arg(p.defined() && p.requires_grad(),
              "adam: parameters must require gradients");
    m_.emplace_back(p.numel(), Real(0));
    v_.emplace_back(p.numel(), Real(0));
  }
}

template <typename Real>
void AdamOptimizer<Real>::step() {
  for (auto& p : params_) {
    if (!p.grad_all_finite()) {
      throw std::runtime_error("adam: non-finite gradient, step rejected");
    }
  }
  const int64_t t = ++step_count_;
  const Real bc1 = Real(1) - std::pow(config_.beta1, static_cast<Real>(t));
  const Real bc2 = Real(1) - std::pow(config_.beta2, static_cast<Real>(t));
  for (size_t i = 0; i < params_.size(); ++i) {
    auto& p = params_[i];
    auto value = p.value();
    auto grad = p.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < value.size(); ++j) {
      const Real g = grad[j];
      m[j] = config_.beta1 * m[j] + (Real(1) - config_.beta1) * g;
      v[j] = config_.beta2 * v[j] + (Real(1) - config_.beta2) * g * g;
      const Real mhat = m[j] / bc1;
      const Real vhat = v[j] / bc2;
      value[j] -= config_.learning_rate * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
}

template <typename Real>
void AdamOptimizer<Real>::zero_grad() {
  for (auto& p : params_) p.zero_grad();
}

template class AdamOptimizer<float>;
template class AdamOptimizer<double>;

}  // namespace pase
