// pase/layers.h

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

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "pase/ops.h"
#include "pase/rng.h"
#include "pase/tensor.h"

namespace pase {

// Fan-in scaled uniform initialization.
template <typename Real>
Variable<Real> uniform_init(Shape shape, int64_t fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::vector<Real> data(shape_numel(shape));
  for (auto& v : data) v = static_cast<Real>(rng.uniform(-bound, bound));
  return Variable<Real>::from_data(std::move(shape), std::move(data), true);
}

// Affine BN followed by channelwise PReLU, with running statistics.
template <typename Real>
struct BnPreluLayer {
  Variable<Real> gamma, beta, slopes;
  std::vector<Real> run_mean, run_var;

  void init(int64_t channels) {
    gamma = Variable<Real>::full({channels}, Real(1), true);
    beta = Variable<Real>::zeros({channels}, true);
    slopes = Variable<Real>::full({channels}, Real(0.25), true);
    run_mean.assign(channels, Real(0));
    run_var.assign(channels, Real(1));
  }

  Variable<Real> apply(const Variable<Real>& x, bool train_phase,
                       bool update_running) {
    auto normed = batchnorm<Real>(x, &gamma, &beta, &run_mean, &run_var,
                                  train_phase, update_running, Real(0.1),
                                  Real(1e-5));
    return prelu(normed, slopes);
  }

  void visit_params(
      const std::string& prefix,
      const std::function<void(const std::string&, Variable<Real>&)>& fn) {
    fn(prefix + ".bn.gamma", gamma);
    fn(prefix + ".bn.beta", beta);
    fn(prefix + ".prelu", slopes);
  }

  void visit_buffers(
      const std::string& prefix,
      const std::function<void(const std::string&, std::vector<Real>&)>& fn) {
    fn(prefix + ".bn.rmean", run_mean);
    fn(prefix + ".bn.rvar", run_var);
  }
};

}  // namespace pase
