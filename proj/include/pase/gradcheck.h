// pase/gradcheck.h

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

#include <functional>
#include <string>
#include <vector>

#include "pase/tensor.h"

namespace pase {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst;  // "param_idx/elem_idx" of the worst element
  bool ok = true;
};

// Central finite-difference verification of reverse-mode gradients.
// build_loss must construct a fresh graph from the current parameter values
// and return a scalar loss. rel err = |analytic - numeric| / max(1, |a|+|n|).
template <typename Real>
GradCheckReport check_gradients(
    std::vector<Variable<Real>> params,
    const std::function<Variable<Real>()>& build_loss, Real h, double tol);

// Named gradcheck cases covering every differentiable op and a tiny
// end-to-end encoder + worker stack; used by tests and the CLI.
struct GradSuiteCase {
  std::string name;
  GradCheckReport report;
};
std::vector<GradSuiteCase> run_gradient_suite(uint64_t seed, double tol);

}  // namespace pase
