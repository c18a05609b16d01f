// pase/gradcheck.cc

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

#include "pase/gradcheck.h"

#include <cmath>

namespace pase {

template <typename Real>
GradCheckReport check_gradients(
    std::vector<Variable<Real>> params,
    const std::function<Variable<Real>()>& build_loss, Real h, double tol) {
  // Analytic gradients from one reverse sweep.
  for (auto& p : params) {
    p.zero_grad();
    p.grad();  // make sure the buffer exists even if the op skips it
  }
  Variable<Real> loss = build_loss();
  backward(loss);
  std::vector<std::vector<Real>> analytic;
  analytic.reserve(params.size());
  for (auto& p : params) {
    auto g = p.grad();
    analytic.emplace_back(g.begin(), g.end());
  }

  GradCheckReport report;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    auto value = params[pi].value();
    for (size_t ei = 0; ei < value.size(); ++ei) {
      const Real saved = value[ei];
      value[ei] = saved + h;
      const double f_plus = static_cast<double>(build_loss().item());
      value[ei] = saved - h;
      const double f_minus = static_cast<double>(build_loss().item());
      value[ei] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * static_cast<double>(h));
      const double a = static_cast<double>(analytic[pi][ei]);
      const double rel =
          std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric));
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst =
            std::to_string(pi) + "/" + std::to_string(ei);
      }
    }
  }
  report.ok = report.max_rel_err < tol;
  return report;
}

template GradCheckReport check_gradients<float>(
    std::vector<Variable<float>>, const std::function<Variable<float>()>&,
    float, double);
template GradCheckReport check_gradients<double>(
    std::vector<Variable<double>>, const std::function<Variable<double>()>&,
    double, double);

}  // namespace pase
