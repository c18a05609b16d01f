// pase/tensor.cc

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

#include "pase/tensor.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_set>

namespace pase {

namespace {
std::atomic<uint64_t> g_order_counter{1};
}

template <typename Real>
std::vector<Real>& VarImpl<Real>::grad_buffer() {
  if (grad.empty()) grad.assign(value.size(), Real(0));
  return grad;
}

template <typename Real>
Variable<Real> Variable<Real>::zeros(Shape shape, bool requires_grad) {
  return from_data(shape, std::vector<Real>(shape_numel(shape), Real(0)),
                   requires_grad);
}

template <typename Real>
Variable<Real> Variable<Real>::full(Shape shape, Real v, bool requires_grad) {
  return from_data(shape, std::vector<Real>(shape_numel(shape), v),
                   requires_grad);
}

template <typename Real>
Variable<Real> Variable<Real>::from_data(Shape shape, std::vector<Real> data,
                                         bool requires_grad) {
  check_arg(shape_numel(shape) == static_cast<int64_t>(data.size()),
            "Variable: data length does not match shape " + shape_str(shape));
  auto impl = std::make_shared<VarImpl<Real>>();
  impl->shape = std::move(shape);
  impl->value = std::move(data);
  impl->requires_grad = requires_grad;
  impl->order = g_order_counter.fetch_add(1);
  return Variable<Real>(std::move(impl));
}

template <typename Real>
Real Variable<Real>::item() const {
  check_arg(numel() == 1, "Variable::item: tensor is not a scalar");
  return impl_->value[0];
}

template <typename Real>
std::span<Real> Variable<Real>::grad() {
  auto& g = impl_->grad_buffer();
  return {g.data(), g.size()};
}

template <typename Real>
void Variable<Real>::zero_grad() {
  std::fill(impl_->grad.begin(), impl_->grad.end(), Real(0));
}

template <typename Real>
bool Variable<Real>::all_finite() const {
  for (Real v : impl_->value) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

template <typename Real>
bool Variable<Real>::grad_all_finite() const {
  for (Real v : impl_->grad) {
    if (!std::isfinite(static_cast<double>(v))) return false;
  }
  return true;
}

template <typename Real>
Variable<Real> make_node(Shape shape, std::vector<Real> value,
                         std::vector<Variable<Real>> parents,
                         std::function<void(VarImpl<Real>&)> backprop) {
  auto out = Variable<Real>::from_data(std::move(shape), std::move(value));
  auto& impl = *out.impl();
  bool needs = false;
  for (const auto& p : parents) needs = needs || p.requires_grad();
  if (needs) {
    impl.requires_grad = true;
    impl.parents.reserve(parents.size());
    for (const auto& p : parents) impl.parents.push_back(p.impl());
    impl.backprop = std::move(backprop);
  }
  return out;
}

template <typename Real>
void backward(const Variable<Real>& loss) {
  check_arg(loss.defined() && loss.numel() == 1,
            "backward: loss must be a scalar");
  check_arg(std::isfinite(static_cast<double>(loss.item())),
            "backward: loss is not finite");
  check_arg(loss.requires_grad(),
            "backward: loss is not connected to any parameter");

  // Creation order is a topological order by construction, so the sweep just
  // visits reachable nodes in descending order.
  std::vector<VarImpl<Real>*> nodes;
  std::unordered_set<VarImpl<Real>*> seen;
  std::vector<VarImpl<Real>*> stack{loss.impl().get()};
  seen.insert(loss.impl().get());
  while (!stack.empty()) {
    VarImpl<Real>* n = stack.back();
    stack.pop_back();
    nodes.push_back(n);
    for (const auto& p : n->parents) {
      if (p->requires_grad && seen.insert(p.get()).second) {
        stack.push_back(p.get());
      }
    }
  }
  std::sort(nodes.begin(), nodes.end(),
            [](const VarImpl<Real>* a, const VarImpl<Real>* b) {
              return a->order > b->order;
            });

  loss.impl()->grad_buffer()[0] += Real(1);
  for (VarImpl<Real>* n : nodes) {
    if (n->backprop && !n->grad.empty()) n->backprop(*n);
  }
}

template struct VarImpl<float>;
template struct VarImpl<double>;
template class Variable<float>;
template class Variable<double>;
template Variable<float> make_node<float>(Shape, std::vector<float>,
                                          std::vector<Variable<float>>,
                                          std::function<void(VarImpl<float>&)>);
template Variable<double> make_node<double>(
    Shape, std::vector<double>, std::vector<Variable<double>>,
    std::function<void(VarImpl<double>&)>);
template void backward<float>(const Variable<float>&);
template void backward<double>(const Variable<double>&);

}  // namespace pase
