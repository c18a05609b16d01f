// pase/tensor.h

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
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "pase/common.h"

namespace pase {

// One node of the reverse-mode computation graph. Values are stored densely
// in row-major order; gradients share the same layout and are allocated
// lazily during the backward sweep.
template <typename Real>
struct VarImpl {
  Shape shape;
  std::vector<Real> value;
  std::vector<Real> grad;  // empty until first accumulation
  bool requires_grad = false;
  uint64_t order = 0;  // creation index; parents always have a lower one
  std::vector<std::shared_ptr<VarImpl<Real>>> parents;
  std::function<void(VarImpl<Real>&)> backprop;

  int64_t numel() const { return static_cast<int64_t>(value.size()); }
  std::vector<Real>& grad_buffer();  // zero-filled on first use
};

// Reference-counted handle to a graph node; copies alias the same node.
// Leaves created with requires_grad=true act as learnable parameters.
template <typename Real>
class Variable {
 public:
  Variable() = default;

  static Variable zeros(Shape shape, bool requires_grad = false);
  static Variable full(Shape shape, Real v, bool requires_grad = false);
  static Variable from_data(Shape shape, std::vector<Real> data,
                            bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  int64_t rank() const { return static_cast<int64_t>(impl_->shape.size()); }
  int64_t dim(int i) const { return impl_->shape[i]; }
  int64_t numel() const { return impl_->numel(); }
  bool requires_grad() const { return impl_->requires_grad; }

  Real item() const;  // value of a one-element tensor

  std::span<Real> value() { return {impl_->value.data(), impl_->value.size()}; }
  std::span<const Real> value() const {
    return {impl_->value.data(), impl_->value.size()};
  }
  // Gradient buffer, allocated (zeroed) on demand.
  std::span<Real> grad();
  bool has_grad() const { return !impl_->grad.empty(); }
  void zero_grad();

  bool all_finite() const;
  bool grad_all_finite() const;

  const std::shared_ptr<VarImpl<Real>>& impl() const { return impl_; }

  template <typename R>
  friend Variable<R> make_node(Shape, std::vector<R>, std::vector<Variable<R>>,
                               std::function<void(VarImpl<R>&)>);

 private:
  explicit Variable(std::shared_ptr<VarImpl<Real>> impl)
      : impl_(std::move(impl)) {}

  std::shared_ptr<VarImpl<Real>> impl_;
};

// Builds an op result node. requires_grad is inherited from the parents and
// the backprop closure is dropped when no parent needs gradients.
template <typename Real>
Variable<Real> make_node(Shape shape, std::vector<Real> value,
                         std::vector<Variable<Real>> parents,
                         std::function<void(VarImpl<Real>&)> backprop);

// Reverse-mode sweep from a finite scalar loss; accumulates into the grad
// buffers of every reachable node with requires_grad set.
template <typename Real>
void backward(const Variable<Real>& loss);

using Variablef = Variable<float>;
using Variabled = Variable<double>;

}  // namespace pase
