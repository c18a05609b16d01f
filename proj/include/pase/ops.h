// pase/ops.h

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

// x: [B, C_in, L], kernel: [C_out, C_in, W]. Output [B, C_out, L'] with
// L' = floor((L + pad_left + pad_right - W) / stride) + 1. No bias.
template <typename Real>
Variable<Real> conv1d(const Variable<Real>& x, const Variable<Real>& kernel,
                      int64_t stride, int64_t pad_left, int64_t pad_right);

// Total padding giving output length ceil(L/S) for a width-W stride-S
// convolution over a length-L input; split as (floor/2, rest).
std::pair<int64_t, int64_t> conv_same_padding(int64_t length, int64_t width,
                                              int64_t stride);

// Adjoint of a stride-S width-W conv1d under the ceil(L/S) padding scheme.
// x: [B, C_in, N], kernel: [C_in, C_out, W]. Output [B, C_out, N*S].
template <typename Real>
Variable<Real> tconv1d(const Variable<Real>& x, const Variable<Real>& kernel,
                       int64_t stride);

// Per-timestep two-layer MLP applied along the time axis:
// x: [B, C, L] -> prelu(w1 x + b1) -> w2 (.) + b2 -> [B, O, L].
// The hidden activation is recomputed during backward instead of stored.
template <typename Real>
Variable<Real> mlp1d(const Variable<Real>& x, const Variable<Real>& w1,
                     const Variable<Real>& b1, const Variable<Real>& slopes,
                     const Variable<Real>& w2, const Variable<Real>& b2);

// Channelwise PReLU. slopes has one entry per channel: dim 1 of a rank-3
// input, the last dim otherwise.
template <typename Real>
Variable<Real> prelu(const Variable<Real>& x, const Variable<Real>& slopes);

// Batch normalization over [B, C, L], per channel across B*L positions.
// gamma/beta may be null (non-affine). Train phase normalizes by batch
// statistics and, when update_running is set, folds them into the running
// buffers; eval phase normalizes by the running buffers.
template <typename Real>
Variable<Real> batchnorm(const Variable<Real>& x, const Variable<Real>* gamma,
                         const Variable<Real>* beta,
                         std::vector<Real>* running_mean,
                         std::vector<Real>* running_var, bool train_phase,
                         bool update_running, Real momentum, Real eps);

// x: [M, D_in], weights: [D_out, D_in], bias: [D_out] or null.
template <typename Real>
Variable<Real> linear(const Variable<Real>& x, const Variable<Real>& weights,
                      const Variable<Real>* bias);

template <typename Real>
Variable<Real> sigmoid(const Variable<Real>& x);

// Span of consecutive frames of one batch item.
struct FrameSpan {
  int32_t batch = 0;
  int32_t frame0 = 0;
  int32_t len = 1;
};

// Gathers frame spans from x: [B, C, N] into rows [M, len*C], frame-major.
// All spans must share the same len.
template <typename Real>
Variable<Real> gather_span(const Variable<Real>& x,
                           const std::vector<FrameSpan>& spans);

// Temporal mean: [B, C, N] -> [B, C].
template <typename Real>
Variable<Real> chunk_mean(const Variable<Real>& x);

// Row selection (with repetition allowed): [M, D] -> [K, D].
template <typename Real>
Variable<Real> gather_rows(const Variable<Real>& x,
                           const std::vector<int64_t>& rows);

// [B, C, N] -> [B*N, C]; row b*N+t holds frame t of item b.
template <typename Real>
Variable<Real> frames_to_rows(const Variable<Real>& x);

template <typename Real>
Variable<Real> concat_cols(const Variable<Real>& a, const Variable<Real>& b);

template <typename Real>
Variable<Real> add(const Variable<Real>& a, const Variable<Real>& b);

template <typename Real>
Variable<Real> scale(const Variable<Real>& a, Real c);

// Arithmetic mean of scalar nodes.
template <typename Real>
Variable<Real> average(const std::vector<Variable<Real>>& scalars);

// Mean absolute error.
template <typename Real>
Variable<Real> loss_l1(const Variable<Real>& pred, const Variable<Real>& target);

// Mean squared error.
template <typename Real>
Variable<Real> loss_mse(const Variable<Real>& pred, const Variable<Real>& target);

// -(mean log p_pos + mean log(1 - p_neg)), probabilities clamped to
// [clamp_eps, 1-clamp_eps]. Inputs outside [0, 1] are rejected.
template <typename Real>
Variable<Real> loss_bce(const Variable<Real>& p_pos, const Variable<Real>& p_neg,
                        Real clamp_eps = Real(1e-7));

// Mean cross-entropy of row-wise softmax over logits [N, K].
template <typename Real>
Variable<Real> softmax_xent(const Variable<Real>& logits,
                            const std::vector<int32_t>& labels);

// Row-wise softmax probabilities (plain values, no graph).
template <typename Real>
std::vector<Real> softmax_rows(const Variable<Real>& logits);

// Band-pass filterbank kernels from learnable cutoffs. f1/band: [F] in
// normalized frequency (cycles/sample). Effective band per filter:
// lo = |f1| (capped), hi = min(lo + min_band + |band|, nyquist); the kernel is
// the Hamming-windowed difference of two sinc low-passes. Output [F, 1, width].
template <typename Real>
Variable<Real> sinc_kernels(const Variable<Real>& f1, const Variable<Real>& band,
                            int64_t width, Real min_band,
                            Real nyquist = Real(0.5));

}  // namespace pase
