// pase/ops.cc

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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>

#include "pase/ops.h"

namespace pase {

namespace {

template <typename Real>
using MatRM = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapM = Eigen::Map<MatRM<Real>>;
template <typename Real>
using CMapM = Eigen::Map<const MatRM<Real>>;
template <typename Real>
using VecCol = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Channel geometry of a PReLU/BN-style op: per-channel parameters index dim 1
// of rank-3 inputs and the last dim otherwise.
template <typename Real>
void channel_geometry(const Variable<Real>& x, int64_t* channels,
                      int64_t* outer, int64_t* inner) {
  if (x.rank() == 3) {
    *outer = x.dim(0);
    *channels = x.dim(1);
    *inner = x.dim(2);
  } else {
    *outer = x.numel() / x.shape().back();
    *channels = x.shape().back();
    *inner = 1;
  }
}

}  // namespace

template <typename Real>
Variable<Real> prelu(const Variable<Real>& x, const Variable<Real>& slopes) {
  int64_t channels, outer, inner;
  channel_geometry(x, &channels, &outer, &inner);
  check_arg(slopes.numel() == channels,
            "prelu: slopes " + std::to_string(slopes.numel()) +
                " do not match channels " + std::to_string(channels));
  const Real* sl = slopes.value().data();
  const Real* xp = x.value().data();
  std::vector<Real> out(x.numel());
  // Rank-3 layout: [outer][channels][inner]; otherwise [outer][channels].
  const bool chan_major = x.rank() == 3;
  auto channel_of = [chan_major, inner, channels](int64_t i) {
    return chan_major ? (i / inner) % channels : i % channels;
  };
  for (int64_t i = 0; i < x.numel(); ++i) {
    out[i] = xp[i] >= Real(0) ? xp[i] : sl[channel_of(i)] * xp[i];
  }
  auto backprop = [x, slopes, channel_of](VarImpl<Real>& self) {
    const Real* g = self.grad.data();
    const Real* xv = x.value().data();
    const Real* sv = slopes.value().data();
    if (x.requires_grad()) {
      auto& gx = x.impl()->grad_buffer();
      for (int64_t i = 0; i < self.numel(); ++i) {
        gx[i] += xv[i] >= Real(0) ? g[i] : sv[channel_of(i)] * g[i];
      }
    }
    if (slopes.requires_grad()) {
      auto& gs = slopes.impl()->grad_buffer();
      for (int64_t i = 0; i < self.numel(); ++i) {
        if (xv[i] < Real(0)) gs[channel_of(i)] += g[i] * xv[i];
      }
    }
  };
  return make_node<Real>(x.shape(), std::move(out), {x, slopes},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> batchnorm(const Variable<Real>& x, const Variable<Real>* gamma,
                         const Variable<Real>* beta,
                         std::vector<Real>* running_mean,
                         std::vector<Real>* running_var, bool train_phase,
                         bool update_running, Real momentum, Real eps) {
  check_arg(x.rank() == 3, "batchnorm: input must be [B, C, L]");
  const int64_t batch = x.dim(0), channels = x.dim(1), length = x.dim(2);
  const int64_t n = batch * length;
  check_arg(n >= 1, "batchnorm: empty input");
  check_arg(eps > Real(0), "batchnorm: eps must be positive");
  check_arg(running_mean && running_var &&
                static_cast<int64_t>(running_mean->size()) == channels &&
                static_cast<int64_t>(running_var->size()) == channels,
            "batchnorm: running stats must have one entry per channel");
  const bool affine = gamma != nullptr;
  if (affine) {
    check_arg(beta && gamma->numel() == channels && beta->numel() == channels,
              "batchnorm: gamma/beta must be [C]");
  }

  std::vector<Real> mean(channels), inv_std(channels);
  const Real* xp = x.value().data();
  auto at = [&](int64_t b, int64_t c, int64_t t) {
    return xp[(b * channels + c) * length + t];
  };
  for (int64_t c = 0; c < channels; ++c) {
    if (train_phase) {
      double m = 0;
      for (int64_t b = 0; b < batch; ++b)
        for (int64_t t = 0; t < length; ++t) m += at(b, c, t);
      m /= n;
      double v = 0;
      for (int64_t b = 0; b < batch; ++b)
        for (int64_t t = 0; t < length; ++t) {
          double d = at(b, c, t) - m;
          v += d * d;
        }
      v /= n;
      mean[c] = static_cast<Real>(m);
      inv_std[c] = Real(1) / std::sqrt(static_cast<Real>(v) + eps);
      if (update_running) {
        (*running_mean)[c] =
            (Real(1) - momentum) * (*running_mean)[c] + momentum * mean[c];
        (*running_var)[c] = (Real(1) - momentum) * (*running_var)[c] +
                            momentum * static_cast<Real>(v);
      }
    } else {
      mean[c] = (*running_mean)[c];
      inv_std[c] = Real(1) / std::sqrt((*running_var)[c] + eps);
    }
  }

  std::vector<Real> out(x.numel());
  const Real* gm = affine ? gamma->value().data() : nullptr;
  const Real* bt = affine ? beta->value().data() : nullptr;
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t c = 0; c < channels; ++c) {
      const Real* xc = xp + (b * channels + c) * length;
      Real* oc = out.data() + (b * channels + c) * length;
      const Real g = affine ? gm[c] : Real(1);
      const Real s = affine ? bt[c] : Real(0);
      for (int64_t t = 0; t < length; ++t) {
        oc[t] = (xc[t] - mean[c]) * inv_std[c] * g + s;
      }
    }
  }

  std::vector<Variable<Real>> parents{x};
  if (affine) {
    parents.push_back(*gamma);
    parents.push_back(*beta);
  }
  Variable<Real> gamma_v = affine ? *gamma : Variable<Real>();
  Variable<Real> beta_v = affine ? *beta : Variable<Real>();
  auto backprop = [x, gamma_v, beta_v, affine, train_phase, mean, inv_std,
                   batch, channels, length, n](VarImpl<Real>& self) {
    const Real* g = self.grad.data();
    const Real* xv = x.value().data();
    const Real* gm = affine ? gamma_v.value().data() : nullptr;
    std::vector<Real> dgamma, dbeta;
    const bool want_affine_grads =
        affine && (gamma_v.requires_grad() || beta_v.requires_grad());
    if (want_affine_grads) {
      dgamma.assign(channels, Real(0));
      dbeta.assign(channels, Real(0));
    }
    auto xhat_at = [&](int64_t b, int64_t c, int64_t t) {
      return (xv[(b * channels + c) * length + t] - mean[c]) * inv_std[c];
    };
    if (want_affine_grads) {
      for (int64_t b = 0; b < batch; ++b)
        for (int64_t c = 0; c < channels; ++c)
          for (int64_t t = 0; t < length; ++t) {
            Real gi = g[(b * channels + c) * length + t];
            dgamma[c] += gi * xhat_at(b, c, t);
            dbeta[c] += gi;
          }
      if (gamma_v.requires_grad()) {
        auto& gg = gamma_v.impl()->grad_buffer();
        for (int64_t c = 0; c < channels; ++c) gg[c] += dgamma[c];
      }
      if (beta_v.requires_grad()) {
        auto& gb = beta_v.impl()->grad_buffer();
        for (int64_t c = 0; c < channels; ++c) gb[c] += dbeta[c];
      }
    }
    if (!x.requires_grad()) return;
    auto& gx = x.impl()->grad_buffer();
    if (!train_phase) {
      // Running statistics are constants here.
      for (int64_t b = 0; b < batch; ++b)
        for (int64_t c = 0; c < channels; ++c) {
          const Real k = (affine ? gm[c] : Real(1)) * inv_std[c];
          const int64_t base = (b * channels + c) * length;
          for (int64_t t = 0; t < length; ++t) gx[base + t] += g[base + t] * k;
        }
      return;
    }
    // Train phase: d xhat couples through the batch mean and variance.
    for (int64_t c = 0; c < channels; ++c) {
      double sum_dy = 0, sum_dy_xhat = 0;
      for (int64_t b = 0; b < batch; ++b)
        for (int64_t t = 0; t < length; ++t) {
          Real dy = g[(b * channels + c) * length + t];
          if (affine) dy *= gm[c];
          sum_dy += dy;
          sum_dy_xhat += dy * xhat_at(b, c, t);
        }
      const Real mean_dy = static_cast<Real>(sum_dy / n);
      const Real mean_dy_xhat = static_cast<Real>(sum_dy_xhat / n);
      for (int64_t b = 0; b < batch; ++b) {
        const int64_t base = (b * channels + c) * length;
        for (int64_t t = 0; t < length; ++t) {
          Real dy = g[base + t];
          if (affine) dy *= gm[c];
          gx[base + t] +=
              inv_std[c] * (dy - mean_dy - xhat_at(b, c, t) * mean_dy_xhat);
        }
      }
    }
  };
  return make_node<Real>(x.shape(), std::move(out), std::move(parents),
                         std::move(backprop));
}

template <typename Real>
Variable<Real> linear(const Variable<Real>& x, const Variable<Real>& weights,
                      const Variable<Real>* bias) {
  check_arg(x.rank() == 2, "linear: input must be [M, D_in]");
  check_arg(weights.rank() == 2, "linear: weights must be [D_out, D_in]");
  const int64_t rows = x.dim(0), din = x.dim(1), dout = weights.dim(0);
  check_arg(weights.dim(1) == din,
            "linear: weights D_in " + std::to_string(weights.dim(1)) +
                " does not match input " + std::to_string(din));
  if (bias) check_arg(bias->numel() == dout, "linear: bias must be [D_out]");

  std::vector<Real> out(rows * dout);
  {
    CMapM<Real> xm(x.value().data(), rows, din);
    CMapM<Real> wm(weights.value().data(), dout, din);
    MapM<Real> om(out.data(), rows, dout);
    om.noalias() = xm * wm.transpose();
    if (bias) {
      om.rowwise() += Eigen::Map<const Eigen::Matrix<Real, 1, Eigen::Dynamic>>(
          bias->value().data(), dout);
    }
  }
  std::vector<Variable<Real>> parents{x, weights};
  Variable<Real> bias_v = bias ? *bias : Variable<Real>();
  if (bias) parents.push_back(bias_v);
  auto backprop = [x, weights, bias_v, rows, din, dout](VarImpl<Real>& self) {
    CMapM<Real> go(self.grad.data(), rows, dout);
    if (x.requires_grad()) {
      CMapM<Real> wm(weights.value().data(), dout, din);
      MapM<Real> gx(x.impl()->grad_buffer().data(), rows, din);
      gx.noalias() += go * wm;
    }
    if (weights.requires_grad()) {
      CMapM<Real> xm(x.value().data(), rows, din);
      MapM<Real> gw(weights.impl()->grad_buffer().data(), dout, din);
      gw.noalias() += go.transpose() * xm;
    }
    if (bias_v.defined() && bias_v.requires_grad()) {
      Eigen::Map<Eigen::Matrix<Real, 1, Eigen::Dynamic>> gb(
          bias_v.impl()->grad_buffer().data(), dout);
      gb += go.colwise().sum();
    }
  };
  return make_node<Real>({rows, dout}, std::move(out), std::move(parents),
                         std::move(backprop));
}

template <typename Real>
Variable<Real> sigmoid(const Variable<Real>& x) {
  std::vector<Real> out(x.numel());
  const Real* xp = x.value().data();
  for (int64_t i = 0; i < x.numel(); ++i) {
    const Real v = xp[i];
    out[i] = v >= Real(0) ? Real(1) / (Real(1) + std::exp(-v))
                          : std::exp(v) / (Real(1) + std::exp(v));
  }
  std::vector<Real> saved = out;
  auto backprop = [x, saved](VarImpl<Real>& self) {
    if (!x.requires_grad()) return;
    auto& gx = x.impl()->grad_buffer();
    const Real* g = self.grad.data();
    for (int64_t i = 0; i < self.numel(); ++i) {
      gx[i] += g[i] * saved[i] * (Real(1) - saved[i]);
    }
  };
  return make_node<Real>(x.shape(), std::move(out), {x}, std::move(backprop));
}

template <typename Real>
Variable<Real> gather_span(const Variable<Real>& x,
                           const std::vector<FrameSpan>& spans) {
  check_arg(x.rank() == 3, "gather_span: input must be [B, C, N]");
  check_arg(!spans.empty(), "gather_span: no spans");
  const int64_t batch = x.dim(0), channels = x.dim(1), frames = x.dim(2);
  const int64_t len = spans.front().len;
  for (const FrameSpan& s : spans) {
    check_arg(s.len == len, "gather_span: spans must share one length");
    check_arg(s.batch >= 0 && s.batch < batch && s.frame0 >= 0 &&
                  s.frame0 + s.len <= frames,
              "gather_span: span out of range");
  }
  const int64_t m = static_cast<int64_t>(spans.size());
  const int64_t cols = len * channels;
  std::vector<Real> out(m * cols);
  const Real* xp = x.value().data();
  for (int64_t i = 0; i < m; ++i) {
    const FrameSpan& s = spans[i];
    for (int64_t f = 0; f < len; ++f) {
      for (int64_t c = 0; c < channels; ++c) {
        out[i * cols + f * channels + c] =
            xp[(s.batch * channels + c) * frames + s.frame0 + f];
      }
    }
  }
  auto backprop = [x, spans, channels, frames, len, cols](VarImpl<Real>& self) {
    if (!x.requires_grad()) return;
    auto& gx = x.impl()->grad_buffer();
    const Real* g = self.grad.data();
    for (size_t i = 0; i < spans.size(); ++i) {
      const FrameSpan& s = spans[i];
      for (int64_t f = 0; f < len; ++f) {
        for (int64_t c = 0; c < channels; ++c) {
          gx[(s.batch * channels + c) * frames + s.frame0 + f] +=
              g[static_cast<int64_t>(i) * cols + f * channels + c];
        }
      }
    }
  };
  return make_node<Real>({m, cols}, std::move(out), {x}, std::move(backprop));
}

template <typename Real>
Variable<Real> chunk_mean(const Variable<Real>& x) {
  check_arg(x.rank() == 3, "chunk_mean: input must be [B, C, N]");
  const int64_t batch = x.dim(0), channels = x.dim(1), frames = x.dim(2);
  check_arg(frames >= 1, "chunk_mean: empty time axis");
  std::vector<Real> out(batch * channels, Real(0));
  const Real* xp = x.value().data();
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < channels; ++c) {
      double acc = 0;
      const Real* xc = xp + (b * channels + c) * frames;
      for (int64_t t = 0; t < frames; ++t) acc += xc[t];
      out[b * channels + c] = static_cast<Real>(acc / frames);
    }
  auto backprop = [x, batch, channels, frames](VarImpl<Real>& self) {
    if (!x.requires_grad()) return;
    auto& gx = x.impl()->grad_buffer();
    const Real* g = self.grad.data();
    for (int64_t b = 0; b < batch; ++b)
      for (int64_t c = 0; c < channels; ++c) {
        const Real gi = g[b * channels + c] / frames;
        Real* gc = gx.data() + (b * channels + c) * frames;
        for (int64_t t = 0; t < frames; ++t) gc[t] += gi;
      }
  };
  return make_node<Real>({batch, channels}, std::move(out), {x},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> gather_rows(const Variable<Real>& x,
                           const std::vector<int64_t>& rows) {
  check_arg(x.rank() == 2, "gather_rows: input must be [M, D]");
  check_arg(!rows.empty(), "gather_rows: no rows");
  const int64_t m = x.dim(0), d = x.dim(1);
  for (int64_t r : rows) {
    check_arg(r >= 0 && r < m, "gather_rows: row index out of range");
  }
  const int64_t k = static_cast<int64_t>(rows.size());
  std::vector<Real> out(k * d);
  for (int64_t i = 0; i < k; ++i) {
    std::memcpy(out.data() + i * d, x.value().data() + rows[i] * d,
                d * sizeof(Real));
  }
  auto backprop = [x, rows, d](VarImpl<Real>& self) {
    if (!x.requires_grad()) return;
    auto& gx = x.impl()->grad_buffer();
    const Real* g = self.grad.data();
    for (size_t i = 0; i < rows.size(); ++i) {
      for (int64_t c = 0; c < d; ++c) {
        gx[rows[i] * d + c] += g[static_cast<int64_t>(i) * d + c];
      }
    }
  };
  return make_node<Real>({k, d}, std::move(out), {x}, std::move(backprop));
}

template <typename Real>
Variable<Real> frames_to_rows(const Variable<Real>& x) {
  check_arg(x.rank() == 3, "frames_to_rows: input must be [B, C, N]");
  const int64_t batch = x.dim(0), channels = x.dim(1), frames = x.dim(2);
  std::vector<Real> out(x.numel());
  const Real* xp = x.value().data();
  for (int64_t b = 0; b < batch; ++b)
    for (int64_t c = 0; c < channels; ++c)
      for (int64_t t = 0; t < frames; ++t) {
        out[(b * frames + t) * channels + c] =
            xp[(b * channels + c) * frames + t];
      }
  auto backprop = [x, batch, channels, frames](VarImpl<Real>& self) {
    if (!x.requires_grad()) return;
    auto& gx = x.impl()->grad_buffer();
    const Real* g = self.grad.data();
    for (int64_t b = 0; b < batch; ++b)
      for (int64_t c = 0; c < channels; ++c)
        for (int64_t t = 0; t < frames; ++t) {
          gx[(b * channels + c) * frames + t] +=
              g[(b * frames + t) * channels + c];
        }
  };
  return make_node<Real>({batch * frames, channels}, std::move(out), {x},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> concat_cols(const Variable<Real>& a, const Variable<Real>& b) {
  check_arg(a.rank() == 2 && b.rank() == 2 && a.dim(0) == b.dim(0),
            "concat_cols: inputs must be [M, *] with matching M");
  const int64_t rows = a.dim(0), ca = a.dim(1), cb = b.dim(1);
  std::vector<Real> out(rows * (ca + cb));
  for (int64_t r = 0; r < rows; ++r) {
    std::memcpy(out.data() + r * (ca + cb), a.value().data() + r * ca,
                ca * sizeof(Real));
    std::memcpy(out.data() + r * (ca + cb) + ca, b.value().data() + r * cb,
                cb * sizeof(Real));
  }
  auto backprop = [a, b, rows, ca, cb](VarImpl<Real>& self) {
    const Real* g = self.grad.data();
    if (a.requires_grad()) {
      auto& ga = a.impl()->grad_buffer();
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < ca; ++c) ga[r * ca + c] += g[r * (ca + cb) + c];
    }
    if (b.requires_grad()) {
      auto& gb = b.impl()->grad_buffer();
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cb; ++c)
          gb[r * cb + c] += g[r * (ca + cb) + ca + c];
    }
  };
  return make_node<Real>({rows, ca + cb}, std::move(out), {a, b},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> add(const Variable<Real>& a, const Variable<Real>& b) {
  check_arg(a.shape() == b.shape(), "add: shape mismatch " +
                                        shape_str(a.shape()) + " vs " +
                                        shape_str(b.shape()));
  std::vector<Real> out(a.numel());
  for (int64_t i = 0; i < a.numel(); ++i) out[i] = a.value()[i] + b.value()[i];
  auto backprop = [a, b](VarImpl<Real>& self) {
    const Real* g = self.grad.data();
    for (const auto& p : {a, b}) {
      if (!p.requires_grad()) continue;
      auto& gp = p.impl()->grad_buffer();
      for (int64_t i = 0; i < self.numel(); ++i) gp[i] += g[i];
    }
  };
  return make_node<Real>(a.shape(), std::move(out), {a, b},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> scale(const Variable<Real>& a, Real c) {
  std::vector<Real> out(a.numel());
  for (int64_t i = 0; i < a.numel(); ++i) out[i] = a.value()[i] * c;
  auto backprop = [a, c](VarImpl<Real>& self) {
    if (!a.requires_grad()) return;
    auto& ga = a.impl()->grad_buffer();
    const Real* g = self.grad.data();
    for (int64_t i = 0; i < self.numel(); ++i) ga[i] += g[i] * c;
  };
  return make_node<Real>(a.shape(), std::move(out), {a}, std::move(backprop));
}

template <typename Real>
Variable<Real> average(const std::vector<Variable<Real>>& scalars) {
  check_arg(!scalars.empty(), "average: no inputs");
  double acc = 0;
  for (const auto& s : scalars) {
    check_arg(s.numel() == 1, "average: inputs must be scalars");
    acc += s.item();
  }
  const Real k = Real(1) / static_cast<Real>(scalars.size());
  auto backprop = [scalars, k](VarImpl<Real>& self) {
    const Real g = self.grad[0] * k;
    for (const auto& s : scalars) {
      if (s.requires_grad()) s.impl()->grad_buffer()[0] += g;
    }
  };
  return make_node<Real>({1}, {static_cast<Real>(acc / scalars.size())},
                         scalars, std::move(backprop));
}

template <typename Real>
Variable<Real> loss_l1(const Variable<Real>& pred,
                       const Variable<Real>& target) {
  check_arg(pred.shape() == target.shape(), "loss_l1: shape mismatch");
  const int64_t n = pred.numel();
  check_arg(n >= 1, "loss_l1: empty input");
  double acc = 0;
  for (int64_t i = 0; i < n; ++i) {
    acc += std::abs(static_cast<double>(pred.value()[i] - target.value()[i]));
  }
  auto backprop = [pred, target, n](VarImpl<Real>& self) {
    const Real g = self.grad[0] / n;
    auto push = [&](const Variable<Real>& v, Real sgn) {
      if (!v.requires_grad()) return;
      auto& gv = v.impl()->grad_buffer();
      for (int64_t i = 0; i < n; ++i) {
        const Real d = pred.value()[i] - target.value()[i];
        gv[i] += sgn * g * (d > Real(0) ? Real(1) : (d < Real(0) ? Real(-1) : Real(0)));
      }
    };
    push(pred, Real(1));
    push(target, Real(-1));
  };
  return make_node<Real>({1}, {static_cast<Real>(acc / n)}, {pred, target},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> loss_mse(const Variable<Real>& pred,
                        const Variable<Real>& target) {
  check_arg(pred.shape() == target.shape(), "loss_mse: shape mismatch");
  const int64_t n = pred.numel();
  check_arg(n >= 1, "loss_mse: empty input");
  double acc = 0;
  for (int64_t i = 0; i < n; ++i) {
    const double d = pred.value()[i] - target.value()[i];
    acc += d * d;
  }
  auto backprop = [pred, target, n](VarImpl<Real>& self) {
    const Real g = self.grad[0] * Real(2) / n;
    auto push = [&](const Variable<Real>& v, Real sgn) {
      if (!v.requires_grad()) return;
      auto& gv = v.impl()->grad_buffer();
      for (int64_t i = 0; i < n; ++i) {
        gv[i] += sgn * g * (pred.value()[i] - target.value()[i]);
      }
    };
    push(pred, Real(1));
    push(target, Real(-1));
  };
  return make_node<Real>({1}, {static_cast<Real>(acc / n)}, {pred, target},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> loss_bce(const Variable<Real>& p_pos,
                        const Variable<Real>& p_neg, Real clamp_eps) {
  const int64_t np = p_pos.numel(), nn = p_neg.numel();
  check_arg(np >= 1 && nn >= 1, "loss_bce: empty inputs");
  for (Real v : p_pos.value())
    check_arg(v >= Real(0) && v <= Real(1),
              "loss_bce: positive probability outside [0, 1]");
  for (Real v : p_neg.value())
    check_arg(v >= Real(0) && v <= Real(1),
              "loss_bce: negative probability outside [0, 1]");
  const Real lo = clamp_eps, hi = Real(1) - clamp_eps;
  auto clamp = [lo, hi](Real v) { return std::min(std::max(v, lo), hi); };
  double acc = 0;
  for (Real v : p_pos.value()) acc -= std::log(static_cast<double>(clamp(v))) / np;
  for (Real v : p_neg.value())
    acc -= std::log(1.0 - static_cast<double>(clamp(v))) / nn;
  auto backprop = [p_pos, p_neg, np, nn, lo, hi, clamp](VarImpl<Real>& self) {
    const Real g = self.grad[0];
    if (p_pos.requires_grad()) {
      auto& gp = p_pos.impl()->grad_buffer();
      for (int64_t i = 0; i < np; ++i) {
        const Real v = p_pos.value()[i];
        if (v > lo && v < hi) gp[i] += -g / (v * np);
      }
    }
    if (p_neg.requires_grad()) {
      auto& gn = p_neg.impl()->grad_buffer();
      for (int64_t i = 0; i < nn; ++i) {
        const Real v = p_neg.value()[i];
        if (v > lo && v < hi) gn[i] += g / ((Real(1) - v) * nn);
      }
    }
  };
  return make_node<Real>({1}, {static_cast<Real>(acc)}, {p_pos, p_neg},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> softmax_xent(const Variable<Real>& logits,
                            const std::vector<int32_t>& labels) {
  check_arg(logits.rank() == 2, "softmax_xent: logits must be [N, K]");
  const int64_t rows = logits.dim(0), k = logits.dim(1);
  check_arg(static_cast<int64_t>(labels.size()) == rows,
            "softmax_xent: one label per row required");
  for (int32_t y : labels)
    check_arg(y >= 0 && y < k, "softmax_xent: label out of range");
  const Real* lp = logits.value().data();
  double acc = 0;
  for (int64_t r = 0; r < rows; ++r) {
    const Real* row = lp + r * k;
    Real m = row[0];
    for (int64_t j = 1; j < k; ++j) m = std::max(m, row[j]);
    double lse = 0;
    for (int64_t j = 0; j < k; ++j) lse += std::exp(static_cast<double>(row[j] - m));
    lse = std::log(lse) + static_cast<double>(m);
    acc += lse - static_cast<double>(row[labels[r]]);
  }
  auto backprop = [logits, labels, rows, k](VarImpl<Real>& self) {
    if (!logits.requires_grad()) return;
    const Real g = self.grad[0] / rows;
    auto& gl = logits.impl()->grad_buffer();
    const Real* lp2 = logits.value().data();
    for (int64_t r = 0; r < rows; ++r) {
      const Real* row = lp2 + r * k;
      Real m = row[0];
      for (int64_t j = 1; j < k; ++j) m = std::max(m, row[j]);
      double z = 0;
      for (int64_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j] - m));
      for (int64_t j = 0; j < k; ++j) {
        const Real p =
            static_cast<Real>(std::exp(static_cast<double>(row[j] - m)) / z);
        gl[r * k + j] += g * (p - (labels[r] == j ? Real(1) : Real(0)));
      }
    }
  };
  return make_node<Real>({1}, {static_cast<Real>(acc / rows)}, {logits},
                         std::move(backprop));
}

template <typename Real>
std::vector<Real> softmax_rows(const Variable<Real>& logits) {
  check_arg(logits.rank() == 2, "softmax_rows: logits must be [N, K]");
  const int64_t rows = logits.dim(0), k = logits.dim(1);
  std::vector<Real> out(rows * k);
  const Real* lp = logits.value().data();
  for (int64_t r = 0; r < rows; ++r) {
    const Real* row = lp + r * k;
    Real m = row[0];
    for (int64_t j = 1; j < k; ++j) m = std::max(m, row[j]);
    double z = 0;
    for (int64_t j = 0; j < k; ++j) z += std::exp(static_cast<double>(row[j] - m));
    for (int64_t j = 0; j < k; ++j) {
      out[r * k + j] =
          static_cast<Real>(std::exp(static_cast<double>(row[j] - m)) / z);
    }
  }
  return out;
}

template <typename Real>
Variable<Real> sinc_kernels(const Variable<Real>& f1, const Variable<Real>& band,
                            int64_t width, Real min_band, Real nyquist) {
  check_arg(width >= 3 && width % 2 == 1, "sinc_kernels: width must be odd");
  check_arg(f1.numel() == band.numel() && f1.numel() >= 1,
            "sinc_kernels: f1/band must have one entry per filter");
  check_arg(min_band > Real(0) && nyquist > min_band,
            "sinc_kernels: invalid band limits");
  const int64_t filters = f1.numel();
  const int64_t half = (width - 1) / 2;

  std::vector<Real> window(width);
  for (int64_t i = 0; i < width; ++i) {
    window[i] = Real(0.54) - Real(0.46) * std::cos(Real(2) * Real(M_PI) * i /
                                                   Real(width - 1));
  }

  // Effective cutoffs with clamp masks for the backward pass.
  std::vector<Real> lo(filters), hi(filters);
  std::vector<Real> dlo_df1(filters), dhi_dband(filters), dhi_dlo(filters);
  for (int64_t i = 0; i < filters; ++i) {
    const Real f1v = f1.value()[i], bv = band.value()[i];
    Real a = std::abs(f1v);
    Real da = f1v > Real(0) ? Real(1) : (f1v < Real(0) ? Real(-1) : Real(0));
    const Real a_cap = nyquist - min_band;
    if (a > a_cap) {
      a = a_cap;
      da = Real(0);
    }
    Real h = a + min_band + std::abs(bv);
    Real dh_db = bv > Real(0) ? Real(1) : (bv < Real(0) ? Real(-1) : Real(0));
    Real dh_da = Real(1);
    if (h > nyquist) {
      h = nyquist;
      dh_db = Real(0);
      dh_da = Real(0);
    }
    lo[i] = a;
    hi[i] = h;
    dlo_df1[i] = da;
    dhi_dband[i] = dh_db;
    dhi_dlo[i] = dh_da;
  }

  auto lowpass = [](Real f, int64_t n) {
    // 2f*sinc(2*pi*f*n) = sin(2*pi*f*n)/(pi*n); the n = 0 limit is 2f.
    if (n == 0) return Real(2) * f;
    return std::sin(Real(2) * Real(M_PI) * f * n) / (Real(M_PI) * n);
  };

  std::vector<Real> out(filters * width);
  for (int64_t i = 0; i < filters; ++i) {
    for (int64_t k = 0; k < width; ++k) {
      const int64_t n = k - half;
      out[i * width + k] = (lowpass(hi[i], n) - lowpass(lo[i], n)) * window[k];
    }
  }

  auto backprop = [f1, band, filters, width, half, window, lo, hi, dlo_df1,
                   dhi_dband, dhi_dlo](VarImpl<Real>& self) {
    const Real* g = self.grad.data();
    auto dlowpass = [](Real f, int64_t n) {
      // d/df of sin(2*pi*f*n)/(pi*n) is 2 cos(2*pi*f*n) for all n.
      return Real(2) * std::cos(Real(2) * Real(M_PI) * f * n);
    };
    for (int64_t i = 0; i < filters; ++i) {
      double acc_lo = 0, acc_hi = 0;
      for (int64_t k = 0; k < width; ++k) {
        const int64_t n = k - half;
        const Real gi = g[i * width + k] * window[k];
        acc_hi += gi * dlowpass(hi[i], n);
        acc_lo -= gi * dlowpass(lo[i], n);
      }
      // hi depends on lo through hi = lo + min_band + |band| when unclamped.
      const double d_lo_total = acc_lo + acc_hi * dhi_dlo[i];
      if (f1.requires_grad()) {
        f1.impl()->grad_buffer()[i] +=
            static_cast<Real>(d_lo_total) * dlo_df1[i];
      }
      if (band.requires_grad()) {
        band.impl()->grad_buffer()[i] +=
            static_cast<Real>(acc_hi) * dhi_dband[i];
      }
    }
  };
  return make_node<Real>({filters, 1, width}, std::move(out), {f1, band},
                         std::move(backprop));
}

#define PASE_INSTANTIATE_OPS(Real)                                             \
  template Variable<Real> prelu(const Variable<Real>&, const Variable<Real>&); \
  template Variable<Real> batchnorm(                                           \
      const Variable<Real>&, const Variable<Real>*, const Variable<Real>*,     \
      std::vector<Real>*, std::vector<Real>*, bool, bool, Real, Real);         \
  template Variable<Real> linear(const Variable<Real>&, const Variable<Real>&, \
                                 const Variable<Real>*);                       \
  template Variable<Real> sigmoid(const Variable<Real>&);                      \
  template Variable<Real> gather_span(const Variable<Real>&,                   \
                                      const std::vector<FrameSpan>&);          \
  template Variable<Real> chunk_mean(const Variable<Real>&);                   \
  template Variable<Real> gather_rows(const Variable<Real>&,                   \
                                      const std::vector<int64_t>&);            \
  template Variable<Real> frames_to_rows(const Variable<Real>&);               \
  template Variable<Real> concat_cols(const Variable<Real>&,                   \
                                      const Variable<Real>&);                  \
  template Variable<Real> add(const Variable<Real>&, const Variable<Real>&);   \
  template Variable<Real> scale(const Variable<Real>&, Real);                  \
  template Variable<Real> average(const std::vector<Variable<Real>>&);         \
  template Variable<Real> loss_l1(const Variable<Real>&,                       \
                                  const Variable<Real>&);                      \
  template Variable<Real> loss_mse(const Variable<Real>&,                      \
                                   const Variable<Real>&);                     \
  template Variable<Real> loss_bce(const Variable<Real>&,                      \
                                   const Variable<Real>&, Real);               \
  template Variable<Real> softmax_xent(const Variable<Real>&,                  \
                                       const std::vector<int32_t>&);           \
  template std::vector<Real> softmax_rows(const Variable<Real>&);              \
  template Variable<Real> sinc_kernels(const Variable<Real>&,                  \
                                       const Variable<Real>&, int64_t, Real,   \
                                       Real);

PASE_INSTANTIATE_OPS(float)
PASE_INSTANTIATE_OPS(double)

}  // namespace pase
