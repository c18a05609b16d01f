// pase/conv_ops.cc

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
#include <cstring>
#include <utility>

#include "pase/ops.h"
#include "pase/parallel.h"

namespace pase {

namespace {

template <typename Real>
using MatRM = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapM = Eigen::Map<MatRM<Real>>;
template <typename Real>
using CMapM = Eigen::Map<const MatRM<Real>>;

// Unrolls sliding windows of x [C, L] into cols [C*W, lout]; positions that
// fall into the padding are zero.
template <typename Real>
void im2col(const Real* x, int64_t channels, int64_t length, int64_t width,
            int64_t stride, int64_t pad_left, int64_t lout, Real* cols) {
  for (int64_t c = 0; c < channels; ++c) {
    const Real* xc = x + c * length;
    for (int64_t w = 0; w < width; ++w) {
      Real* row = cols + (c * width + w) * lout;
      for (int64_t t = 0; t < lout; ++t) {
        int64_t j = t * stride + w - pad_left;
        row[t] = (j >= 0 && j < length) ? xc[j] : Real(0);
      }
    }
  }
}

// Adjoint of im2col: scatter-adds cols back into x [C, L].
template <typename Real>
void col2im_add(const Real* cols, int64_t channels, int64_t length,
                int64_t width, int64_t stride, int64_t pad_left, int64_t lout,
                Real* x) {
  for (int64_t c = 0; c < channels; ++c) {
    Real* xc = x + c * length;
    for (int64_t w = 0; w < width; ++w) {
      const Real* row = cols + (c * width + w) * lout;
      for (int64_t t = 0; t < lout; ++t) {
        int64_t j = t * stride + w - pad_left;
        if (j >= 0 && j < length) xc[j] += row[t];
      }
    }
  }
}

template <typename Real>
void add_into(std::vector<Real>& acc, const std::vector<Real>& part) {
  for (size_t i = 0; i < acc.size(); ++i) acc[i] += part[i];
}

}  // namespace

std::pair<int64_t, int64_t> conv_same_padding(int64_t length, int64_t width,
                                              int64_t stride) {
  int64_t out = (length + stride - 1) / stride;
  int64_t total = (out - 1) * stride + width - length;
  if (total < 0) total = 0;
  return {total / 2, total - total / 2};
}

template <typename Real>
Variable<Real> conv1d(const Variable<Real>& x, const Variable<Real>& kernel,
                      int64_t stride, int64_t pad_left, int64_t pad_right) {
  check_arg(x.rank() == 3, "conv1d: input must be [B, C_in, L]");
  check_arg(kernel.rank() == 3, "conv1d: kernel must be [C_out, C_in, W]");
  const int64_t batch = x.dim(0), cin = x.dim(1), length = x.dim(2);
  const int64_t cout = kernel.dim(0), width = kernel.dim(2);
  check_arg(kernel.dim(1) == cin,
            "conv1d: kernel C_in " + std::to_string(kernel.dim(1)) +
                " does not match input channels " + std::to_string(cin));
  check_arg(width >= 1 && stride >= 1 && pad_left >= 0 && pad_right >= 0,
            "conv1d: invalid width/stride/padding");
  check_arg(length + pad_left + pad_right >= width,
            "conv1d: input shorter than kernel");
  const int64_t lout = (length + pad_left + pad_right - width) / stride + 1;

  std::vector<Real> out(batch * cout * lout);
  const Real* xp = x.value().data();
  const Real* kp = kernel.value().data();
  parallel_for(batch, [&](int64_t b) {
    std::vector<Real> cols(cin * width * lout);
    im2col(xp + b * cin * length, cin, length, width, stride, pad_left, lout,
           cols.data());
    CMapM<Real> k(kp, cout, cin * width);
    CMapM<Real> c(cols.data(), cin * width, lout);
    MapM<Real> o(out.data() + b * cout * lout, cout, lout);
    o.noalias() = k * c;
  });

  auto backprop = [x, kernel, stride, pad_left, batch, cin, length, cout,
                   width, lout](VarImpl<Real>& self) {
    const Real* gout = self.grad.data();
    const Real* kp2 = kernel.value().data();
    const Real* xp2 = x.value().data();
    if (x.requires_grad()) {
      auto& gx = x.impl()->grad_buffer();
      parallel_for(batch, [&](int64_t b) {
        std::vector<Real> dcols(cin * width * lout);
        CMapM<Real> k(kp2, cout, cin * width);
        CMapM<Real> go(gout + b * cout * lout, cout, lout);
        MapM<Real> dc(dcols.data(), cin * width, lout);
        dc.noalias() = k.transpose() * go;
        col2im_add(dcols.data(), cin, length, width, stride, pad_left, lout,
                   gx.data() + b * cin * length);
      });
    }
    if (kernel.requires_grad()) {
      std::vector<std::vector<Real>> parts(batch);
      parallel_for(batch, [&](int64_t b) {
        std::vector<Real> cols(cin * width * lout);
        im2col(xp2 + b * cin * length, cin, length, width, stride, pad_left,
               lout, cols.data());
        parts[b].resize(cout * cin * width);
        CMapM<Real> go(gout + b * cout * lout, cout, lout);
        CMapM<Real> c(cols.data(), cin * width, lout);
        MapM<Real> dk(parts[b].data(), cout, cin * width);
        dk.noalias() = go * c.transpose();
      });
      auto& gk = kernel.impl()->grad_buffer();
      for (int64_t b = 0; b < batch; ++b) add_into(gk, parts[b]);
    }
  };
  return make_node<Real>({batch, cout, lout}, std::move(out), {x, kernel},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> tconv1d(const Variable<Real>& x, const Variable<Real>& kernel,
                       int64_t stride) {
  check_arg(x.rank() == 3, "tconv1d: input must be [B, C_in, N]");
  check_arg(kernel.rank() == 3, "tconv1d: kernel must be [C_in, C_out, W]");
  const int64_t batch = x.dim(0), cin = x.dim(1), nin = x.dim(2);
  const int64_t cout = kernel.dim(1), width = kernel.dim(2);
  check_arg(kernel.dim(0) == cin,
            "tconv1d: kernel C_in " + std::to_string(kernel.dim(0)) +
                " does not match input channels " + std::to_string(cin));
  check_arg(stride >= 1 && width >= stride,
            "tconv1d: requires W >= S >= 1");
  const int64_t lout = nin * stride;
  const auto [pad_left, pad_right] = conv_same_padding(lout, width, stride);
  (void)pad_right;

  std::vector<Real> out(batch * cout * lout, Real(0));
  const Real* xp = x.value().data();
  const Real* kp = kernel.value().data();
  parallel_for(batch, [&](int64_t b) {
    std::vector<Real> cols(cout * width * nin);
    CMapM<Real> k(kp, cin, cout * width);
    CMapM<Real> xb(xp + b * cin * nin, cin, nin);
    MapM<Real> c(cols.data(), cout * width, nin);
    c.noalias() = k.transpose() * xb;
    col2im_add(cols.data(), cout, lout, width, stride, pad_left, nin,
               out.data() + b * cout * lout);
  });

  auto backprop = [x, kernel, stride, pad_left, batch, cin, nin, cout, width,
                   lout](VarImpl<Real>& self) {
    const Real* gout = self.grad.data();
    const Real* kp2 = kernel.value().data();
    const Real* xp2 = x.value().data();
    if (x.requires_grad()) {
      auto& gx = x.impl()->grad_buffer();
      parallel_for(batch, [&](int64_t b) {
        std::vector<Real> cols(cout * width * nin);
        im2col(gout + b * cout * lout, cout, lout, width, stride, pad_left,
               nin, cols.data());
        CMapM<Real> k(kp2, cin, cout * width);
        CMapM<Real> c(cols.data(), cout * width, nin);
        MapM<Real> gxb(gx.data() + b * cin * nin, cin, nin);
        gxb.noalias() += k * c;
      });
    }
    if (kernel.requires_grad()) {
      std::vector<std::vector<Real>> parts(batch);
      parallel_for(batch, [&](int64_t b) {
        std::vector<Real> cols(cout * width * nin);
        im2col(gout + b * cout * lout, cout, lout, width, stride, pad_left,
               nin, cols.data());
        parts[b].resize(cin * cout * width);
        CMapM<Real> xb(xp2 + b * cin * nin, cin, nin);
        CMapM<Real> c(cols.data(), cout * width, nin);
        MapM<Real> dk(parts[b].data(), cin, cout * width);
        dk.noalias() = xb * c.transpose();
      });
      auto& gk = kernel.impl()->grad_buffer();
      for (int64_t b = 0; b < batch; ++b) add_into(gk, parts[b]);
    }
  };
  return make_node<Real>({batch, cout, lout}, std::move(out), {x, kernel},
                         std::move(backprop));
}

template <typename Real>
Variable<Real> mlp1d(const Variable<Real>& x, const Variable<Real>& w1,
                     const Variable<Real>& b1, const Variable<Real>& slopes,
                     const Variable<Real>& w2, const Variable<Real>& b2) {
  check_arg(x.rank() == 3, "mlp1d: input must be [B, C, L]");
  const int64_t batch = x.dim(0), cin = x.dim(1), length = x.dim(2);
  const int64_t hidden = w1.dim(0), cout = w2.dim(0);
  check_arg(w1.rank() == 2 && w1.dim(1) == cin, "mlp1d: w1 must be [H, C]");
  check_arg(b1.numel() == hidden && slopes.numel() == hidden,
            "mlp1d: b1/slopes must be [H]");
  check_arg(w2.rank() == 2 && w2.dim(1) == hidden, "mlp1d: w2 must be [O, H]");
  check_arg(b2.numel() == cout, "mlp1d: b2 must be [O]");

  auto hidden_pass = [=](const Real* xb, MatRM<Real>& h1, MatRM<Real>& act) {
    CMapM<Real> xm(xb, cin, length);
    CMapM<Real> w1m(w1.value().data(), hidden, cin);
    h1.noalias() = w1m * xm;
    h1.colwise() += Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>>(
        b1.value().data(), hidden);
    act = h1;
    const Real* sl = slopes.value().data();
    for (int64_t h = 0; h < hidden; ++h) {
      for (int64_t t = 0; t < length; ++t) {
        if (h1(h, t) < Real(0)) act(h, t) = sl[h] * h1(h, t);
      }
    }
  };

  std::vector<Real> out(batch * cout * length);
  const Real* xp = x.value().data();
  parallel_for(batch, [&](int64_t b) {
    MatRM<Real> h1, act;
    hidden_pass(xp + b * cin * length, h1, act);
    CMapM<Real> w2m(w2.value().data(), cout, hidden);
    MapM<Real> o(out.data() + b * cout * length, cout, length);
    o.noalias() = w2m * act;
    o.colwise() += Eigen::Map<const Eigen::Matrix<Real, Eigen::Dynamic, 1>>(
        b2.value().data(), cout);
  });

  auto backprop = [=](VarImpl<Real>& self) {
    const Real* gout = self.grad.data();
    const Real* xp2 = x.value().data();
    struct Part {
      MatRM<Real> dw1, dw2;
      Eigen::Matrix<Real, Eigen::Dynamic, 1> db1, db2, dslope;
      MatRM<Real> dx;
    };
    std::vector<Part> parts(batch);
    parallel_for(batch, [&](int64_t b) {
      MatRM<Real> h1, act;
      hidden_pass(xp2 + b * cin * length, h1, act);
      CMapM<Real> go(gout + b * cout * length, cout, length);
      CMapM<Real> w2m(w2.value().data(), cout, hidden);
      CMapM<Real> w1m(w1.value().data(), hidden, cin);
      CMapM<Real> xm(xp2 + b * cin * length, cin, length);
      const Real* sl = slopes.value().data();

      MatRM<Real> dact = w2m.transpose() * go;  // [H, L]
      Part& p = parts[b];
      p.dslope.setZero(hidden);
      MatRM<Real> dh1 = dact;
      for (int64_t h = 0; h < hidden; ++h) {
        for (int64_t t = 0; t < length; ++t) {
          if (h1(h, t) < Real(0)) {
            p.dslope(h) += dact(h, t) * h1(h, t);
            dh1(h, t) = dact(h, t) * sl[h];
          }
        }
      }
      if (w2.requires_grad()) p.dw2.noalias() = go * act.transpose();
      if (b2.requires_grad()) p.db2 = go.rowwise().sum();
      if (w1.requires_grad()) p.dw1.noalias() = dh1 * xm.transpose();
      if (b1.requires_grad()) p.db1 = dh1.rowwise().sum();
      if (x.requires_grad()) p.dx.noalias() = w1m.transpose() * dh1;
    });
    for (int64_t b = 0; b < batch; ++b) {
      Part& p = parts[b];
      if (x.requires_grad()) {
        MapM<Real> gx(x.impl()->grad_buffer().data() + b * cin * length, cin,
                      length);
        gx += p.dx;
      }
      if (w1.requires_grad())
        MapM<Real>(w1.impl()->grad_buffer().data(), hidden, cin) += p.dw1;
      if (b1.requires_grad())
        Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>>(
            b1.impl()->grad_buffer().data(), hidden) += p.db1;
      if (slopes.requires_grad())
        Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>>(
            slopes.impl()->grad_buffer().data(), hidden) += p.dslope;
      if (w2.requires_grad())
        MapM<Real>(w2.impl()->grad_buffer().data(), cout, hidden) += p.dw2;
      if (b2.requires_grad())
        Eigen::Map<Eigen::Matrix<Real, Eigen::Dynamic, 1>>(
            b2.impl()->grad_buffer().data(), cout) += p.db2;
    }
  };
  return make_node<Real>({batch, cout, length}, std::move(out),
                         {x, w1, b1, slopes, w2, b2}, std::move(backprop));
}

template Variable<float> conv1d(const Variable<float>&, const Variable<float>&,
                                int64_t, int64_t, int64_t);
template Variable<double> conv1d(const Variable<double>&,
                                 const Variable<double>&, int64_t, int64_t,
                                 int64_t);
template Variable<float> tconv1d(const Variable<float>&,
                                 const Variable<float>&, int64_t);
template Variable<double> tconv1d(const Variable<double>&,
                                  const Variable<double>&, int64_t);
template Variable<float> mlp1d(const Variable<float>&, const Variable<float>&,
                               const Variable<float>&, const Variable<float>&,
                               const Variable<float>&, const Variable<float>&);
template Variable<double> mlp1d(const Variable<double>&,
                                const Variable<double>&,
                                const Variable<double>&,
                                const Variable<double>&,
                                const Variable<double>&,
                                const Variable<double>&);

}  // namespace pase
