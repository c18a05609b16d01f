// pase/tensor-ops-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <complex>
#include <vector>

#include "doctest.h"
#include "pase/adam.h"
#include "pase/gradcheck.h"
#include "pase/ops.h"
#include "pase/rng.h"
#include "pase/tensor.h"

using namespace pase;

namespace {

std::vector<double> random_vec(Rng& rng, int64_t n, double lo = -1.0,
                               double hi = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = rng.uniform(lo, hi);
  return v;
}

// Direct sliding dot-product convolution, independent of the graph path.
std::vector<double> conv_oracle(const std::vector<double>& x, int64_t cin,
                                int64_t length,
                                const std::vector<double>& kernel, int64_t cout,
                                int64_t width, int64_t stride, int64_t pad_left,
                                int64_t pad_right) {
  const int64_t lout = (length + pad_left + pad_right - width) / stride + 1;
  std::vector<double> out(cout * lout, 0.0);
  for (int64_t co = 0; co < cout; ++co) {
    for (int64_t t = 0; t < lout; ++t) {
      double acc = 0;
      for (int64_t ci = 0; ci < cin; ++ci) {
        for (int64_t w = 0; w < width; ++w) {
          const int64_t j = t * stride + w - pad_left;
          if (j >= 0 && j < length) {
            acc += kernel[(co * cin + ci) * width + w] * x[ci * length + j];
          }
        }
      }
      out[co * lout + t] = acc;
    }
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0;
  for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

// Magnitude of the frequency response of a symmetric FIR kernel at f (in
// cycles/sample), by direct evaluation.
double fir_mag(std::span<const double> kernel, double f) {
  std::complex<double> acc(0, 0);
  for (size_t n = 0; n < kernel.size(); ++n) {
    acc += kernel[n] * std::exp(std::complex<double>(0, -2.0 * M_PI * f * n));
  }
  return std::abs(acc);
}

}  // namespace

TEST_CASE("conv1d matches the stated examples") {
  auto x = Variabled::from_data({1, 1, 4}, {1, 2, 3, 4});
  auto k = Variabled::from_data({1, 1, 3}, {1, 0, -1});
  auto y = conv1d(x, k, 1, 0, 0);
  REQUIRE(y.shape() == Shape{1, 1, 2});
  CHECK(y.value()[0] == doctest::Approx(-2.0));
  CHECK(y.value()[1] == doctest::Approx(-2.0));

  // Identity kernel leaves the input unchanged.
  Rng rng(7);
  auto xr = Variabled::from_data({1, 1, 9}, random_vec(rng, 9));
  auto ki = Variabled::from_data({1, 1, 1}, {1.0});
  auto yi = conv1d(xr, ki, 1, 0, 0);
  for (int64_t i = 0; i < 9; ++i) CHECK(yi.value()[i] == xr.value()[i]);

  // Output length law at the first-layer geometry.
  auto xl = Variabled::zeros({1, 1, 16000});
  auto kl = Variabled::zeros({4, 1, 251});
  CHECK(conv1d(xl, kl, 1, 125, 125).dim(2) == 16000);

  // Channel mismatch is a shape error.
  auto kbad = Variabled::zeros({1, 2, 3});
  CHECK_THROWS_AS(conv1d(x, kbad, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("conv1d agrees with the sliding dot-product oracle") {
  Rng rng(11);
  for (int rep = 0; rep < 5; ++rep) {
    const int64_t cin = 1 + rng.uniform_int(0, 2);
    const int64_t cout = 1 + rng.uniform_int(0, 2);
    const int64_t width = 1 + rng.uniform_int(0, 4);
    const int64_t stride = 1 + rng.uniform_int(0, 2);
    const int64_t length = width + rng.uniform_int(0, 12);
    const int64_t pl = rng.uniform_int(0, 2), pr = rng.uniform_int(0, 2);
    auto xv = random_vec(rng, cin * length);
    auto kv = random_vec(rng, cout * cin * width);
    auto y = conv1d(Variabled::from_data({1, cin, length}, xv),
                    Variabled::from_data({cout, cin, width}, kv), stride, pl, pr);
    auto ref = conv_oracle(xv, cin, length, kv, cout, width, stride, pl, pr);
    REQUIRE(y.numel() == static_cast<int64_t>(ref.size()));
    for (size_t i = 0; i < ref.size(); ++i) {
      CHECK(y.value()[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("tconv1d upsamples by exactly the stride product") {
  auto e = Variabled::zeros({1, 2, 100});
  auto k1 = Variabled::zeros({2, 2, 8});
  auto k2 = Variabled::zeros({2, 2, 8});
  auto k3 = Variabled::zeros({2, 1, 20});
  auto u = tconv1d(tconv1d(tconv1d(e, k1, 4), k2, 4), k3, 10);
  CHECK(u.shape() == Shape{1, 1, 16000});

  auto one = Variabled::from_data({1, 1, 1}, {0.3});
  auto ki = Variabled::from_data({1, 1, 1}, {1.0});
  auto idy = tconv1d(one, ki, 1);
  CHECK(idy.shape() == Shape{1, 1, 1});
  CHECK(idy.value()[0] == doctest::Approx(0.3));
}

TEST_CASE("conv1d and tconv1d are adjoint") {
  Rng rng(23);
  for (int rep = 0; rep < 8; ++rep) {
    const int64_t cin = 1 + rng.uniform_int(0, 2);
    const int64_t cout = 1 + rng.uniform_int(0, 2);
    const int64_t stride = 1 + rng.uniform_int(0, 3);
    const int64_t width = stride + rng.uniform_int(0, 4);
    const int64_t n = 1 + rng.uniform_int(0, 5);
    const int64_t length = n * stride;
    const auto [pl, pr] = conv_same_padding(length, width, stride);

    auto xv = random_vec(rng, cin * length);
    auto yv = random_vec(rng, cout * n);
    auto kv = random_vec(rng, cout * cin * width);

    auto cx = conv1d(Variabled::from_data({1, cin, length}, xv),
                     Variabled::from_data({cout, cin, width}, kv), stride, pl, pr);
    REQUIRE(cx.dim(2) == n);
    auto ty = tconv1d(Variabled::from_data({1, cout, n}, yv),
                      Variabled::from_data({cout, cin, width}, kv), stride);
    REQUIRE(ty.dim(2) == length);

    const double lhs = dot(cx.value(), yv);
    const double rhs = dot(xv, ty.value());
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("prelu values and slope gradient") {
  auto x = Variabled::from_data({2}, {3.0, -2.0});
  auto a = Variabled::from_data({2}, {0.25, 0.25}, true);
  auto y = prelu(x, a);
  CHECK(y.value()[0] == doctest::Approx(3.0));
  CHECK(y.value()[1] == doctest::Approx(-0.5));

  // d(sum)/da at x = -2 is -2.
  auto x1 = Variabled::from_data({1}, {-2.0});
  auto a1 = Variabled::from_data({1}, {0.25}, true);
  auto y1 = prelu(x1, a1);
  auto l = scale(y1, 1.0);  // scalar passthrough
  backward(l);
  CHECK(a1.grad()[0] == doctest::Approx(-2.0));
}

TEST_CASE("batchnorm normalizes as stated") {
  std::vector<double> rm{0.0}, rv{1.0};
  auto x = Variabled::from_data({1, 1, 3}, {1.0, 2.0, 3.0});
  auto y = batchnorm<double>(x, nullptr, nullptr, &rm, &rv, true, false, 0.1,
                             1e-12);
  CHECK(y.value()[0] == doctest::Approx(-1.2247).epsilon(1e-3));
  CHECK(y.value()[1] == doctest::Approx(0.0));
  CHECK(y.value()[2] == doctest::Approx(1.2247).epsilon(1e-3));

  // A constant channel maps to zeros.
  auto xc = Variabled::full({1, 1, 5}, 4.2);
  auto yc = batchnorm<double>(xc, nullptr, nullptr, &rm, &rv, true, false, 0.1,
                              1e-5);
  for (double v : yc.value()) CHECK(std::abs(v) < 1e-9);

  // Train-phase output is standardized per channel.
  Rng rng(3);
  auto xr = Variabled::from_data({4, 3, 16}, random_vec(rng, 4 * 3 * 16));
  std::vector<double> rm3(3, 0.0), rv3(3, 1.0);
  auto yr = batchnorm<double>(xr, nullptr, nullptr, &rm3, &rv3, true, true, 0.1,
                              1e-12);
  for (int64_t c = 0; c < 3; ++c) {
    double mean = 0, var = 0;
    for (int64_t b = 0; b < 4; ++b)
      for (int64_t t = 0; t < 16; ++t) mean += yr.value()[(b * 3 + c) * 16 + t];
    mean /= 64;
    for (int64_t b = 0; b < 4; ++b)
      for (int64_t t = 0; t < 16; ++t) {
        double d = yr.value()[(b * 3 + c) * 16 + t] - mean;
        var += d * d;
      }
    var /= 64;
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(var - 1.0) < 1e-4);
  }

  // Empty batch is rejected.
  auto xe = Variabled::zeros({1, 1, 0});
  CHECK_THROWS_AS(batchnorm<double>(xe, nullptr, nullptr, &rm, &rv, true, false,
                                    0.1, 1e-5),
                  std::invalid_argument);
}

TEST_CASE("linear affine map") {
  auto x = Variabled::from_data({1, 2}, {1.0, 2.0});
  auto wid = Variabled::from_data({2, 2}, {1.0, 0.0, 0.0, 1.0});
  auto y = linear<double>(x, wid, nullptr);
  CHECK(y.value()[0] == doctest::Approx(1.0));
  CHECK(y.value()[1] == doctest::Approx(2.0));

  auto wz = Variabled::zeros({2, 2});
  auto b = Variabled::from_data({2}, {0.5, -1.0});
  auto yb = linear(x, wz, &b);
  CHECK(yb.value()[0] == doctest::Approx(0.5));
  CHECK(yb.value()[1] == doctest::Approx(-1.0));

  // 2x2 case against a hand computation.
  auto w = Variabled::from_data({2, 2}, {3.0, 4.0, 5.0, 6.0});
  auto yh = linear(x, w, &b);
  CHECK(yh.value()[0] == doctest::Approx(1 * 3 + 2 * 4 + 0.5));
  CHECK(yh.value()[1] == doctest::Approx(1 * 5 + 2 * 6 - 1.0));

  auto xbad = Variabled::zeros({1, 3});
  CHECK_THROWS_AS(linear<double>(xbad, w, nullptr), std::invalid_argument);
}

TEST_CASE("losses match hand-evaluated cases") {
  auto p = Variabled::from_data({2}, {0.0, 1.0});
  auto t = Variabled::from_data({2}, {1.0, 1.0});
  CHECK(loss_l1(p, t).item() == doctest::Approx(0.5));
  CHECK(loss_l1(t, t).item() == doctest::Approx(0.0));

  auto p2 = Variabled::from_data({2}, {0.0, 2.0});
  auto z2 = Variabled::zeros({2});
  CHECK(loss_mse(p2, z2).item() == doctest::Approx(2.0));
  CHECK(loss_mse(z2, p2).item() == doctest::Approx(2.0));  // symmetric
  CHECK(loss_mse(p2, p2).item() == doctest::Approx(0.0));

  Rng rng(5);
  auto a = random_vec(rng, 64);
  auto b = random_vec(rng, 64);
  double l1 = 0;
  for (int i = 0; i < 64; ++i) l1 += std::abs(a[i] - b[i]);
  l1 /= 64;
  CHECK(loss_l1(Variabled::from_data({64}, a), Variabled::from_data({64}, b))
            .item() == doctest::Approx(l1).epsilon(1e-12));
}

TEST_CASE("loss_bce follows the two-sided cross-entropy") {
  auto half = Variabled::from_data({1}, {0.5});
  CHECK(loss_bce(half, half).item() == doctest::Approx(2.0 * std::log(2.0)));

  auto p09 = Variabled::from_data({1}, {0.9});
  auto p01 = Variabled::from_data({1}, {0.1});
  CHECK(loss_bce(p09, p01).item() == doctest::Approx(-2.0 * std::log(0.9)));
  CHECK(loss_bce(p09, p01).item() == doctest::Approx(0.2107).epsilon(1e-3));

  // Perfect discrimination drives the loss to zero.
  auto phi = Variabled::from_data({1}, {1.0 - 1e-9});
  auto plo = Variabled::from_data({1}, {1e-9});
  CHECK(loss_bce(phi, plo).item() < 1e-6);

  auto bad = Variabled::from_data({1}, {1.5});
  CHECK_THROWS_AS(loss_bce(bad, half), std::invalid_argument);

  // Non-negative on random probabilities.
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto pp = Variabled::from_data({4}, random_vec(rng, 4, 0.01, 0.99));
    auto pn = Variabled::from_data({4}, random_vec(rng, 4, 0.01, 0.99));
    CHECK(loss_bce(pp, pn).item() >= 0.0);
  }
}

TEST_CASE("adam steps follow the scalar recursion") {
  // First step moves by about -lr * sign(g).
  auto theta = Variabled::from_data({1}, {0.0}, true);
  AdamConfig<double> cfg;
  cfg.learning_rate = 1e-2;
  AdamOptimizer<double> opt({theta}, cfg);
  theta.grad()[0] = 3.7;
  opt.step();
  CHECK(theta.value()[0] == doctest::Approx(-1e-2).epsilon(1e-6));

  // Zero gradient leaves the parameter unchanged.
  auto frozen = Variabled::from_data({1}, {1.25}, true);
  AdamOptimizer<double> opt2({frozen}, cfg);
  frozen.grad()[0] = 0.0;
  opt2.step();
  CHECK(frozen.value()[0] == doctest::Approx(1.25));

  // 200 steps on f(theta) = theta^2 from 1.0, lr 0.05, vs an independent
  // recursion of the same update rule.
  auto th = Variabled::from_data({1}, {1.0}, true);
  AdamConfig<double> c3;
  c3.learning_rate = 0.05;
  AdamOptimizer<double> opt3({th}, c3);
  double ref = 1.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 200; ++t) {
    th.zero_grad();
    th.grad()[0] = 2.0 * th.value()[0];
    opt3.step();
    const double g = 2.0 * ref;
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mhat = m / (1.0 - std::pow(0.9, t));
    const double vhat = v / (1.0 - std::pow(0.999, t));
    ref -= 0.05 * mhat / (std::sqrt(vhat) + 1e-8);
    CHECK(th.value()[0] == doctest::Approx(ref).epsilon(1e-10));
  }
  CHECK(std::abs(th.value()[0]) < 0.05);

  // Non-finite gradients reject the step and leave the state untouched.
  auto tn = Variabled::from_data({1}, {2.0}, true);
  AdamOptimizer<double> opt4({tn}, cfg);
  tn.grad()[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS(opt4.step());
  CHECK(tn.value()[0] == doctest::Approx(2.0));
  CHECK(opt4.step_count() == 0);
}

TEST_CASE("backward matches finite differences on composite graphs") {
  // d/dx mean((x - 0)^2) at x = 3: finite differences give 6.
  auto x = Variabled::from_data({1}, {3.0}, true);
  auto zero = Variabled::zeros({1});
  backward(loss_mse(x, zero));
  CHECK(x.grad()[0] == doctest::Approx(6.0));

  // Constants collect no gradient.
  CHECK_FALSE(zero.has_grad());

  // conv -> prelu -> bn -> linear -> mse against central differences.
  Rng rng(17);
  auto xin = Variabled::from_data({2, 2, 8}, random_vec(rng, 32), true);
  auto k = Variabled::from_data({3, 2, 3}, random_vec(rng, 18), true);
  auto slopes = Variabled::from_data({3}, {0.25, 0.1, 0.4}, true);
  auto w = Variabled::from_data({2, 3}, random_vec(rng, 6), true);
  auto b = Variabled::from_data({2}, random_vec(rng, 2), true);
  auto target = Variabled::from_data({2 * 4, 2}, random_vec(rng, 16));
  std::vector<double> rm(3, 0.0), rv(3, 1.0);
  auto build = [&]() {
    auto h = conv1d(xin, k, 2, 1, 1);
    auto hp = prelu(h, slopes);
    std::vector<double> rm2 = rm, rv2 = rv;
    auto hb = batchnorm<double>(hp, nullptr, nullptr, &rm2, &rv2, true, false,
                                0.1, 1e-5);
    auto rows = frames_to_rows(hb);
    auto out = linear(rows, w, &b);
    return loss_mse(out, target);
  };
  auto report = check_gradients<double>({xin, k, slopes, w, b}, build, 1e-5, 1e-4);
  INFO("worst: ", report.worst, " rel ", report.max_rel_err);
  CHECK(report.ok);
}

TEST_CASE("gradients of the remaining ops pass finite differences") {
  Rng rng(29);
  const double h = 1e-5, tol = 1e-4;

  // tconv1d
  {
    auto x = Variabled::from_data({2, 2, 5}, random_vec(rng, 20), true);
    auto k = Variabled::from_data({2, 3, 4}, random_vec(rng, 24), true);
    auto t = Variabled::from_data({2, 3, 10}, random_vec(rng, 60));
    auto build = [&]() { return loss_mse(tconv1d(x, k, 2), t); };
    CHECK(check_gradients<double>({x, k}, build, h, tol).ok);
  }
  // mlp1d vs explicit composition, and its gradients
  {
    auto x = Variabled::from_data({1, 3, 6}, random_vec(rng, 18), true);
    auto w1 = Variabled::from_data({4, 3}, random_vec(rng, 12), true);
    auto b1 = Variabled::from_data({4}, random_vec(rng, 4), true);
    auto sl = Variabled::from_data({4}, {0.3, 0.2, 0.25, 0.1}, true);
    auto w2 = Variabled::from_data({2, 4}, random_vec(rng, 8), true);
    auto b2 = Variabled::from_data({2}, random_vec(rng, 2), true);
    auto y = mlp1d(x, w1, b1, sl, w2, b2);
    // Reference: per-timestep linear/prelu/linear via frames_to_rows.
    auto rows = frames_to_rows(x);              // [6, 3]
    auto href = prelu(linear(rows, w1, &b1), sl);
    auto oref = linear(href, w2, &b2);          // [6, 2]
    for (int64_t t = 0; t < 6; ++t)
      for (int64_t o = 0; o < 2; ++o)
        CHECK(y.value()[o * 6 + t] ==
              doctest::Approx(oref.value()[t * 2 + o]).epsilon(1e-10));
    auto tgt = Variabled::from_data({1, 2, 6}, random_vec(rng, 12));
    auto build = [&]() { return loss_l1(mlp1d(x, w1, b1, sl, w2, b2), tgt); };
    CHECK(check_gradients<double>({x, w1, b1, sl, w2, b2}, build, h, tol).ok);
  }
  // sigmoid + bce through a tiny discriminator path
  {
    auto zp = Variabled::from_data({3, 1}, random_vec(rng, 3), true);
    auto zn = Variabled::from_data({3, 1}, random_vec(rng, 3), true);
    auto build = [&]() { return loss_bce(sigmoid(zp), sigmoid(zn)); };
    CHECK(check_gradients<double>({zp, zn}, build, h, tol).ok);
  }
  // gather_span / chunk_mean / gather_rows / concat_cols
  {
    auto x = Variabled::from_data({2, 3, 7}, random_vec(rng, 42), true);
    std::vector<FrameSpan> spans{{0, 1, 2}, {1, 4, 2}, {0, 0, 2}};
    auto t1 = Variabled::from_data({3, 6}, random_vec(rng, 18));
    auto t2 = Variabled::from_data({3, 3}, random_vec(rng, 9));
    auto build = [&]() {
      auto g = gather_span(x, spans);
      auto m = gather_rows(chunk_mean(x), {1, 0, 1});  // repeats allowed
      return add(loss_mse(g, t1), loss_mse(m, t2));
    };
    CHECK(check_gradients<double>({x}, build, h, tol).ok);
  }
  // softmax_xent
  {
    auto logits = Variabled::from_data({4, 3}, random_vec(rng, 12), true);
    std::vector<int32_t> labels{0, 2, 1, 2};
    auto build = [&]() { return softmax_xent(logits, labels); };
    CHECK(check_gradients<double>({logits}, build, h, tol).ok);
    // Hand case: uniform logits give loss ln(K).
    auto u = Variabled::zeros({2, 4});
    CHECK(softmax_xent(u, std::vector<int32_t>{1, 3}).item() ==
          doctest::Approx(std::log(4.0)));
  }
  // average / scale / add on scalars
  {
    auto s1 = Variabled::from_data({1}, {1.0}, true);
    auto s2 = Variabled::from_data({1}, {3.0}, true);
    auto m = average<double>({s1, s2});
    CHECK(m.item() == doctest::Approx(2.0));
    backward(m);
    CHECK(s1.grad()[0] == doctest::Approx(0.5));
    CHECK(s2.grad()[0] == doctest::Approx(0.5));
  }
  // batchnorm train-phase gradients (the coupled case), affine and not
  {
    auto x = Variabled::from_data({2, 2, 5}, random_vec(rng, 20), true);
    auto gamma = Variabled::from_data({2}, {1.1, 0.7}, true);
    auto beta = Variabled::from_data({2}, {0.1, -0.2}, true);
    auto tgt = Variabled::from_data({2, 2, 5}, random_vec(rng, 20));
    std::vector<double> rm(2, 0.0), rv(2, 1.0);
    auto build_na = [&]() {
      std::vector<double> m = rm, v = rv;
      return loss_mse(batchnorm<double>(x, nullptr, nullptr, &m, &v, true,
                                        false, 0.1, 1e-5),
                      tgt);
    };
    CHECK(check_gradients<double>({x}, build_na, h, tol).ok);
    auto build_af = [&]() {
      std::vector<double> m = rm, v = rv;
      return loss_mse(batchnorm<double>(x, &gamma, &beta, &m, &v, true, false,
                                        0.1, 1e-5),
                      tgt);
    };
    CHECK(check_gradients<double>({x, gamma, beta}, build_af, h, tol).ok);
    // Eval phase uses the (fixed) running stats.
    std::vector<double> rme{0.3, -0.2}, rve{1.5, 0.8};
    auto build_ev = [&]() {
      std::vector<double> m = rme, v = rve;
      return loss_mse(batchnorm<double>(x, &gamma, &beta, &m, &v, false, false,
                                        0.1, 1e-5),
                      tgt);
    };
    CHECK(check_gradients<double>({x, gamma, beta}, build_ev, h, tol).ok);
  }
}

TEST_CASE("sinc kernels are symmetric band-pass filters") {
  const int64_t width = 251;
  const double min_band = 50.0 / 16000.0;

  // A [300, 800] Hz band: strong at 550 Hz, weak at 4 kHz.
  auto f1 = Variabled::from_data({1}, {300.0 / 16000.0});
  auto bw = Variabled::from_data({1}, {500.0 / 16000.0 - min_band});
  auto k = sinc_kernels(f1, bw, width, min_band);
  REQUIRE(k.shape() == Shape{1, 1, width});
  for (int64_t n = 0; n < width / 2; ++n) {
    CHECK(k.value()[n] == doctest::Approx(k.value()[width - 1 - n]).epsilon(1e-12));
  }
  const double mag_mid = fir_mag(k.value(), 550.0 / 16000.0);
  const double mag_far = fir_mag(k.value(), 4000.0 / 16000.0);
  CHECK(20.0 * std::log10(mag_mid / mag_far) > 20.0);

  // Full band collapses to a windowed impulse with a flat response.
  auto f0 = Variabled::from_data({1}, {0.0});
  auto bfull = Variabled::from_data({1}, {1.0});  // clamped at Nyquist
  auto kf = sinc_kernels(f0, bfull, width, min_band);
  for (double f : {0.05, 0.1, 0.2, 0.33, 0.45}) {
    CHECK(fir_mag(kf.value(), f) == doctest::Approx(1.0).epsilon(1e-6));
  }

  // Gradients through the cutoff parameterization.
  Rng rng(31);
  auto f1g = Variabled::from_data({2}, {0.02, 0.11}, true);
  auto bg = Variabled::from_data({2}, {0.01, 0.05}, true);
  auto tgt = Variabled::from_data({2, 1, 9}, random_vec(rng, 18));
  auto build = [&]() {
    return loss_mse(sinc_kernels(f1g, bg, int64_t{9}, min_band), tgt);
  };
  CHECK(check_gradients<double>({f1g, bg}, build, 1e-6, 1e-4).ok);
}
