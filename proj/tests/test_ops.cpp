// Copyright 2026 The ulite Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/grad_suite.hpp"
#include "support/oracles.hpp"
#include "ulite/ops.hpp"

using namespace ulite;
using namespace ulite::testing;

TEST_CASE_TEMPLATE("depthwise_conv matches the direct-loop oracle", T, float, double) {
  Rng rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const Shape s{1 + rng.below(2), 1 + rng.below(3), 1 + rng.below(8), 1 + rng.below(8)};
    const std::size_t k = 1 + 2 * rng.below(4);
    const std::size_t form = rng.below(3);
    const std::size_t kh = form == 1 ? 1 : k, kw = form == 0 ? 1 : k;
    const int d = 1 + int(rng.below(3));
    auto p = DepthwiseConv<T>::make(s.c, kh, kw, d, rng);
    p.bias.value = rand_normal<T>(p.bias.value.shape(), rng, 0, 1);
    const auto x = rand_normal<T>(s, rng, 0, 1);
    CHECK(bit_equal(depthwise_conv(x, p), depthwise_direct(x, p.kernel.value, p.bias.value, d)));
  }
}

TEST_CASE("depthwise_conv rejects even kernels and channel mismatch") {
  Rng rng(1);
  CHECK_THROWS_AS(DepthwiseConv<float>::make(2, 1, 4, 1, rng), UnsupportedKernelError);
  CHECK_THROWS_AS(DepthwiseConv<float>::make(2, 3, 3, 0, rng), InvalidInputError);
  auto p = DepthwiseConv<float>::make(2, 3, 3, 1, rng);
  CHECK_THROWS_AS(depthwise_conv(Tensor({1, 3, 4, 4}), p), ShapeError);
}

TEST_CASE("identity depthwise kernel passes input through") {
  Rng rng(2);
  auto p = DepthwiseConv<float>::make(2, 1, 5, 2, rng);
  p.kernel.value.fill(0.0f);
  p.bias.value.fill(0.0f);
  for (std::size_t c = 0; c < 2; ++c) p.kernel.value.at(c, 0, 0, 2) = 1.0f;
  const auto x = rand_normal<float>({1, 2, 6, 6}, rng, 0, 1);
  CHECK(bit_equal(depthwise_conv(x, p), x));
}

TEST_CASE("pointwise_conv is a per-pixel linear map") {
  Rng rng(3);
  auto p = PointwiseConv<double>::make(3, 2, rng);
  p.bias.value = rand_normal<double>(p.bias.value.shape(), rng, 0, 1);
  const auto x = rand_normal<double>({2, 3, 3, 4}, rng, 0, 1);
  const auto y = pointwise_conv(x, p);
  REQUIRE(y.shape() == Shape{2, 2, 3, 4});
  std::vector<double> w(p.weight.value.data().begin(), p.weight.value.data().end());
  std::vector<double> b(p.bias.value.data().begin(), p.bias.value.data().end());
  for (std::size_t n = 0; n < 2; ++n)
    for (std::size_t h = 0; h < 3; ++h)
      for (std::size_t ww = 0; ww < 4; ++ww) {
        std::vector<double> px{x.at(n, 0, h, ww), x.at(n, 1, h, ww), x.at(n, 2, h, ww)};
        const auto ref = pointwise_pixel(w, b, px);
        for (std::size_t o = 0; o < 2; ++o) CHECK(y.at(n, o, h, ww) == doctest::Approx(ref[o]).epsilon(1e-12));
      }
}

TEST_CASE("batch_norm normalises with population statistics") {
  Rng rng(4);
  auto bn = BatchNorm<double>::make(2);
  const auto x = rand_normal<double>({3, 2, 4, 4}, rng, 5.0, 3.0);
  const auto y = batch_norm(x, bn);
  for (std::size_t c = 0; c < 2; ++c) {
    double m = 0, v = 0, xm = 0, xv = 0;
    const double count = 3 * 16;
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t i = 0; i < 16; ++i) {
        m += y.plane(n, c)[i];
        xm += x.plane(n, c)[i];
      }
    m /= count;
    xm /= count;
    for (std::size_t n = 0; n < 3; ++n)
      for (std::size_t i = 0; i < 16; ++i) {
        v += (y.plane(n, c)[i] - m) * (y.plane(n, c)[i] - m);
        xv += (x.plane(n, c)[i] - xm) * (x.plane(n, c)[i] - xm);
      }
    v /= count;
    xv /= count;
    CHECK(std::abs(m) < 1e-12);
    CHECK(v == doctest::Approx(xv / (xv + 1e-5)).epsilon(1e-10));
    // running stats move 10% towards the batch statistics from (0, 1)
    CHECK(bn.running_mean[c] == doctest::Approx(0.1 * xm).epsilon(1e-12));
    CHECK(bn.running_var[c] == doctest::Approx(0.9 + 0.1 * xv).epsilon(1e-12));
  }
}

TEST_CASE("batch_norm eval mode uses running statistics") {
  auto bn = BatchNorm<float>::make(1);
  bn.mode = Mode::eval;
  bn.running_mean.fill(2.0f);
  bn.running_var.fill(4.0f);
  bn.gamma.value.fill(3.0f);
  bn.beta.value.fill(1.0f);
  const Tensor x({1, 1, 1, 2}, {2.0f, 4.0f});
  const auto y = batch_norm(x, bn);
  CHECK(y[0] == doctest::Approx(1.0));
  CHECK(y[1] == doctest::Approx(1.0 + 3.0 * 2.0 / std::sqrt(4.0 + 1e-5)));
  CHECK(bit_equal(y, batch_norm_eval(x, bn)));
}

TEST_CASE("activations at reference points") {
  const TensorD x({1, 1, 1, 4}, {-1.0, 0.0, 1.0, 3.0});
  const auto g = gelu(x);
  // x * Phi(x) with the exact normal CDF
  for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(x[i] * 0.5 * std::erfc(-x[i] / std::sqrt(2.0))));
  CHECK(g[2] == doctest::Approx(0.8413447460685429));
  const auto s = sigmoid(x);
  CHECK(s[1] == 0.5);
  CHECK(s[2] == doctest::Approx(1.0 / (1.0 + std::exp(-1.0))));
  const auto big = sigmoid(Tensor({1, 1, 1, 2}, {-100.0f, 100.0f}));
  CHECK(big[0] >= 0.0f);
  CHECK(big[1] <= 1.0f);
  CHECK(all_finite(big));
}

TEST_CASE("max_pool2, upsample2 and concat shapes and routing") {
  const Tensor x({1, 1, 2, 4}, {1, 5, 2, 0, 3, 4, 9, 8});
  std::vector<std::uint32_t> arg;
  const auto y = max_pool2(x, &arg);
  CHECK(y == Tensor({1, 1, 1, 2}, {5, 9}));
  const auto dx = max_pool2_backward(x.shape(), arg, Tensor({1, 1, 1, 2}, {1, 2}));
  CHECK(dx == Tensor({1, 1, 2, 4}, {0, 1, 0, 0, 0, 0, 2, 0}));
  CHECK_THROWS_AS(max_pool2(Tensor({1, 1, 3, 4})), ShapeError);

  const auto u = upsample2(Tensor({1, 1, 1, 2}, {1, 2}));
  CHECK(u == Tensor({1, 1, 2, 4}, {1, 1, 2, 2, 1, 1, 2, 2}));
  CHECK(upsample2_backward(u) == Tensor({1, 1, 1, 2}, {4, 8}));

  const auto c = concat_channels(Tensor({1, 1, 1, 2}, {1, 2}), Tensor({1, 2, 1, 2}, {3, 4, 5, 6}));
  CHECK(c == Tensor({1, 3, 1, 2}, {1, 2, 3, 4, 5, 6}));
  auto [da, db] = concat_channels_backward(c, 1);
  CHECK(da == Tensor({1, 1, 1, 2}, {1, 2}));
  CHECK(db.shape() == Shape{1, 2, 1, 2});
  CHECK_THROWS_AS(concat_channels(Tensor({1, 1, 1, 2}), Tensor({1, 1, 2, 2})), ShapeError);
}

TEST_CASE("backward passes accumulate parameter gradients") {
  Rng rng(5);
  auto p = DepthwiseConv<double>::make(2, 3, 3, 1, rng);
  const auto x = rand_normal<double>({1, 2, 4, 4}, rng, 0, 1);
  const auto dy = rand_normal<double>({1, 2, 4, 4}, rng, 0, 1);
  depthwise_conv_backward(x, p, dy);
  const auto once = p.kernel.grad;
  depthwise_conv_backward(x, p, dy);
  for (std::size_t i = 0; i < once.numel(); ++i) CHECK(p.kernel.grad[i] == doctest::Approx(2 * once[i]));
}

TEST_CASE_TEMPLATE("finite-difference gradients, quick pass", T, float, double) {
  for (const auto& e : op_gradient_suite<T>(77, 3)) {
    INFO(e.name << " worst " << e.report.worst << " vector " << e.report.max_vector_rel);
    CHECK(entry_ok<T>(e));
  }
}
