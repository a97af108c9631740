/* Copyright 2026 The Rustan Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "rustan/checkpoint.hpp"
#include "rustan/error.hpp"
#include "rustan/localization_net.hpp"
#include "rustan/nn.hpp"
#include "support/oracles.hpp"

namespace rustan {
namespace {

LocNetArch tiny_arch() {
  LocNetArch a;
  a.height = 12;
  a.width = 12;
  a.stages = {{3, 2, 4}, {3, 1, 4}};
  a.pool_grid = 2;
  a.hidden = 6;
  return a;
}

std::array<double, 6> top_rows(const AffineMatrix& t) {
  return {t(0, 0), t(0, 1), t(0, 2), t(1, 0), t(1, 1), t(1, 2)};
}

// On/off state of every ReLU; finite differences are only meaningful when
// it does not change across the probe.
std::vector<bool> relu_pattern(const LocNetCache& c) {
  std::vector<bool> p;
  for (std::size_t i = 1; i < c.stage_inputs.size(); ++i)
    for (double v : c.stage_inputs[i].data) p.push_back(v > 0.0);
  for (double v : c.last_conv.data) p.push_back(v > 0.0);
  for (double v : c.hidden) p.push_back(v > 0.0);
  return p;
}

TEST(LocNetInit, FreshNetworkIsIdentity) {
  Rng rng(5);
  for (const LocNetArch& arch : {LocNetArch{}, tiny_arch()}) {
    const LocNetParams p = locnet_init(arch, rng);
    for (int k = 0; k < 3; ++k) {
      const Image u = oracle::random_image(arch.height, arch.width, 3, rng);
      const AffineMatrix t = locnet_forward(p, u).theta;
      EXPECT_EQ(t, AffineMatrix{});
    }
  }
}

TEST(LocNetInit, SeedDeterminesParameters) {
  Rng a(9), b(9), c(10);
  const LocNetParams pa = locnet_init(LocNetArch{}, a);
  const LocNetParams pb = locnet_init(LocNetArch{}, b);
  const LocNetParams pc = locnet_init(LocNetArch{}, c);
  EXPECT_EQ(pa.values, pb.values);
  EXPECT_NE(pa.values, pc.values);
  EXPECT_EQ(pa.values.size(), LocNetArch{}.param_count());
}

TEST(LocNetForward, DeterministicAndShapeChecked) {
  Rng rng(3);
  LocNetParams p = locnet_init(tiny_arch(), rng);
  for (double& v : p.values) v += uniform(rng, -0.1, 0.1);
  const Image u = oracle::random_image(12, 12, 3, rng);
  EXPECT_EQ(locnet_forward(p, u).theta, locnet_forward(p, u).theta);
  EXPECT_THROW(locnet_forward(p, Image(13, 12, 3)), ShapeError);
  EXPECT_THROW(locnet_forward(p, Image(12, 12, 1)), ShapeError);
}

TEST(LocNetArch, ValidateRejectsBadShapes) {
  LocNetArch a = tiny_arch();
  a.pool_grid = 4;  // 6x6 final map
  EXPECT_THROW(a.validate(), ConfigError);
  a = tiny_arch();
  a.stages[0].kernel = 2;
  EXPECT_THROW(a.validate(), ConfigError);
  a = tiny_arch();
  a.stages.clear();
  EXPECT_THROW(a.validate(), ConfigError);
  a = tiny_arch();
  a.channels = 2;
  EXPECT_THROW(a.validate(), ConfigError);
}

TEST(LocNetArch, EncodeDecodeRoundTrip) {
  const LocNetArch a = tiny_arch();
  EXPECT_EQ(LocNetArch::decode(a.encode()), a);
  std::vector<int> f = a.encode();
  f.pop_back();
  EXPECT_THROW(LocNetArch::decode(f), DataError);
}

TEST(LocNetBackward, ZeroUpstreamGivesZeroGradient) {
  Rng rng(4);
  LocNetParams p = locnet_init(tiny_arch(), rng);
  for (double& v : p.values) v += uniform(rng, -0.1, 0.1);
  const LocNetOutput out = locnet_forward(p, oracle::random_image(12, 12, 3, rng));
  for (double g : locnet_backward(p, out.cache, {})) EXPECT_EQ(g, 0.0);
}

TEST(LocNetBackward, LinearInUpstreamGradient) {
  Rng rng(6);
  LocNetParams p = locnet_init(tiny_arch(), rng);
  for (double& v : p.values) v += uniform(rng, -0.1, 0.1);
  const LocNetOutput out = locnet_forward(p, oracle::random_image(12, 12, 3, rng));
  const std::array<double, 6> g1{0.3, -0.2, 0.5, 0.1, 0.0, -0.4};
  const std::array<double, 6> g2{-0.1, 0.7, 0.2, 0.0, 0.6, 0.3};
  std::array<double, 6> sum{};
  for (int k = 0; k < 6; ++k) sum[k] = 2.0 * g1[k] + g2[k];
  const auto a = locnet_backward(p, out.cache, g1);
  const auto b = locnet_backward(p, out.cache, g2);
  const auto c = locnet_backward(p, out.cache, sum);
  for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c[i], 2.0 * a[i] + b[i], 1e-12);
}

TEST(LocNetBackward, MatchesFiniteDifferences) {
  Rng rng(8);
  LocNetParams p = locnet_init(tiny_arch(), rng);
  for (double& v : p.values) v += uniform(rng, -0.3, 0.3);
  const Image u = oracle::random_image(12, 12, 3, rng);
  const std::array<double, 6> g{0.7, -0.3, 0.4, 0.2, -0.9, 0.5};
  const LocNetOutput base = locnet_forward(p, u);
  const std::vector<double> grad = locnet_backward(p, base.cache, g);
  const std::vector<bool> pattern = relu_pattern(base.cache);

  auto objective = [&](const LocNetParams& q, std::vector<bool>* pat) {
    const LocNetOutput o = locnet_forward(q, u);
    if (pat != nullptr) *pat = relu_pattern(o.cache);
    const auto t = top_rows(o.theta);
    double s = 0.0;
    for (int k = 0; k < 6; ++k) s += g[k] * t[k];
    return s;
  };

  const double h = 1e-6;
  int checked = 0;
  for (int probe = 0; probe < 50; ++probe) {
    const auto i = static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(p.values.size()) - 1));
    LocNetParams plus = p, minus = p;
    plus.values[i] += h;
    minus.values[i] -= h;
    std::vector<bool> pp, pm;
    const double fp = objective(plus, &pp);
    const double fm = objective(minus, &pm);
    if (pp != pattern || pm != pattern) continue;
    const double fd = (fp - fm) / (2.0 * h);
    EXPECT_LT(oracle::relative_error(fd, grad[i], 1e-6), 1e-5) << "param " << i;
    ++checked;
  }
  EXPECT_GE(checked, 45);
}

TEST(LocNetCheckpoint, RoundTripIsExact) {
  Rng rng(12);
  LocNetParams p = locnet_init(tiny_arch(), rng);
  const Checkpoint ck{ModelKind::kLocalizationNet, p.arch.encode(), p.values};
  const Checkpoint back = decode_checkpoint(encode_checkpoint(ck));
  EXPECT_EQ(back.kind, ModelKind::kLocalizationNet);
  EXPECT_EQ(LocNetArch::decode(back.arch), p.arch);
  EXPECT_EQ(back.params, p.values);
}

TEST(LocNetCheckpoint, CorruptBytesAreRejected) {
  const Checkpoint ck{ModelKind::kLocalizationNet, tiny_arch().encode(), {1.0, 2.0, 3.0}};
  const std::vector<std::uint8_t> good = encode_checkpoint(ck);
  std::vector<std::uint8_t> bad = good;
  bad[0] = 'X';
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = good;
  bad[8] = 7;  // version
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = good;
  bad.resize(bad.size() - 3);
  EXPECT_THROW(decode_checkpoint(bad), DataError);
  bad = good;
  bad.push_back(0);
  EXPECT_THROW(decode_checkpoint(bad), DataError);
}

// Layer-level adjoint checks: <A x, y> == <x, A^T y>.
double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

nn::Tensor random_tensor(int c, int h, int w, Rng& rng) {
  nn::Tensor t(c, h, w);
  for (double& v : t.data) v = uniform(rng, -1.0, 1.0);
  return t;
}

TEST(Layers, ConvMatchesDirectLoops) {
  Rng rng(21);
  const nn::Conv2d conv{2, 3, 3, 2, 1, 0};
  std::vector<double> params(conv.param_count());
  for (double& v : params) v = uniform(rng, -1.0, 1.0);
  const nn::Tensor in = random_tensor(2, 7, 6, rng);
  nn::Tensor out;
  std::vector<double> cols;
  conv.forward(params, in, out, cols);
  ASSERT_EQ(out.height, 4);
  ASSERT_EQ(out.width, 3);
  for (int o = 0; o < 3; ++o)
    for (int y = 0; y < out.height; ++y)
      for (int x = 0; x < out.width; ++x) {
        double s = params[conv.weight_count() + o];
        for (int c = 0; c < 2; ++c)
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              const int iy = y * 2 - 1 + ky;
              const int ix = x * 2 - 1 + kx;
              if (iy < 0 || ix < 0 || iy >= 7 || ix >= 6) continue;
              s += params[((o * 2 + c) * 3 + ky) * 3 + kx] * in.data[(c * 7 + iy) * 6 + ix];
            }
        EXPECT_NEAR(out.data[(o * out.height + y) * out.width + x], s, 1e-12);
      }
}

TEST(Layers, ConvBackwardIsAdjoint) {
  Rng rng(22);
  const nn::Conv2d conv{2, 3, 3, 2, 1, 0};
  std::vector<double> params(conv.param_count());
  for (double& v : params) v = uniform(rng, -1.0, 1.0);
  for (std::size_t i = conv.weight_count(); i < params.size(); ++i) params[i] = 0.0;
  const nn::Tensor in = random_tensor(2, 7, 6, rng);
  nn::Tensor out;
  std::vector<double> cols;
  conv.forward(params, in, out, cols);
  const nn::Tensor gy = random_tensor(out.channels, out.height, out.width, rng);
  std::vector<double> gp(params.size(), 0.0);
  nn::Tensor gx;
  conv.backward(params, in, cols, gy, gp, &gx);
  EXPECT_NEAR(dot(out.data, gy.data), dot(in.data, gx.data), 1e-10);
  // Without bias the output is linear in the weights too.
  EXPECT_NEAR(dot(out.data, gy.data),
              dot(std::vector<double>(params.begin(), params.begin() + conv.weight_count()),
                  std::vector<double>(gp.begin(), gp.begin() + conv.weight_count())),
              1e-10);
}

TEST(Layers, PoolAndUpsampleBackwardAreAdjoint) {
  Rng rng(23);
  const nn::Tensor x = random_tensor(2, 8, 6, rng);
  const nn::Tensor pooled = nn::avg_pool_grid(x, 2);
  const nn::Tensor gp = random_tensor(2, 2, 2, rng);
  EXPECT_NEAR(dot(pooled.data, gp.data), dot(x.data, nn::avg_pool_grid_backward(gp, 8, 6).data),
              1e-12);
  const nn::Tensor up = nn::upsample2x(x);
  const nn::Tensor gu = random_tensor(2, 16, 12, rng);
  EXPECT_NEAR(dot(up.data, gu.data), dot(x.data, nn::upsample2x_backward(gu).data), 1e-12);
}

TEST(Layers, DenseBackwardIsAdjoint) {
  Rng rng(24);
  const nn::Dense d{4, 3, 0};
  std::vector<double> params(d.param_count());
  for (double& v : params) v = uniform(rng, -1.0, 1.0);
  for (int i = 12; i < 15; ++i) params[i] = 0.0;
  std::vector<double> x(4), y(3), gy(3), gx(4), gp(params.size(), 0.0);
  for (double& v : x) v = uniform(rng, -1.0, 1.0);
  for (double& v : gy) v = uniform(rng, -1.0, 1.0);
  d.forward(params, x, y);
  d.backward(params, x, gy, gp, gx);
  EXPECT_NEAR(dot(y, gy), dot(x, gx), 1e-12);
}

}  // namespace
}  // namespace rustan
