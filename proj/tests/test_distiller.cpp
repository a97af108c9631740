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

#include <cmath>
#include <vector>

#include "rustan/checkpoint.hpp"
#include "rustan/distiller.hpp"
#include "rustan/error.hpp"
#include "rustan/scene.hpp"
#include "support/oracles.hpp"

namespace rustan {
namespace {

DistillerArch tiny_arch() {
  DistillerArch a;
  a.height = 8;
  a.width = 12;
  a.enc1 = 3;
  a.enc2 = 4;
  return a;
}

std::vector<bool> relu_pattern(const DistillerCache& c) {
  std::vector<bool> p;
  for (const nn::Tensor* t : {&c.e1, &c.e2, &c.d1})
    for (double v : t->data) p.push_back(v > 0.0);
  return p;
}

TEST(DistillLoss, Examples) {
  Rng rng(1);
  const Image y = oracle::random_image(6, 5, 3, rng);
  EXPECT_EQ(distill_loss(y, y), 0.0);
  EXPECT_DOUBLE_EQ(distill_loss(Image(4, 4, 3, 0.5), Image(4, 4, 3, 0.25)), 0.25);
  const Image g = oracle::random_image(6, 5, 3, rng);
  double ref = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) ref += std::abs(y.data()[i] - g.data()[i]);
  EXPECT_NEAR(distill_loss(y, g), ref / static_cast<double>(y.size()), 1e-14);
  EXPECT_GT(distill_loss(y, g), 0.0);
  EXPECT_THROW(distill_loss(y, Image(6, 6, 3)), ShapeError);
}

TEST(Psnr, Examples) {
  Rng rng(2);
  const Image a = oracle::random_image(8, 8, 3, rng);
  EXPECT_EQ(psnr(a, a), kPsnrMax);
  EXPECT_NEAR(psnr(Image(8, 8, 3, 0.3), Image(8, 8, 3, 0.4)), 20.0, 1e-9);
  const Image b = oracle::random_image(8, 8, 3, rng);
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data()[i] - b.data()[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  EXPECT_NEAR(psnr(a, b), 10.0 * std::log10(1.0 / mse), 1e-10);
  EXPECT_THROW(psnr(a, Image(8, 8, 1)), ShapeError);
}

TEST(DistillerArch, ValidateAndRoundTrip) {
  DistillerArch a = tiny_arch();
  EXPECT_EQ(DistillerArch::decode(a.encode()), a);
  a.width = 10;
  EXPECT_THROW(a.validate(), ConfigError);
  a = tiny_arch();
  a.enc1 = 0;
  EXPECT_THROW(a.validate(), ConfigError);
}

TEST(DistillerInit, FreshNetworkIsIdentity) {
  Rng rng(3);
  const DistillerParams p = distiller_init(tiny_arch(), rng);
  EXPECT_EQ(p.values.size(), tiny_arch().param_count());
  const Image x = oracle::random_image(8, 12, 3, rng);
  const Image y = distiller_forward(p, x);
  EXPECT_TRUE(std::equal(x.data().begin(), x.data().end(), y.data().begin()));
  EXPECT_THROW(distiller_forward(p, Image(8, 8, 3)), ShapeError);
}

TEST(Restore, UntrainedOutputIsFiniteAndInRange) {
  Rng rng(4);
  DistillerParams p = distiller_init(tiny_arch(), rng);
  for (double& v : p.values) v += uniform(rng, -1.0, 1.0);
  const Image y = restore(p, oracle::random_image(8, 12, 3, rng));
  for (double v : y.data()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(DistillerBackward, MatchesFiniteDifferences) {
  Rng rng(5);
  DistillerParams p = distiller_init(tiny_arch(), rng);
  for (double& v : p.values) v += uniform(rng, -0.2, 0.2);
  const Image x = oracle::random_image(8, 12, 3, rng);
  const Image g = oracle::random_image(8, 12, 3, rng);
  DistillerCache cache;
  distiller_forward(p, x, &cache);
  const std::vector<double> grad = distiller_backward(p, cache, g);
  const std::vector<bool> pattern = relu_pattern(cache);

  auto objective = [&](const DistillerParams& q, std::vector<bool>* pat) {
    DistillerCache c;
    const Image y = distiller_forward(q, x, &c);
    *pat = relu_pattern(c);
    return oracle::inner(y, g);
  };
  const double h = 1e-6;
  int checked = 0;
  for (int probe = 0; probe < 60; ++probe) {
    const auto i = static_cast<std::size_t>(
        uniform_int(rng, 0, static_cast<int>(p.values.size()) - 1));
    DistillerParams up = p, dn = p;
    up.values[i] += h;
    dn.values[i] -= h;
    std::vector<bool> pu, pd;
    const double fu = objective(up, &pu);
    const double fd_ = objective(dn, &pd);
    if (pu != pattern || pd != pattern) continue;
    const double fd = (fu - fd_) / (2 * h);
    EXPECT_LT(oracle::relative_error(fd, grad[i], 1e-6), 1e-5) << "param " << i;
    ++checked;
  }
  EXPECT_GE(checked, 50);
}

TEST(TrainDistiller, IdentityDatasetStaysNearZero) {
  Rng rng(6);
  std::vector<PairedSample> data;
  for (int i = 0; i < 4; ++i) {
    const Image y = oracle::random_image(8, 12, 3, rng);
    data.push_back({y, y});
  }
  DistillConfig cfg;
  cfg.epochs = 10;
  cfg.seed = 1;
  const DistillResult r = train_distiller(data, tiny_arch(), cfg);
  ASSERT_EQ(r.report.epoch_loss.size(), 10u);
  EXPECT_LT(r.report.epoch_loss.back(), 0.01);
}

TEST(TrainDistiller, ReproducibleAndRejectsEmpty) {
  Rng rng(7);
  std::vector<PairedSample> data;
  for (int i = 0; i < 3; ++i) {
    const Image y = oracle::random_image(8, 12, 3, rng);
    Image x = y;
    for (double& v : x.data()) v = 0.5 * v + 0.3;
    data.push_back({x, y});
  }
  DistillConfig cfg;
  cfg.epochs = 4;
  cfg.batch_size = 2;
  cfg.seed = 3;
  const DistillResult a = train_distiller(data, tiny_arch(), cfg);
  const DistillResult b = train_distiller(data, tiny_arch(), cfg);
  EXPECT_EQ(a.params.values, b.params.values);
  EXPECT_EQ(a.report.epoch_loss, b.report.epoch_loss);
  EXPECT_THROW(train_distiller({}, tiny_arch(), cfg), ConfigError);
  cfg.epochs = -1;
  EXPECT_THROW(train_distiller(data, tiny_arch(), cfg), ConfigError);
}

TEST(TrainDistiller, FogModelRestoresAndKeepsCleanInput) {
  Rng rng(8);
  std::vector<PairedSample> data;
  std::vector<Image> clean;
  for (int i = 0; i < 12; ++i) {
    const SceneSpec s = jitter_scene(SceneSpec{}, rng);
    const Image y = render_clear_scene(s, 64, 64).image;
    WeatherSpec w;
    w.intensity = uniform(rng, 0.0, 0.8);
    data.push_back({degrade_weather(y, w, rng), y});
    clean.push_back(y);
  }
  DistillerArch arch;
  arch.height = 64;
  arch.width = 64;
  DistillConfig cfg;
  cfg.epochs = 25;
  cfg.seed = 9;
  const DistillResult r = train_distiller(data, arch, cfg);
  EXPECT_LT(r.report.epoch_loss.back(), r.report.epoch_loss.front());
  double gain = 0.0;
  int fogged = 0;
  for (const PairedSample& s : data) {
    if (distill_loss(s.x, s.y) < 0.02) continue;
    ++fogged;
    EXPECT_LT(distill_loss(restore(r.params, s.x), s.y), distill_loss(s.x, s.y));
    gain += psnr(restore(r.params, s.x), s.y) - psnr(s.x, s.y);
  }
  ASSERT_GT(fogged, 0);
  EXPECT_GT(gain / fogged, 0.0);
  for (const Image& y : clean) EXPECT_LT(distill_loss(restore(r.params, y), y), 0.05);
}

TEST(DistillerCheckpoint, RoundTrip) {
  Rng rng(10);
  const DistillerParams p = distiller_init(tiny_arch(), rng);
  const Checkpoint ck{ModelKind::kDistiller, p.arch.encode(), p.values};
  const Checkpoint back = decode_checkpoint(encode_checkpoint(ck));
  EXPECT_EQ(back.kind, ModelKind::kDistiller);
  EXPECT_EQ(DistillerArch::decode(back.arch), p.arch);
  EXPECT_EQ(back.params, p.values);
}

}  // namespace
}  // namespace rustan
