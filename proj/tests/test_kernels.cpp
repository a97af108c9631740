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

#include "rustan/error.hpp"
#include "rustan/grid_sampler.hpp"
#include "rustan/kernels.hpp"
#include "support/oracles.hpp"

namespace rustan {
namespace {

using kernels::Isa;

std::vector<Isa> simd_isas() {
  std::vector<Isa> out;
  if (kernels::available(Isa::kAvx2)) out.push_back(Isa::kAvx2);
  return out;
}

// Restores the startup selection when a test forces an ISA.
class IsaGuard {
 public:
  IsaGuard() : saved_(kernels::active().isa) {}
  ~IsaGuard() { kernels::select(saved_); }

 private:
  Isa saved_;
};

std::vector<double> random_vector(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng, -2.0, 2.0);
  return v;
}

TEST(Kernels, ScalarAlwaysAvailable) {
  EXPECT_TRUE(kernels::available(Isa::kScalar));
  EXPECT_EQ(kernels::table(Isa::kScalar).isa, Isa::kScalar);
}

TEST(Kernels, StartupSelectsBestAvailable) {
  EXPECT_EQ(kernels::active().isa, kernels::best_available());
}

TEST(Kernels, UnavailableIsaThrows) {
  if (kernels::available(Isa::kAvx2)) GTEST_SKIP() << "AVX2 present";
  EXPECT_THROW(kernels::table(Isa::kAvx2), ConfigError);
}

TEST(Kernels, AxpyMatchesScalar) {
  const auto& ref = kernels::table(Isa::kScalar);
  Rng rng(1);
  for (Isa isa : simd_isas()) {
    const auto& k = kernels::table(isa);
    for (std::size_t n = 0; n < 40; ++n) {
      const auto x = random_vector(n, rng);
      auto y0 = random_vector(n, rng);
      auto y1 = y0;
      ref.axpy(0.37, x.data(), y0.data(), n);
      k.axpy(0.37, x.data(), y1.data(), n);
      for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(y0[i], y1[i], 1e-14) << n << ":" << i;
    }
  }
}

TEST(Kernels, DotAndSumAbsDiffMatchScalar) {
  const auto& ref = kernels::table(Isa::kScalar);
  Rng rng(2);
  for (Isa isa : simd_isas()) {
    const auto& k = kernels::table(isa);
    for (std::size_t n : {0, 1, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 64, 257, 1000}) {
      const auto a = random_vector(n, rng);
      const auto b = random_vector(n, rng);
      EXPECT_NEAR(ref.dot(a.data(), b.data(), n), k.dot(a.data(), b.data(), n), 1e-12) << n;
      EXPECT_NEAR(ref.sum_abs_diff(a.data(), b.data(), n), k.sum_abs_diff(a.data(), b.data(), n),
                  1e-12)
          << n;
    }
  }
}

TEST(Kernels, ScalarReductionsMatchPlainLoops) {
  Rng rng(3);
  const auto a = random_vector(101, rng);
  const auto b = random_vector(101, rng);
  double d = 0.0, s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d += a[i] * b[i];
    s += std::abs(a[i] - b[i]);
  }
  const auto& ref = kernels::table(Isa::kScalar);
  EXPECT_NEAR(ref.dot(a.data(), b.data(), a.size()), d, 1e-12);
  EXPECT_NEAR(ref.sum_abs_diff(a.data(), b.data(), a.size()), s, 1e-12);
}

TEST(Kernels, SampleRowBitIdenticalToScalar) {
  const auto& ref = kernels::table(Isa::kScalar);
  Rng rng(4);
  const Image src = oracle::random_image(9, 11, 3, rng);
  for (Isa isa : simd_isas()) {
    const auto& k = kernels::table(isa);
    for (int trial = 0; trial < 200; ++trial) {
      const int count = 1 + trial % 23;
      std::vector<double> d0(3 * count, -1.0), d1(3 * count, -1.0);
      kernels::SampleRowArgs a;
      a.src = src.data().data();
      a.src_plane = src.plane_size();
      a.src_height = src.height();
      a.src_width = src.width();
      a.channels = 3;
      a.dst_plane = count;
      a.count = count;
      // Starts and steps chosen so rows run in and out of the source,
      // sometimes landing on integer coordinates exactly.
      a.px0 = trial % 5 == 0 ? std::floor(uniform(rng, -3, 12)) : uniform(rng, -3.0, 12.0);
      a.py0 = trial % 7 == 0 ? std::floor(uniform(rng, -3, 10)) : uniform(rng, -3.0, 10.0);
      a.dpx = trial % 5 == 0 ? 1.0 : uniform(rng, -1.5, 1.5);
      a.dpy = uniform(rng, -0.5, 0.5);
      a.dst = d0.data();
      ref.sample_row(a);
      a.dst = d1.data();
      k.sample_row(a);
      for (std::size_t i = 0; i < d0.size(); ++i) ASSERT_EQ(d0[i], d1[i]) << trial << ":" << i;
    }
  }
}

TEST(Kernels, ScalarSampleRowMatchesPointOracle) {
  const auto& ref = kernels::table(Isa::kScalar);
  Rng rng(5);
  const Image src = oracle::random_image(6, 7, 2, rng);
  for (int trial = 0; trial < 100; ++trial) {
    const int count = 13;
    std::vector<double> dst(2 * count);
    kernels::SampleRowArgs a{src.data().data(), src.plane_size(), 6, 7, 2, dst.data(),
                             std::size_t(count), count, uniform(rng, -2, 8), uniform(rng, -1, 1),
                             uniform(rng, -2, 7), uniform(rng, -1, 1)};
    ref.sample_row(a);
    for (int c = 0; c < 2; ++c) {
      for (int i = 0; i < count; ++i) {
        EXPECT_NEAR(dst[c * count + i],
                    oracle::bilinear_at(src, c, a.px0 + i * a.dpx, a.py0 + i * a.dpy), 1e-14);
      }
    }
  }
}

TEST(Kernels, WarpIsBitIdenticalAcrossIsas) {
  IsaGuard guard;
  Rng rng(6);
  const Image u = oracle::random_image(32, 40, 3, rng);
  for (Isa isa : simd_isas()) {
    for (int t = 0; t < 10; ++t) {
      const AffineMatrix theta = compose_pose(sample_pose(rng, {}));
      kernels::select(Isa::kScalar);
      const Image a = warp(u, theta);
      kernels::select(isa);
      const Image b = warp(u, theta);
      EXPECT_EQ(a, b);
    }
  }
}

}  // namespace
}  // namespace rustan
