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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rustan/error.hpp"
#include "rustan/scene.hpp"

namespace rustan {
namespace {

namespace fs = std::filesystem;

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("rustan_scene_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void expect_box_near(const Box& a, const Box& b, double tol) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.w, b.w, tol);
  EXPECT_NEAR(a.h, b.h, tol);
}

TEST(RenderScene, DeterministicPerSeed) {
  SceneSpec s;
  s.seed = 99;
  const RenderedScene a = render_clear_scene(s, 128, 128);
  const RenderedScene b = render_clear_scene(s, 128, 128);
  EXPECT_EQ(a.image.data()[0], b.image.data()[0]);
  EXPECT_TRUE(std::equal(a.image.data().begin(), a.image.data().end(), b.image.data().begin()));
  EXPECT_EQ(a.truth, b.truth);
  s.seed = 100;
  const RenderedScene c = render_clear_scene(s, 128, 128);
  EXPECT_FALSE(std::equal(a.image.data().begin(), a.image.data().end(), c.image.data().begin()));
}

TEST(RenderScene, ZeroMarkersGiveNoMarkerBoxes) {
  SceneSpec s;
  s.marker_count = 0;
  const RenderedScene r = render_clear_scene(s, 64, 64);
  for (const TruthBox& t : r.truth) EXPECT_NE(t.cls, ElementClass::kMarker);
  EXPECT_EQ(r.truth.size(), 5u);
}

// Default layout worked out by hand from the reference geometry: stripes
// 9 wide with gap 3 starting 4.5 from the center line at 64.5, a 15-wide
// two-digit number centred under it, and dashes of length 10, 8, 6, 4
// separated by gaps 6, 5, 5.
TEST(RenderScene, DefaultTruthMatchesHandGeometry) {
  const RenderedScene r = render_clear_scene(SceneSpec{}, 128, 128);
  const std::vector<TruthBox> want{
      {ElementClass::kMarker, {51, 108, 9, 5}},    {ElementClass::kMarker, {69, 108, 9, 5}},
      {ElementClass::kMarker, {39, 108, 9, 5}},    {ElementClass::kMarker, {81, 108, 9, 5}},
      {ElementClass::kMarker, {27, 108, 9, 5}},    {ElementClass::kMarker, {93, 108, 9, 5}},
      {ElementClass::kNumber, {57, 84, 15, 10}},   {ElementClass::kCenterline, {63, 68, 3, 10}},
      {ElementClass::kCenterline, {63, 54, 3, 8}}, {ElementClass::kCenterline, {63, 43, 3, 6}},
      {ElementClass::kCenterline, {63, 34, 3, 4}},
  };
  ASSERT_EQ(r.truth.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) {
    EXPECT_EQ(r.truth[i].cls, want[i].cls) << i;
    expect_box_near(r.truth[i].box, want[i].box, 1e-12);
  }
  // At 64 px every coordinate halves.
  const RenderedScene half = render_clear_scene(SceneSpec{}, 64, 64);
  for (std::size_t i = 0; i < want.size(); ++i) {
    const Box& b = want[i].box;
    expect_box_near(half.truth[i].box, {b.x / 2, b.y / 2, b.w / 2, b.h / 2}, 1e-12);
  }
}

TEST(RenderScene, PaintCoversTruthBoxes) {
  const RenderedScene r = render_clear_scene(SceneSpec{}, 128, 128);
  // The pixel at each marker's centre is full paint.
  for (const TruthBox& t : r.truth) {
    if (t.cls != ElementClass::kMarker) continue;
    const int x = static_cast<int>(t.box.x + t.box.w / 2);
    const int y = static_cast<int>(t.box.y + t.box.h / 2);
    EXPECT_NEAR(r.image.at(0, y, x), SceneSpec{}.paint.r, 1e-12);
  }
}

TEST(RenderScene, RejectsSmallResolutionAndOutOfBoundsLayout) {
  EXPECT_THROW(render_clear_scene(SceneSpec{}, 32, 32), ShapeError);
  SceneSpec s;
  s.marker_count = 14;
  EXPECT_THROW(render_clear_scene(s, 128, 128), DataError);
}

TEST(JitterScene, StaysRenderable) {
  Rng rng(1);
  for (int i = 0; i < 30; ++i) {
    const SceneSpec s = jitter_scene(SceneSpec{}, rng);
    const RenderedScene r = render_clear_scene(s, 64, 64);
    for (const TruthBox& t : r.truth) {
      EXPECT_GE(t.box.x, 0.0);
      EXPECT_GE(t.box.y, 0.0);
      EXPECT_LE(t.box.x + t.box.w, 64.0);
      EXPECT_LE(t.box.y + t.box.h, 64.0);
      EXPECT_GT(t.box.w, 0.0);
      EXPECT_GT(t.box.h, 0.0);
    }
  }
}

TEST(Weather, ZeroIntensityIsIdentity) {
  const Image u = render_clear_scene(SceneSpec{}, 64, 64).image;
  for (WeatherKind k : {WeatherKind::kFog, WeatherKind::kRain, WeatherKind::kSnow,
                        WeatherKind::kMix}) {
    WeatherSpec w;
    w.kind = k;
    w.intensity = 0.0;
    Rng rng(3);
    const Image v = degrade_weather(u, w, rng);
    EXPECT_TRUE(std::equal(u.data().begin(), u.data().end(), v.data().begin()))
        << weather_name(k);
  }
}

TEST(Weather, FullFogSaturatesTopRow) {
  const Image u = render_clear_scene(SceneSpec{}, 64, 64).image;
  WeatherSpec w;
  w.intensity = 1.0;
  Rng rng(4);
  const Image v = degrade_weather(u, w, rng);
  for (int x = 0; x < 64; ++x) {
    EXPECT_EQ(v.at(0, 0, x), w.fog_color.r);
    EXPECT_EQ(v.at(1, 0, x), w.fog_color.g);
    EXPECT_EQ(v.at(2, 0, x), w.fog_color.b);
  }
}

TEST(Weather, FogDistanceIsMonotone) {
  const Image u = render_clear_scene(SceneSpec{}, 64, 64).image;
  WeatherSpec w;
  const std::array<double, 3> fog{w.fog_color.r, w.fog_color.g, w.fog_color.b};
  double prev = 1e300;
  for (int k = 0; k <= 20; ++k) {
    w.intensity = k / 20.0;
    Rng rng(5);
    const Image v = degrade_weather(u, w, rng);
    double dist = 0.0;
    for (int c = 0; c < 3; ++c)
      for (double p : v.plane(c)) dist += std::abs(p - fog[c]);
    EXPECT_LE(dist, prev + 1e-12) << "intensity " << w.intensity;
    prev = dist;
  }
}

TEST(Weather, RainAndSnowAreReproducible) {
  const Image u = render_clear_scene(SceneSpec{}, 64, 64).image;
  for (WeatherKind k : {WeatherKind::kRain, WeatherKind::kSnow, WeatherKind::kMix}) {
    WeatherSpec w;
    w.kind = k;
    w.rain_streaks = 50;
    w.intensity = 0.7;
    Rng a(6), b(6), c(7);
    const Image va = degrade_weather(u, w, a);
    const Image vb = degrade_weather(u, w, b);
    const Image vc = degrade_weather(u, w, c);
    EXPECT_TRUE(std::equal(va.data().begin(), va.data().end(), vb.data().begin()));
    EXPECT_FALSE(std::equal(va.data().begin(), va.data().end(), vc.data().begin()));
    for (double p : va.data()) {
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
    }
  }
}

TEST(Weather, RainBrightensOnly) {
  const Image u = render_clear_scene(SceneSpec{}, 64, 64).image;
  WeatherSpec w;
  w.kind = WeatherKind::kRain;
  w.intensity = 1.0;
  Rng rng(8);
  const Image v = degrade_weather(u, w, rng);
  for (std::size_t i = 0; i < u.size(); ++i) EXPECT_GE(v.data()[i], u.data()[i]);
}

TEST(Weather, ParsesKindsAndValidates) {
  EXPECT_EQ(parse_weather("snow"), WeatherKind::kSnow);
  EXPECT_THROW(parse_weather("hail"), ConfigError);
  WeatherSpec w;
  w.intensity = 1.5;
  EXPECT_FALSE(w.valid());
  w.intensity = 0.5;
  w.rain_streaks = -1;
  EXPECT_FALSE(w.valid());
}

TEST(RotateScene, ZeroAngleIsIdentity) {
  const RenderedScene r = render_clear_scene(SceneSpec{}, 64, 64);
  const RenderedScene o = rotate_scene(r.image, r.truth, 0.0);
  EXPECT_TRUE(std::equal(r.image.data().begin(), r.image.data().end(), o.image.data().begin()));
  ASSERT_EQ(o.truth.size(), r.truth.size());
  for (std::size_t i = 0; i < r.truth.size(); ++i) expect_box_near(o.truth[i].box, r.truth[i].box, 1e-9);
}

TEST(RotateScene, HalfTurnKeepsCenteredSquare) {
  const Image u(128, 128, 3, 0.5);
  const SceneTruth t{{ElementClass::kMarker, {54, 54, 20, 20}}};
  const RenderedScene o = rotate_scene(u, t, kPi);
  expect_box_near(o.truth[0].box, t[0].box, 1e-9);
}

TEST(RotateScene, TenDegreeHullMatchesHandRotation) {
  const double phi = deg_to_rad(10.0);
  const Box b{40, 30, 20, 10};
  const Image u(128, 128, 3, 0.5);
  const RenderedScene o = rotate_scene(u, {{ElementClass::kNumber, b}}, phi);
  // The source is pulled through R(phi) about the image centre (64, 64),
  // so content moves by R(-phi): (dx, dy) -> (c dx + s dy, -s dx + c dy).
  const double c = std::cos(phi), s = std::sin(phi);
  double x0 = 1e9, y0 = 1e9, x1 = -1e9, y1 = -1e9;
  for (double px : {b.x, b.x + b.w}) {
    for (double py : {b.y, b.y + b.h}) {
      const double dx = px - 64.0, dy = py - 64.0;
      const double tx = 64.0 + c * dx + s * dy;
      const double ty = 64.0 - s * dx + c * dy;
      x0 = std::min(x0, tx);
      x1 = std::max(x1, tx);
      y0 = std::min(y0, ty);
      y1 = std::max(y1, ty);
    }
  }
  expect_box_near(o.truth[0].box, {x0, y0, x1 - x0, y1 - y0}, 1e-9);
}

TEST(RotateScene, HullsContainRotatedPaint) {
  std::vector<Image> masks;
  const RenderedScene r = render_clear_scene(SceneSpec{}, 128, 128, &masks);
  for (double deg : {-15.0, -5.0, 3.0, 10.0, 15.0}) {
    const double phi = deg_to_rad(deg);
    const RenderedScene o = rotate_scene(r.image, r.truth, phi);
    for (std::size_t e = 0; e < masks.size(); ++e) {
      const Image m = rotate_scene(masks[e], {}, phi).image;
      const Box& b = o.truth[e].box;
      for (int y = 0; y < 128; ++y) {
        for (int x = 0; x < 128; ++x) {
          if (m.at(0, y, x) <= 0.0) continue;
          // A touched pixel's centre lies within one pixel of the element.
          EXPECT_GE(x + 0.5, b.x - 1.0) << deg << " element " << e;
          EXPECT_LE(x + 0.5, b.x + b.w + 1.0) << deg << " element " << e;
          EXPECT_GE(y + 0.5, b.y - 1.0) << deg << " element " << e;
          EXPECT_LE(y + 0.5, b.y + b.h + 1.0) << deg << " element " << e;
        }
      }
    }
  }
}

TEST(Truth, FileRoundTrip) {
  const fs::path dir = fresh_dir("truth");
  fs::create_directories(dir);
  const SceneTruth t = render_clear_scene(SceneSpec{}, 128, 128).truth;
  write_truth(dir / "t.txt", t);
  EXPECT_EQ(read_truth(dir / "t.txt"), t);
  std::ofstream(dir / "bad.txt") << "marker 1 2 3\n";
  EXPECT_THROW(read_truth(dir / "bad.txt"), DataError);
  std::ofstream(dir / "bad2.txt") << "runway 1 2 3 4\n";
  EXPECT_THROW(read_truth(dir / "bad2.txt"), DataError);
}

TEST(AllotCounts, MatchesProportionsExactly) {
  const std::vector<WeatherMixEntry> mix{{WeatherKind::kRain, {0.2, 0.8}, 0.5},
                                         {WeatherKind::kFog, {0.2, 0.8}, 0.3},
                                         {WeatherKind::kSnow, {0.2, 0.8}, 0.2}};
  EXPECT_EQ(allot_counts(200, mix), (std::vector<int>{100, 60, 40}));
  EXPECT_EQ(allot_counts(7, mix), (std::vector<int>{4, 2, 1}));
  int sum = 0;
  for (int c : allot_counts(13, mix)) sum += c;
  EXPECT_EQ(sum, 13);
  EXPECT_THROW(allot_counts(5, {}), ConfigError);
}

TEST(PairedDataset, SingleSampleWritesFiles) {
  const fs::path dir = fresh_dir("one");
  const Manifest m = make_paired_dataset(1, SceneSpec{}, {WeatherMixEntry{}}, 64, 11, dir);
  ASSERT_EQ(m.entries.size(), 1u);
  EXPECT_TRUE(fs::exists(dir / "manifest.txt"));
  EXPECT_TRUE(fs::exists(dir / m.entries[0].clean));
  EXPECT_TRUE(fs::exists(dir / m.entries[0].degraded));
  EXPECT_TRUE(fs::exists(dir / m.entries[0].truth));
  EXPECT_THROW(make_paired_dataset(0, SceneSpec{}, {WeatherMixEntry{}}, 64, 11, dir),
               ConfigError);
}

TEST(PairedDataset, SameSeedSameBytesAndManifestRoundTrip) {
  const std::vector<WeatherMixEntry> mix{{WeatherKind::kRain, {0.2, 0.8}, 0.5},
                                         {WeatherKind::kFog, {0.2, 0.8}, 0.5}};
  const fs::path a = fresh_dir("a"), b = fresh_dir("b");
  const Manifest ma = make_paired_dataset(6, SceneSpec{}, mix, 64, 21, a);
  make_paired_dataset(6, SceneSpec{}, mix, 64, 21, b);
  for (const auto& entry : fs::directory_iterator(a)) {
    EXPECT_EQ(slurp(entry.path()), slurp(b / entry.path().filename())) << entry.path();
  }
  int rain = 0;
  for (const ManifestEntry& e : ma.entries) rain += e.weather == WeatherKind::kRain;
  EXPECT_EQ(rain, 3);

  const Manifest back = read_manifest(a);
  ASSERT_EQ(back.entries.size(), ma.entries.size());
  for (std::size_t i = 0; i < back.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].clean, ma.entries[i].clean);
    EXPECT_EQ(back.entries[i].weather, ma.entries[i].weather);
    EXPECT_EQ(back.entries[i].intensity, ma.entries[i].intensity);
    EXPECT_EQ(back.entries[i].seed, ma.entries[i].seed);
  }
}

}  // namespace
}  // namespace rustan
