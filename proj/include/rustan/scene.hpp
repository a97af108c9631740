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
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "rustan/affine.hpp"
#include "rustan/image.hpp"
#include "rustan/random.hpp"

namespace rustan {

enum class ElementClass { kMarker = 0, kCenterline = 1, kNumber = 2 };
inline constexpr int kNumClasses = 3;

std::string_view class_name(ElementClass c);
ElementClass parse_class(std::string_view name);  // throws DataError

// Axis-aligned box in continuous pixel coordinates; pixel (i, j) covers
// [i, i+1) x [j, j+1).
struct Box {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const Box&, const Box&) = default;
};

struct TruthBox {
  ElementClass cls;
  Box box;

  friend bool operator==(const TruthBox&, const TruthBox&) = default;
};

using SceneTruth = std::vector<TruthBox>;

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;
};

// Canonical runway scene. Geometry is expressed in a 128 x 128 reference
// frame and scaled to the render resolution; y grows downward and the
// horizon is at the top.
struct SceneSpec {
  double horizon_y = 22.0;
  double center_x = 64.5;
  double runway_top_half = 5.0;
  double runway_bottom_half = 46.0;

  Rgb sky{0.46, 0.60, 0.80};
  Rgb ground{0.24, 0.40, 0.20};
  Rgb asphalt{0.25, 0.25, 0.27};
  Rgb paint{0.96, 0.96, 0.94};
  double ground_texture = 0.03;

  // Threshold stripes, split evenly left and right of the centerline.
  int marker_count = 6;
  double marker_y = 108.0;
  double marker_w = 9.0;
  double marker_h = 5.0;
  double marker_gap = 3.0;
  double marker_inner = 4.5;  // distance from center_x to the first stripe

  // Two seven-segment digits.
  std::array<int, 2> digits{2, 7};
  double number_y = 84.0;
  double digit_w = 6.0;
  double digit_h = 10.0;
  double stroke = 2.0;
  double digit_gap = 3.0;

  // Dashes stacked upward from dash_bottom, shrinking toward the horizon.
  int dash_count = 4;
  double dash_bottom = 78.0;
  double dash_w = 3.0;
  double dash_len_near = 10.0;
  double dash_len_far = 4.0;
  double dash_gap_near = 6.0;
  double dash_gap_far = 4.0;

  std::uint64_t seed = 0;  // ground texture
};

inline constexpr double kReferenceSize = 128.0;

// Painted rectangles in reference units, grouped per truth element.
struct SceneElement {
  ElementClass cls;
  std::vector<Box> parts;
  Box bounds;  // tight hull of the parts
};

// Throws DataError when an element leaves the reference frame.
std::vector<SceneElement> layout_elements(const SceneSpec& spec);

struct RenderedScene {
  Image image;
  SceneTruth truth;
};

// Resolution must be at least 64 x 64. When `masks` is non-null it receives
// one single-channel coverage image per truth box, in truth order.
RenderedScene render_clear_scene(const SceneSpec& spec, int height, int width,
                                 std::vector<Image>* masks = nullptr);

// Random per-sample variation of a base spec.
SceneSpec jitter_scene(const SceneSpec& base, Rng& rng);

enum class WeatherKind { kRain, kFog, kSnow, kMix };

std::string_view weather_name(WeatherKind k);
WeatherKind parse_weather(std::string_view name);  // throws ConfigError

struct WeatherSpec {
  WeatherKind kind = WeatherKind::kFog;
  double intensity = 0.5;
  // fog: alpha(row) = min(1, intensity * falloff * depth), depth 1 at the top
  double fog_falloff = 2.4;
  Rgb fog_color{0.75, 0.75, 0.77};
  // rain: additive streaks
  int rain_streaks = 60;
  double rain_length = 10.0;  // reference units
  double rain_angle = 0.25;   // radians from vertical
  double rain_brightness = 0.35;
  // snow: additive soft discs
  int snow_flakes = 80;
  double snow_radius = 1.2;  // reference units
  double snow_brightness = 0.6;

  bool valid() const;
};

// Photometric corruption only; geometry and ground truth are unchanged.
Image degrade_weather(const Image& u, const WeatherSpec& w, Rng& rng);

// Pulls the image through compose_pose(0, 0, phi, 1, 1); each truth box
// becomes the clipped axis-aligned hull of its rotated corners. Throws
// ConfigError when |phi| > pi.
RenderedScene rotate_scene(const Image& u, const SceneTruth& truth, double phi);

// Maps a box through the push direction of `theta` (target = theta^-1 *
// source) and returns the clipped hull; w or h is 0 when nothing remains.
Box transform_box(const Box& b, const AffineMatrix& theta, int height, int width);

// Truth files: one "class x y w h" record per line.
void write_truth(const std::filesystem::path& path, const SceneTruth& truth);
SceneTruth read_truth(const std::filesystem::path& path);

struct WeatherMixEntry {
  WeatherKind kind = WeatherKind::kFog;
  Interval intensity{0.5, 0.5};
  double proportion = 1.0;
};

struct ManifestEntry {
  int index = 0;
  std::string clean;
  std::string degraded;
  std::string truth;
  WeatherKind weather = WeatherKind::kFog;
  double intensity = 0.0;
  std::uint64_t seed = 0;
};

struct Manifest {
  std::filesystem::path root;  // entry paths are relative to this
  std::vector<ManifestEntry> entries;
};

// Writes n (clean, degraded, truth) triples plus manifest.txt under dir.
// Weather kinds are allotted by largest remainder so per-kind counts match
// the requested proportions exactly, then shuffled.
Manifest make_paired_dataset(int n, const SceneSpec& base,
                             const std::vector<WeatherMixEntry>& weather, int size,
                             std::uint64_t seed, const std::filesystem::path& dir,
                             const WeatherSpec& weather_params = {});

void write_manifest(const Manifest& m);
Manifest read_manifest(const std::filesystem::path& dir);

// Exact per-kind counts for a weather mix.
std::vector<int> allot_counts(int n, const std::vector<WeatherMixEntry>& weather);

}  // namespace rustan
