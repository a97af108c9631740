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
#include "rustan/scene.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rustan/error.hpp"
#include "rustan/grid_sampler.hpp"

namespace rustan {
namespace {

constexpr int kSupersample = 4;

Box hull(const std::vector<Box>& parts) {
  double x0 = parts.front().x, y0 = parts.front().y;
  double x1 = x0 + parts.front().w, y1 = y0 + parts.front().h;
  for (const Box& b : parts) {
    x0 = std::min(x0, b.x);
    y0 = std::min(y0, b.y);
    x1 = std::max(x1, b.x + b.w);
    y1 = std::max(y1, b.y + b.h);
  }
  return {x0, y0, x1 - x0, y1 - y0};
}

bool contains(const Box& b, double x, double y) {
  return x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h;
}

// Seven-segment strokes a..g for a digit cell at (x, y).
std::vector<Box> digit_segments(int digit, double x, double y, double w, double h,
                                double s) {
  static constexpr std::array<unsigned, 10> kSegments = {
      0b0111111, 0b0000110, 0b1011011, 0b1001111, 0b1100110,
      0b1101101, 0b1111101, 0b0000111, 0b1111111, 0b1101111};
  const double mid = h / 2.0;
  const std::array<Box, 7> seg = {{
      {x, y, w, s},                              // a top
      {x + w - s, y, s, mid + s / 2.0},          // b upper right
      {x + w - s, y + mid - s / 2.0, s, mid + s / 2.0},  // c lower right
      {x, y + h - s, w, s},                      // d bottom
      {x, y + mid - s / 2.0, s, mid + s / 2.0},  // e lower left
      {x, y, s, mid + s / 2.0},                  // f upper left
      {x, y + mid - s / 2.0, w, s},              // g middle
  }};
  std::vector<Box> out;
  for (int i = 0; i < 7; ++i) {
    if (kSegments[digit] & (1u << i)) out.push_back(seg[i]);
  }
  return out;
}

double lerp(double a, double b, double t) { return a + (b - a) * t; }

double runway_half_width(const SceneSpec& s, double y) {
  const double t = (y - s.horizon_y) / (kReferenceSize - s.horizon_y);
  return lerp(s.runway_top_half, s.runway_bottom_half, t);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void draw_segment_glow(Image& img, double x0, double y0, double x1, double y1,
                       double brightness) {
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  const int xa = std::max(0, static_cast<int>(std::floor(std::min(x0, x1) - 1)));
  const int xb = std::min(img.width() - 1, static_cast<int>(std::ceil(std::max(x0, x1) + 1)));
  const int ya = std::max(0, static_cast<int>(std::floor(std::min(y0, y1) - 1)));
  const int yb = std::min(img.height() - 1, static_cast<int>(std::ceil(std::max(y0, y1) + 1)));
  for (int y = ya; y <= yb; ++y) {
    for (int x = xa; x <= xb; ++x) {
      const double cx = x + 0.5;
      const double cy = y + 0.5;
      double t = len2 > 0.0 ? ((cx - x0) * dx + (cy - y0) * dy) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      const double d = std::hypot(cx - (x0 + t * dx), cy - (y0 + t * dy));
      const double a = brightness * std::max(0.0, 1.0 - d / 0.8);
      if (a <= 0.0) continue;
      for (int c = 0; c < img.channels(); ++c) img.at(c, y, x) += a;
    }
  }
}

void apply_fog(Image& img, const WeatherSpec& w, double intensity) {
  const std::array<double, 3> fog{w.fog_color.r, w.fog_color.g, w.fog_color.b};
  const int h = img.height();
  for (int y = 0; y < h; ++y) {
    const double depth = 1.0 - static_cast<double>(y) / (h - 1);
    const double alpha = std::min(1.0, intensity * w.fog_falloff * depth);
    for (int c = 0; c < img.channels(); ++c) {
      const double f = fog[std::min(c, 2)];
      for (int x = 0; x < img.width(); ++x) {
        double& v = img.at(c, y, x);
        v = alpha == 1.0 ? f : (1.0 - alpha) * v + alpha * f;
      }
    }
  }
}

void apply_rain(Image& img, const WeatherSpec& w, double intensity, Rng& rng) {
  const double sx = img.width() / kReferenceSize;
  const double sy = img.height() / kReferenceSize;
  for (int i = 0; i < w.rain_streaks; ++i) {
    const double x = uniform(rng, 0.0, img.width());
    const double y = uniform(rng, 0.0, img.height());
    const double len = w.rain_length * uniform(rng, 0.6, 1.0);
    const double dx = std::sin(w.rain_angle) * len * sx;
    const double dy = std::cos(w.rain_angle) * len * sy;
    draw_segment_glow(img, x, y, x + dx, y + dy, intensity * w.rain_brightness);
  }
}

void apply_snow(Image& img, const WeatherSpec& w, double intensity, Rng& rng) {
  const double r = w.snow_radius * img.width() / kReferenceSize;
  const int reach = static_cast<int>(std::ceil(3.0 * r));
  for (int i = 0; i < w.snow_flakes; ++i) {
    const double cx = uniform(rng, 0.0, img.width());
    const double cy = uniform(rng, 0.0, img.height());
    const double b = intensity * w.snow_brightness * uniform(rng, 0.6, 1.0);
    const int x0 = static_cast<int>(cx);
    const int y0 = static_cast<int>(cy);
    for (int y = std::max(0, y0 - reach); y <= std::min(img.height() - 1, y0 + reach); ++y) {
      for (int x = std::max(0, x0 - reach); x <= std::min(img.width() - 1, x0 + reach); ++x) {
        const double d2 = (x + 0.5 - cx) * (x + 0.5 - cx) + (y + 0.5 - cy) * (y + 0.5 - cy);
        const double a = b * std::exp(-d2 / (2.0 * r * r));
        for (int c = 0; c < img.channels(); ++c) img.at(c, y, x) += a;
      }
    }
  }
}

}  // namespace

std::string_view class_name(ElementClass c) {
  switch (c) {
    case ElementClass::kMarker:
      return "marker";
    case ElementClass::kCenterline:
      return "centerline";
    case ElementClass::kNumber:
      return "number";
  }
  return "unknown";
}

ElementClass parse_class(std::string_view name) {
  if (name == "marker") return ElementClass::kMarker;
  if (name == "centerline") return ElementClass::kCenterline;
  if (name == "number") return ElementClass::kNumber;
  throw DataError("unknown element class: " + std::string(name));
}

std::vector<SceneElement> layout_elements(const SceneSpec& s) {
  std::vector<SceneElement> out;
  // Stripes alternate left/right, moving outward.
  for (int i = 0; i < s.marker_count; ++i) {
    const int k = i / 2;
    const bool left = i % 2 == 0;
    const double offset = s.marker_inner + k * (s.marker_w + s.marker_gap);
    const double x = left ? s.center_x - offset - s.marker_w : s.center_x + offset;
    out.push_back({ElementClass::kMarker, {{x, s.marker_y, s.marker_w, s.marker_h}}, {}});
  }

  const double number_w = 2.0 * s.digit_w + s.digit_gap;
  const double nx = s.center_x - number_w / 2.0;
  std::vector<Box> glyph = digit_segments(s.digits[0], nx, s.number_y, s.digit_w,
                                          s.digit_h, s.stroke);
  const auto second = digit_segments(s.digits[1], nx + s.digit_w + s.digit_gap, s.number_y,
                                     s.digit_w, s.digit_h, s.stroke);
  glyph.insert(glyph.end(), second.begin(), second.end());
  out.push_back({ElementClass::kNumber, glyph, {}});

  double bottom = s.dash_bottom;
  for (int i = 0; i < s.dash_count; ++i) {
    const double t = s.dash_count > 1 ? static_cast<double>(i) / (s.dash_count - 1) : 0.0;
    const double len = std::round(lerp(s.dash_len_near, s.dash_len_far, t));
    const double gap = std::round(lerp(s.dash_gap_near, s.dash_gap_far, t));
    out.push_back({ElementClass::kCenterline,
                   {{s.center_x - s.dash_w / 2.0, bottom - len, s.dash_w, len}},
                   {}});
    bottom -= len + gap;
  }

  for (SceneElement& e : out) {
    e.bounds = hull(e.parts);
    const Box& b = e.bounds;
    if (b.x < 0.0 || b.y < 0.0 || b.x + b.w > kReferenceSize ||
        b.y + b.h > kReferenceSize || b.w <= 0.0 || b.h <= 0.0) {
      throw DataError("scene element '" + std::string(class_name(e.cls)) +
                      "' out of bounds");
    }
    if (e.cls == ElementClass::kCenterline && b.y < s.horizon_y) {
      throw DataError("centerline dash above the horizon");
    }
  }
  return out;
}

RenderedScene render_clear_scene(const SceneSpec& spec, int height, int width,
                                 std::vector<Image>* masks) {
  if (height < 64 || width < 64) throw ShapeError("render_clear_scene: resolution below 64x64");
  for (int d : spec.digits) {
    if (d < 0 || d > 9) throw DataError("runway digit out of range");
  }
  const std::vector<SceneElement> elements = layout_elements(spec);
  const double sx = width / kReferenceSize;
  const double sy = height / kReferenceSize;

  RenderedScene scene{Image(height, width, 3), {}};
  if (masks != nullptr) masks->assign(elements.size(), Image(height, width, 1));
  Rng texture(derive_seed(spec.seed, 0x7e47u));
  const double ss_weight = 1.0 / (kSupersample * kSupersample);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      Rgb acc;
      const double grain = spec.ground_texture * (2.0 * uniform01(texture) - 1.0);
      for (int j = 0; j < kSupersample; ++j) {
        for (int i = 0; i < kSupersample; ++i) {
          const double rx = (x + (i + 0.5) / kSupersample) / sx;
          const double ry = (y + (j + 0.5) / kSupersample) / sy;
          Rgb col;
          if (ry < spec.horizon_y) {
            col = spec.sky;
          } else if (std::abs(rx - spec.center_x) <= runway_half_width(spec, ry)) {
            col = spec.asphalt;
          } else {
            col = {spec.ground.r + grain, spec.ground.g + grain, spec.ground.b + grain};
          }
          for (std::size_t e = 0; e < elements.size(); ++e) {
            const auto& parts = elements[e].parts;
            if (std::any_of(parts.begin(), parts.end(),
                            [&](const Box& b) { return contains(b, rx, ry); })) {
              col = spec.paint;
              if (masks != nullptr) (*masks)[e].at(0, y, x) += ss_weight;
              break;
            }
          }
          acc.r += col.r;
          acc.g += col.g;
          acc.b += col.b;
        }
      }
      scene.image.at(0, y, x) = std::clamp(acc.r * ss_weight, 0.0, 1.0);
      scene.image.at(1, y, x) = std::clamp(acc.g * ss_weight, 0.0, 1.0);
      scene.image.at(2, y, x) = std::clamp(acc.b * ss_weight, 0.0, 1.0);
    }
  }
  for (const SceneElement& e : elements) {
    scene.truth.push_back(
        {e.cls, {e.bounds.x * sx, e.bounds.y * sy, e.bounds.w * sx, e.bounds.h * sy}});
  }
  return scene;
}

SceneSpec jitter_scene(const SceneSpec& base, Rng& rng) {
  SceneSpec s = base;
  s.seed = rng();
  s.center_x += uniform_int(rng, -2, 2);
  s.horizon_y += uniform_int(rng, -2, 2);
  s.runway_bottom_half += uniform_int(rng, -3, 3);
  s.marker_count = uniform_int(rng, 0, 1) == 0 ? 4 : 6;
  s.marker_y += uniform_int(rng, -2, 2);
  s.number_y += uniform_int(rng, -2, 2);
  s.dash_count = uniform_int(rng, 3, 4);
  s.dash_bottom += uniform_int(rng, -2, 1);
  const int heading = uniform_int(rng, 1, 36);
  s.digits = {heading / 10, heading % 10};
  auto shade = [&](Rgb c) {
    const double d = uniform(rng, -0.03, 0.03);
    return Rgb{c.r + d, c.g + d, c.b + d};
  };
  s.sky = shade(s.sky);
  s.ground = shade(s.ground);
  s.asphalt = shade(s.asphalt);
  return s;
}

std::string_view weather_name(WeatherKind k) {
  switch (k) {
    case WeatherKind::kRain:
      return "rain";
    case WeatherKind::kFog:
      return "fog";
    case WeatherKind::kSnow:
      return "snow";
    case WeatherKind::kMix:
      return "mix";
  }
  return "unknown";
}

WeatherKind parse_weather(std::string_view name) {
  if (name == "rain") return WeatherKind::kRain;
  if (name == "fog") return WeatherKind::kFog;
  if (name == "snow") return WeatherKind::kSnow;
  if (name == "mix") return WeatherKind::kMix;
  throw ConfigError("unknown weather kind: " + std::string(name));
}

bool WeatherSpec::valid() const {
  return intensity >= 0.0 && intensity <= 1.0 && fog_falloff >= 0.0 && rain_streaks >= 0 &&
         rain_length >= 0.0 && rain_brightness >= 0.0 && snow_flakes >= 0 &&
         snow_radius >= 0.0 && snow_brightness >= 0.0;
}

Image degrade_weather(const Image& u, const WeatherSpec& w, Rng& rng) {
  if (!w.valid()) throw ConfigError("degrade_weather: invalid weather spec");
  Image out = u;
  if (w.intensity == 0.0) return out;
  switch (w.kind) {
    case WeatherKind::kFog:
      apply_fog(out, w, w.intensity);
      break;
    case WeatherKind::kRain:
      apply_rain(out, w, w.intensity, rng);
      break;
    case WeatherKind::kSnow:
      apply_snow(out, w, w.intensity, rng);
      break;
    case WeatherKind::kMix:
      apply_fog(out, w, w.intensity);
      apply_rain(out, w, w.intensity, rng);
      apply_snow(out, w, 0.5 * w.intensity, rng);
      break;
  }
  clamp_unit(out);
  return out;
}

Box transform_box(const Box& b, const AffineMatrix& theta, int height, int width) {
  const AffineMatrix push = invert(theta);
  double x0 = 1e300, y0 = 1e300, x1 = -1e300, y1 = -1e300;
  for (const auto& [cx, cy] : {std::pair{b.x, b.y}, std::pair{b.x + b.w, b.y},
                              std::pair{b.x, b.y + b.h}, std::pair{b.x + b.w, b.y + b.h}}) {
    // Continuous coordinates sit half a pixel off the index lattice.
    const double xs = normalize_coord(cx - 0.5, width);
    const double ys = normalize_coord(cy - 0.5, height);
    const double xt = push(0, 0) * xs + push(0, 1) * ys + push(0, 2);
    const double yt = push(1, 0) * xs + push(1, 1) * ys + push(1, 2);
    const double px = denormalize_coord(xt, width) + 0.5;
    const double py = denormalize_coord(yt, height) + 0.5;
    x0 = std::min(x0, px);
    y0 = std::min(y0, py);
    x1 = std::max(x1, px);
    y1 = std::max(y1, py);
  }
  x0 = std::clamp(x0, 0.0, static_cast<double>(width));
  x1 = std::clamp(x1, 0.0, static_cast<double>(width));
  y0 = std::clamp(y0, 0.0, static_cast<double>(height));
  y1 = std::clamp(y1, 0.0, static_cast<double>(height));
  return {x0, y0, x1 - x0, y1 - y0};
}

RenderedScene rotate_scene(const Image& u, const SceneTruth& truth, double phi) {
  if (!(std::abs(phi) <= kPi)) throw ConfigError("rotate_scene: |phi| must not exceed pi");
  if (phi == 0.0) return {u, truth};
  const AffineMatrix theta = compose_pose({0.0, 0.0, phi, 1.0, 1.0});
  RenderedScene out{warp(u, theta), {}};
  for (const TruthBox& t : truth) {
    const Box b = transform_box(t.box, theta, u.height(), u.width());
    if (b.w > 0.0 && b.h > 0.0) out.truth.push_back({t.cls, b});
  }
  return out;
}

void write_truth(const std::filesystem::path& path, const SceneTruth& truth) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  for (const TruthBox& t : truth) {
    out << class_name(t.cls) << ' ' << format_double(t.box.x) << ' '
        << format_double(t.box.y) << ' ' << format_double(t.box.w) << ' '
        << format_double(t.box.h) << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

SceneTruth read_truth(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open truth file: " + path.string());
  SceneTruth truth;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string cls;
    Box b;
    if (!(ss >> cls >> b.x >> b.y >> b.w >> b.h) || b.w <= 0.0 || b.h <= 0.0) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": malformed truth record");
    }
    truth.push_back({parse_class(cls), b});
  }
  return truth;
}

std::vector<int> allot_counts(int n, const std::vector<WeatherMixEntry>& weather) {
  if (weather.empty()) throw ConfigError("weather mix is empty");
  double total = 0.0;
  for (const auto& w : weather) {
    if (w.proportion < 0.0) throw ConfigError("weather proportion must be non-negative");
    total += w.proportion;
  }
  if (total <= 0.0) throw ConfigError("weather proportions sum to zero");
  std::vector<int> counts(weather.size());
  std::vector<std::pair<double, std::size_t>> remainders;
  int assigned = 0;
  for (std::size_t i = 0; i < weather.size(); ++i) {
    const double exact = n * weather[i].proportion / total;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    remainders.push_back({exact - counts[i], i});
  }
  // Largest remainder first; ties go to the earlier entry.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; assigned < n; ++k, ++assigned) ++counts[remainders[k].second];
  return counts;
}

Manifest make_paired_dataset(int n, const SceneSpec& base,
                             const std::vector<WeatherMixEntry>& weather, int size,
                             std::uint64_t seed, const std::filesystem::path& dir,
                             const WeatherSpec& weather_params) {
  if (n < 1) throw ConfigError("make_paired_dataset: n must be at least 1");
  const std::vector<int> counts = allot_counts(n, weather);
  std::vector<std::size_t> kinds;
  for (std::size_t i = 0; i < counts.size(); ++i) kinds.insert(kinds.end(), counts[i], i);
  Rng order(derive_seed(seed, 0xA110C));
  for (std::size_t i = kinds.size(); i > 1; --i) {
    std::swap(kinds[i - 1], kinds[static_cast<std::size_t>(uniform_int(order, 0, static_cast<int>(i) - 1))]);
  }

  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory " + dir.string() + ": " + ec.message());

  Manifest m;
  m.root = dir;
  for (int i = 0; i < n; ++i) {
    const std::uint64_t sample_seed = derive_seed(seed, static_cast<std::uint64_t>(i));
    Rng rng(sample_seed);
    const SceneSpec spec = jitter_scene(base, rng);
    const RenderedScene scene = render_clear_scene(spec, size, size);
    const WeatherMixEntry& mix = weather[kinds[static_cast<std::size_t>(i)]];
    WeatherSpec w = weather_params;
    w.kind = mix.kind;
    w.intensity = uniform(rng, mix.intensity.lo, mix.intensity.hi);
    const Image degraded = degrade_weather(scene.image, w, rng);

    char stem[32];
    std::snprintf(stem, sizeof(stem), "scene_%05d", i);
    ManifestEntry e;
    e.index = i;
    e.clean = std::string(stem) + "_clean.ppm";
    e.degraded = std::string(stem) + "_degraded.ppm";
    e.truth = std::string(stem) + "_truth.txt";
    e.weather = w.kind;
    e.intensity = w.intensity;
    e.seed = sample_seed;
    write_ppm(dir / e.clean, scene.image);
    write_ppm(dir / e.degraded, degraded);
    write_truth(dir / e.truth, scene.truth);
    m.entries.push_back(e);
  }
  write_manifest(m);
  return m;
}

void write_manifest(const Manifest& m) {
  const auto path = m.root / "manifest.txt";
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "# index clean degraded truth weather intensity seed\n";
  for (const ManifestEntry& e : m.entries) {
    out << "index=" << e.index << " clean=" << e.clean << " degraded=" << e.degraded
        << " truth=" << e.truth << " weather=" << weather_name(e.weather)
        << " intensity=" << format_double(e.intensity) << " seed=" << e.seed << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Manifest read_manifest(const std::filesystem::path& dir) {
  const auto path = dir / "manifest.txt";
  std::ifstream in(path);
  if (!in) throw DataError("missing dataset manifest: " + path.string());
  Manifest m;
  m.root = dir;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string kv;
    ManifestEntry e;
    int seen = 0;
    try {
      while (ss >> kv) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw DataError("expected key=value");
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        ++seen;
        if (key == "index") e.index = std::stoi(val);
        else if (key == "clean") e.clean = val;
        else if (key == "degraded") e.degraded = val;
        else if (key == "truth") e.truth = val;
        else if (key == "weather") e.weather = parse_weather(val);
        else if (key == "intensity") e.intensity = std::stod(val);
        else if (key == "seed") e.seed = std::stoull(val);
        else --seen;
      }
    } catch (const std::exception& ex) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
    if (seen != 7) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": incomplete record");
    }
    m.entries.push_back(e);
  }
  return m;
}

}  // namespace rustan
