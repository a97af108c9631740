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

// Independent reference computations used by the unit tests and the
// acceptance binary. Nothing here calls into the code under test except
// for the plain value types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

#include "rustan/affine.hpp"
#include "rustan/detection.hpp"
#include "rustan/image.hpp"
#include "rustan/random.hpp"
#include "rustan/scene.hpp"

namespace rustan::oracle {

inline double relative_error(double a, double b, double floor = 1e-8) {
  const double scale = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / scale;
}

inline Image random_image(int h, int w, int c, Rng& rng) {
  Image img(h, w, c);
  for (double& v : img.data()) v = uniform01(rng);
  return img;
}

// Per-point bilinear sample of channel c at pixel coordinates (px, py) with
// zero padding, written from the four-neighbour definition.
inline double bilinear_at(const Image& u, int c, double px, double py) {
  const int x0 = static_cast<int>(std::floor(px));
  const int y0 = static_cast<int>(std::floor(py));
  const double fx = px - x0;
  const double fy = py - y0;
  auto pix = [&](int x, int y) {
    if (x < 0 || y < 0 || x >= u.width() || y >= u.height()) return 0.0;
    return u.at(c, y, x);
  };
  return (1 - fy) * ((1 - fx) * pix(x0, y0) + fx * pix(x0 + 1, y0)) +
         fy * ((1 - fx) * pix(x0, y0 + 1) + fx * pix(x0 + 1, y0 + 1));
}

// Pull warp built from the textbook formulas: normalize the target pixel,
// apply the top two rows of theta, denormalize, sample.
inline Image reference_warp(const Image& u, const AffineMatrix& t) {
  const int h = u.height(), w = u.width();
  Image out(h, w, u.channels());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double xt = -1.0 + 2.0 * x / (w - 1);
      const double yt = -1.0 + 2.0 * y / (h - 1);
      const double xs = t(0, 0) * xt + t(0, 1) * yt + t(0, 2);
      const double ys = t(1, 0) * xt + t(1, 1) * yt + t(1, 2);
      const double px = (xs + 1.0) * (w - 1) / 2.0;
      const double py = (ys + 1.0) * (h - 1) / 2.0;
      for (int c = 0; c < u.channels(); ++c) out.at(c, y, x) = bilinear_at(u, c, px, py);
    }
  }
  return out;
}

inline double inner(const Image& a, const Image& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a.data()[i] * b.data()[i];
  return s;
}

// True when moving any theta entry by +-step moves some source coordinate
// across an integer pixel position, where the sampler has a kink and
// central differences stop being exact.
inline bool crosses_pixel_boundary(const AffineMatrix& t, int h, int w, double step) {
  for (int k = 0; k < 6; ++k) {
    for (double sgn : {-1.0, 1.0}) {
      std::array<double, 6> top = t.top_rows();
      top[k] += sgn * step;
      const AffineMatrix p = AffineMatrix::from_top_rows(top);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const double xt = -1.0 + 2.0 * x / (w - 1);
          const double yt = -1.0 + 2.0 * y / (h - 1);
          const double px0 = (t(0, 0) * xt + t(0, 1) * yt + t(0, 2) + 1.0) * (w - 1) / 2.0;
          const double py0 = (t(1, 0) * xt + t(1, 1) * yt + t(1, 2) + 1.0) * (h - 1) / 2.0;
          const double px1 = (p(0, 0) * xt + p(0, 1) * yt + p(0, 2) + 1.0) * (w - 1) / 2.0;
          const double py1 = (p(1, 0) * xt + p(1, 1) * yt + p(1, 2) + 1.0) * (h - 1) / 2.0;
          if (std::floor(px0) != std::floor(px1) || std::floor(py0) != std::floor(py1))
            return true;
        }
      }
    }
  }
  return false;
}

// Central differences of <grad_out, warp(u, theta)> with respect to the six
// free entries of theta.
inline std::array<double, 6> fd_theta(const std::function<Image(const AffineMatrix&)>& warp_fn,
                                      const AffineMatrix& t, const Image& grad_out,
                                      double step) {
  std::array<double, 6> g{};
  for (int k = 0; k < 6; ++k) {
    std::array<double, 6> plus = t.top_rows(), minus = t.top_rows();
    plus[k] += step;
    minus[k] -= step;
    g[k] = (inner(grad_out, warp_fn(AffineMatrix::from_top_rows(plus))) -
            inner(grad_out, warp_fn(AffineMatrix::from_top_rows(minus)))) /
           (2.0 * step);
  }
  return g;
}

// AP by sweeping a confidence threshold over every distinct score: at each
// threshold the kept detections are re-matched image by image from scratch,
// giving one (recall, precision) point; the interpolated precision at
// recall r is the best precision among points with recall >= r, and the
// area is integrated over the distinct recall levels.
inline double brute_force_ap(ElementClass cls, const std::vector<std::vector<Detection>>& dets,
                             const std::vector<SceneTruth>& truths, double iou_thr) {
  std::set<double, std::greater<>> scores;
  std::size_t n_truth = 0;
  for (const auto& t : truths)
    for (const TruthBox& b : t) n_truth += b.cls == cls;
  for (const auto& d : dets)
    for (const Detection& x : d)
      if (x.cls == cls) scores.insert(x.confidence);
  auto box_iou = [](const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
    return ix * iy / (a.w * a.h + b.w * b.h - ix * iy);
  };
  std::vector<std::pair<double, double>> points;  // (recall, precision)
  for (double thr : scores) {
    std::size_t tp = 0, kept = 0;
    for (std::size_t i = 0; i < dets.size(); ++i) {
      std::vector<Detection> d;
      for (const Detection& x : dets[i])
        if (x.cls == cls && x.confidence >= thr) d.push_back(x);
      std::stable_sort(d.begin(), d.end(), [](const Detection& a, const Detection& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        if (a.box.x != b.box.x) return a.box.x < b.box.x;
        return a.box.y < b.box.y;
      });
      std::vector<bool> used(truths[i].size(), false);
      for (const Detection& x : d) {
        ++kept;
        int best = -1;
        double best_v = 0.0;
        for (std::size_t j = 0; j < truths[i].size(); ++j) {
          if (used[j] || truths[i][j].cls != cls) continue;
          const double v = box_iou(x.box, truths[i][j].box);
          if (v >= iou_thr && v > best_v) {
            best = static_cast<int>(j);
            best_v = v;
          }
        }
        if (best >= 0) {
          used[best] = true;
          ++tp;
        }
      }
    }
    points.emplace_back(double(tp) / double(n_truth), double(tp) / double(kept));
  }
  std::set<double> recalls;
  for (const auto& p : points) recalls.insert(p.first);
  double ap = 0.0, prev = 0.0;
  for (double r : recalls) {
    if (r <= 0.0) continue;
    double best = 0.0;
    for (const auto& p : points)
      if (p.first >= r) best = std::max(best, p.second);
    ap += (r - prev) * best;
    prev = r;
  }
  return ap;
}

struct MetricToy {
  std::vector<std::vector<Detection>> dets;
  std::vector<SceneTruth> truths;
};

// Five images, ten detections with distinct confidences: exact hits,
// a duplicate, loose hits at several IoUs and plain false positives.
inline MetricToy five_image_toy() {
  constexpr ElementClass kM = ElementClass::kMarker;
  constexpr ElementClass kC = ElementClass::kCenterline;
  constexpr ElementClass kN = ElementClass::kNumber;
  MetricToy t;
  t.truths = {
      {{kM, {10, 10, 20, 10}}, {kC, {60, 20, 4, 12}}},
      {{kN, {50, 50, 16, 10}}, {kM, {80, 100, 10, 5}}},
      {{kC, {62, 40, 4, 10}}},
      {{kM, {20, 100, 10, 5}}, {kN, {55, 80, 15, 10}}},
      {},
  };
  t.dets = {
      {{kM, {10, 10, 20, 10}, 0.95}, {kM, {11, 11, 20, 10}, 0.55}, {kC, {60, 21, 4, 12}, 0.7}},
      {{kN, {52, 50, 16, 10}, 0.8}, {kM, {80, 101, 10, 5}, 0.35}},
      {{kC, {62, 40, 5, 10}, 0.65}, {kM, {0, 0, 5, 5}, 0.9}},
      {{kN, {55, 80, 15, 10}, 0.6}, {kM, {21, 100, 10, 5}, 0.85}},
      {{kC, {64, 64, 4, 10}, 0.5}},
  };
  return t;
}

}  // namespace rustan::oracle
