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
#include "rustan/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rustan/error.hpp"

namespace rustan {
namespace {

struct Component {
  int x0, y0, x1, y1;  // inclusive pixel bounds
  int area = 0;
  double cx = 0.0, cy = 0.0;

  int w() const { return x1 - x0 + 1; }
  int h() const { return y1 - y0 + 1; }
  Box box() const { return {double(x0), double(y0), double(w()), double(h())}; }
};

std::vector<Component> components(const Image& u, double threshold) {
  const int h = u.height(), w = u.width();
  std::vector<char> mask(u.plane_size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double v = u.at(0, y, x);
      for (int c = 1; c < u.channels(); ++c) v = std::min(v, u.at(c, y, x));
      mask[std::size_t(y) * w + x] = v >= threshold;
    }
  }
  std::vector<Component> out;
  std::vector<int> stack;
  for (int start = 0; start < h * w; ++start) {
    if (!mask[start]) continue;
    Component comp{start % w, start / w, start % w, start / w};
    double sx = 0.0, sy = 0.0;
    mask[start] = 0;
    stack.push_back(start);
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      const int x = p % w, y = p / w;
      comp.x0 = std::min(comp.x0, x);
      comp.x1 = std::max(comp.x1, x);
      comp.y0 = std::min(comp.y0, y);
      comp.y1 = std::max(comp.y1, y);
      ++comp.area;
      sx += x + 0.5;
      sy += y + 0.5;
      const int nbr[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& n : nbr) {
        if (n[0] < 0 || n[0] >= w || n[1] < 0 || n[1] >= h) continue;
        const int q = n[1] * w + n[0];
        if (mask[q]) {
          mask[q] = 0;
          stack.push_back(q);
        }
      }
    }
    comp.cx = sx / comp.area;
    comp.cy = sy / comp.area;
    out.push_back(comp);
  }
  return out;
}

// Grows from 0.5 at the decision boundary to 1 at 1.5x past it.
double margin_score(double value, double boundary) {
  return std::clamp(0.5 + (value / boundary - 1.0), 0.5, 1.0);
}

double size_score(double area, double expected) { return std::min(1.0, area / expected); }

double confidence(double size, double margin) {
  return std::clamp(0.2 + 0.8 * size * margin, 0.0, 1.0);
}

bool detection_before(const Detection& a, const Detection& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  if (a.box.x != b.box.x) return a.box.x < b.box.x;
  return a.box.y < b.box.y;
}

}  // namespace

std::vector<Detection> detect(const Image& u, const DetectorParams& p) {
  std::vector<Detection> out;
  if (u.empty()) return out;
  if (u.channels() != 3) throw ShapeError("detect: expected a 3-channel image");
  const double W = u.width(), H = u.height();
  const double scale2 = (W * H) / (kReferenceSize * kReferenceSize);
  const double mid = W / 2.0;

  std::vector<Component> comps;
  for (const Component& c : components(u, p.threshold)) {
    if (c.area < p.min_area_frac * W * H) continue;
    if (c.w() > p.max_side_frac * W || c.h() > p.max_side_frac * H) continue;
    comps.push_back(c);
  }
  std::sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    return a.x0 != b.x0 ? a.x0 < b.x0 : a.y0 < b.y0;
  });

  // Digits: two glyph-sized components side by side near the midline.
  std::vector<char> used(comps.size(), 0);
  const double min_digit_h = 0.05 * H;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (used[i]) continue;
    const Component& a = comps[i];
    if (a.h() < min_digit_h) continue;
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      if (used[j]) continue;
      const Component& b = comps[j];
      if (b.h() < min_digit_h) continue;
      const int gap = b.x0 - a.x1 - 1;
      if (gap < 0 || gap > 0.06 * W) continue;
      const double ratio = double(b.h()) / a.h();
      if (ratio < 0.6 || ratio > 1.0 / 0.6) continue;
      const int overlap = std::min(a.y1, b.y1) - std::max(a.y0, b.y0) + 1;
      const double overlap_frac = double(overlap) / std::min(a.h(), b.h());
      if (overlap_frac < 0.5) continue;
      const double cx = 0.5 * (a.x0 + b.x1 + 1);
      if (std::abs(cx - mid) > p.number_band * W) continue;
      used[i] = used[j] = 1;
      Component m{std::min(a.x0, b.x0), std::min(a.y0, b.y0), std::max(a.x1, b.x1),
                  std::max(a.y1, b.y1)};
      const double size = size_score(a.area + b.area, 30.0 * scale2);
      out.push_back({ElementClass::kNumber, m.box(),
                     confidence(size, margin_score(overlap_frac, 0.5))});
      break;
    }
  }

  for (std::size_t i = 0; i < comps.size(); ++i) {
    if (used[i]) continue;
    const Component& c = comps[i];
    const double tall = double(c.h()) / c.w();
    const double wide = double(c.w()) / c.h();
    if (std::abs(c.cx - mid) <= p.midline_band * W && tall >= p.centerline_aspect) {
      const double size = size_score(c.area, 10.0 * scale2);
      out.push_back({ElementClass::kCenterline, c.box(),
                     confidence(size, margin_score(tall, p.centerline_aspect))});
    } else if (c.cy >= p.threshold_band * H && wide >= p.marker_aspect) {
      const double size = size_score(c.area, 30.0 * scale2);
      out.push_back({ElementClass::kMarker, c.box(),
                     confidence(size, margin_score(wide, p.marker_aspect))});
    }
  }
  std::sort(out.begin(), out.end(), detection_before);
  return out;
}

double iou(const Box& a, const Box& b) {
  const double ix = std::max(0.0, std::min(a.x + a.w, b.x + b.w) - std::max(a.x, b.x));
  const double iy = std::max(0.0, std::min(a.y + a.h, b.y + b.h) - std::max(a.y, b.y));
  const double inter = ix * iy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

MatchResult match_detections(std::span<const Detection> preds, const SceneTruth& truths,
                             double iou_threshold) {
  MatchResult r;
  std::vector<int> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return detection_before(preds[a], preds[b]); });
  std::vector<char> taken(truths.size(), 0);
  for (int pi : order) {
    const Detection& d = preds[pi];
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t t = 0; t < truths.size(); ++t) {
      if (taken[t] || truths[t].cls != d.cls) continue;
      const double v = iou(d.box, truths[t].box);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = int(t);
        best_iou = v;
      }
    }
    if (best >= 0) {
      taken[best] = 1;
      ++r.tp;
      r.pairs.emplace_back(pi, best);
    } else {
      ++r.fp;
    }
  }
  r.fn = int(truths.size()) - r.tp;
  return r;
}

PrF1 pr_f1(int tp, int fp, int fn) {
  PrF1 r;
  if (tp + fp > 0) r.precision = double(tp) / (tp + fp);
  if (tp + fn > 0) r.recall = double(tp) / (tp + fn);
  if (r.precision + r.recall > 0.0)
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

namespace {

struct Ranked {
  Detection det;
  std::size_t image;
};

void require_aligned(std::span<const std::vector<Detection>> detections,
                     std::span<const SceneTruth> truths) {
  if (detections.size() != truths.size())
    throw DataError("detections cover " + std::to_string(detections.size()) +
                    " images but truth covers " + std::to_string(truths.size()));
}

std::size_t count_truth(ElementClass cls, std::span<const SceneTruth> truths) {
  std::size_t n = 0;
  for (const SceneTruth& t : truths)
    for (const TruthBox& b : t) n += b.cls == cls;
  return n;
}

// Per-image matching restricted to one class; returns TP flags in the order
// of the dataset-wide ranking.
std::vector<char> rank_and_match(ElementClass cls,
                                 std::span<const std::vector<Detection>> detections,
                                 std::span<const SceneTruth> truths, double iou_threshold) {
  std::vector<Ranked> ranked;
  for (std::size_t i = 0; i < detections.size(); ++i)
    for (const Detection& d : detections[i])
      if (d.cls == cls) ranked.push_back({d, i});
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.det.confidence != b.det.confidence) return a.det.confidence > b.det.confidence;
    if (a.det.box.x != b.det.box.x) return a.det.box.x < b.det.box.x;
    if (a.det.box.y != b.det.box.y) return a.det.box.y < b.det.box.y;
    return a.image < b.image;
  });
  std::vector<std::vector<char>> taken(truths.size());
  for (std::size_t i = 0; i < truths.size(); ++i) taken[i].assign(truths[i].size(), 0);
  std::vector<char> tp(ranked.size(), 0);
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    const SceneTruth& t = truths[ranked[k].image];
    auto& tk = taken[ranked[k].image];
    int best = -1;
    double best_iou = iou_threshold;
    for (std::size_t j = 0; j < t.size(); ++j) {
      if (tk[j] || t[j].cls != cls) continue;
      const double v = iou(ranked[k].det.box, t[j].box);
      if (v >= best_iou && (best < 0 || v > best_iou)) {
        best = int(j);
        best_iou = v;
      }
    }
    if (best >= 0) {
      tk[best] = 1;
      tp[k] = 1;
    }
  }
  return tp;
}

}  // namespace

double average_precision(ElementClass cls, std::span<const std::vector<Detection>> detections,
                         std::span<const SceneTruth> truths, double iou_threshold) {
  require_aligned(detections, truths);
  const std::size_t n_truth = count_truth(cls, truths);
  if (n_truth == 0)
    throw DataError("no ground truth for class " + std::string(class_name(cls)));
  const std::vector<char> tp = rank_and_match(cls, detections, truths, iou_threshold);
  const std::size_t n = tp.size();
  std::vector<double> precision(n), recall(n);
  std::size_t hits = 0;
  for (std::size_t k = 0; k < n; ++k) {
    hits += tp[k];
    precision[k] = double(hits) / double(k + 1);
    recall[k] = double(hits) / double(n_truth);
  }
  for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);
  double ap = 0.0, prev_recall = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    ap += (recall[k] - prev_recall) * precision[k];
    prev_recall = recall[k];
  }
  return ap;
}

double iou_threshold_at(int k) { return 0.50 + 0.05 * k; }

MetricsReport map_scores(std::span<const std::vector<Detection>> detections,
                         std::span<const SceneTruth> truths, double confidence_threshold) {
  require_aligned(detections, truths);
  MetricsReport r;
  r.confidence_threshold = confidence_threshold;
  for (int c = 0; c < kNumClasses; ++c) {
    if (count_truth(ElementClass(c), truths) == 0)
      throw DataError("no ground truth for class " + std::string(class_name(ElementClass(c))));
  }
  int tp = 0, fp = 0, fn = 0;
  for (int c = 0; c < kNumClasses; ++c) {
    const auto cls = ElementClass(c);
    ClassMetrics& m = r.per_class[c];
    for (int k = 0; k < kNumIouThresholds; ++k)
      m.ap[k] = average_precision(cls, detections, truths, iou_threshold_at(k));
    for (std::size_t i = 0; i < truths.size(); ++i) {
      std::vector<Detection> kept;
      for (const Detection& d : detections[i])
        if (d.cls == cls && d.confidence >= confidence_threshold) kept.push_back(d);
      SceneTruth t;
      for (const TruthBox& b : truths[i])
        if (b.cls == cls) t.push_back(b);
      const MatchResult mr = match_detections(kept, t, 0.5);
      m.tp += mr.tp;
      m.fp += mr.fp;
      m.fn += mr.fn;
    }
    m.prf = pr_f1(m.tp, m.fp, m.fn);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    r.map50 += m.ap[0];
    for (double a : m.ap) r.map50_95 += a;
  }
  r.aggregate = pr_f1(tp, fp, fn);
  r.map50 /= kNumClasses;
  r.map50_95 /= kNumClasses * kNumIouThresholds;
  return r;
}

std::vector<F1Point> f1_curve(ElementClass cls, std::span<const std::vector<Detection>> detections,
                              std::span<const SceneTruth> truths) {
  require_aligned(detections, truths);
  std::vector<F1Point> curve;
  for (int step = 0; step <= 100; ++step) {
    const double conf = step / 100.0;
    int tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < truths.size(); ++i) {
      std::vector<Detection> kept;
      for (const Detection& d : detections[i])
        if (d.cls == cls && d.confidence >= conf) kept.push_back(d);
      SceneTruth t;
      for (const TruthBox& b : truths[i])
        if (b.cls == cls) t.push_back(b);
      const MatchResult mr = match_detections(kept, t, 0.5);
      tp += mr.tp;
      fp += mr.fp;
      fn += mr.fn;
    }
    curve.push_back({conf, pr_f1(tp, fp, fn)});
  }
  return curve;
}

}  // namespace rustan
