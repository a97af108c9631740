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
#include <filesystem>
#include <span>
#include <vector>

#include "rustan/image.hpp"
#include "rustan/scene.hpp"

namespace rustan {

struct Detection {
  ElementClass cls = ElementClass::kMarker;
  Box box;
  double confidence = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Geometric detector tuning. Sizes are fractions of the image side so the
// same settings work at any resolution.
struct DetectorParams {
  double threshold = 0.6;          // on min(r, g, b)
  double min_area_frac = 2.0e-4;   // of the image area
  double max_side_frac = 0.35;
  double midline_band = 0.08;      // |cx - W/2| / W for centerline dashes
  double number_band = 0.12;
  double threshold_band = 0.72;    // markers live below this fraction of H
  double centerline_aspect = 1.2;  // h / w
  double marker_aspect = 1.3;      // w / h
};

// Threshold -> 4-connected components -> geometric classification. The
// heuristics are tuned at the 128 px reference resolution; at 64 px glyph
// strokes are a single pixel and numbers fragment. Throws ShapeError on a
// non-RGB image.
std::vector<Detection> detect(const Image& u, const DetectorParams& params = {});

double iou(const Box& a, const Box& b);

struct MatchResult {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  std::vector<std::pair<int, int>> pairs;  // (prediction index, truth index)
};

// Per class, predictions in descending confidence (ties: lower x, then lower
// y) each take the highest-IoU unmatched truth of their class with IoU at or
// above the threshold.
MatchResult match_detections(std::span<const Detection> preds, const SceneTruth& truths,
                             double iou_threshold);

struct PrF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Zero denominators yield 0.
PrF1 pr_f1(int tp, int fp, int fn);

// All-points interpolated AP for one class over a dataset. Throws DataError
// when the class has no ground truth.
double average_precision(ElementClass cls, std::span<const std::vector<Detection>> detections,
                         std::span<const SceneTruth> truths, double iou_threshold);

inline constexpr int kNumIouThresholds = 10;
double iou_threshold_at(int k);  // 0.50, 0.55, ..., 0.95

struct ClassMetrics {
  int tp = 0;
  int fp = 0;
  int fn = 0;
  PrF1 prf;
  std::array<double, kNumIouThresholds> ap{};
};

struct MetricsReport {
  double confidence_threshold = 0.25;
  std::array<ClassMetrics, kNumClasses> per_class{};
  PrF1 aggregate;  // micro-averaged over classes
  double map50 = 0.0;
  double map50_95 = 0.0;
};

// Throws DataError unless every class has ground truth somewhere.
MetricsReport map_scores(std::span<const std::vector<Detection>> detections,
                         std::span<const SceneTruth> truths,
                         double confidence_threshold = 0.25);

struct F1Point {
  double confidence = 0.0;
  PrF1 prf;
};

// One point per confidence step of 0.01 from 0 to 1, IoU 0.5.
std::vector<F1Point> f1_curve(ElementClass cls, std::span<const std::vector<Detection>> detections,
                              std::span<const SceneTruth> truths);

}  // namespace rustan
