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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "rustan/adam.hpp"
#include "rustan/affine.hpp"
#include "rustan/image.hpp"
#include "rustan/localization_net.hpp"
#include "rustan/random.hpp"

namespace rustan {

// rustan: both loss terms. stn_baseline: image loss only (lambda1 is
// forced to zero). none: no training, the identity-initialized net.
enum class TrainMode { kRustan, kStnBaseline, kNone };

std::string_view mode_name(TrainMode m);
TrainMode parse_mode(std::string_view name);  // throws ConfigError

struct TrainConfig {
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  double learning_rate = 1e-5;
  int epochs = 500;
  int batch_size = 8;
  PoseRanges ranges;
  std::uint64_t seed = 0;
  TrainMode mode = TrainMode::kRustan;

  // Throws ConfigError.
  void validate() const;
  // lambda1 as actually applied (zero in stn_baseline mode).
  double effective_lambda1() const;
};

struct LossTerms {
  double total = 0.0;
  double l_theta = 0.0;
  double l_image = 0.0;
};

// l_theta = identity_residual(theta_gt * theta_p); l_image = mean |v_gt - v_p|.
LossTerms rustan_loss(const AffineMatrix& theta_gt, const AffineMatrix& theta_p,
                      const Image& v_gt, const Image& v_p, double lambda1, double lambda2);

// d l_theta / d theta_p over the six free entries, with sign(0) = 0.
std::array<double, 6> theta_loss_grad(const AffineMatrix& theta_gt,
                                      const AffineMatrix& theta_p);

// Loss and parameter gradient for one clean image under a fixed pose.
struct SampleGradient {
  LossTerms loss;
  std::vector<double> grad;
};
SampleGradient rustan_sample_gradient(const LocNetParams& params, const Image& v_gt,
                                      const AffineMatrix& theta_gt, double lambda1,
                                      double lambda2);

// One Adam step over a batch of clean images; poses are drawn from rng.
// Returns the batch-mean losses. Throws NumericalError on non-finite loss.
LossTerms train_step(LocNetParams& params, AdamState& opt, std::span<const Image> batch,
                     const TrainConfig& config, Rng& rng);

struct ResidualStats {
  int count = 0;
  double median = 0.0;
  double mean = 0.0;
  double p90 = 0.0;
};

struct EpochStats {
  int epoch = 0;
  double l_theta = 0.0;
  double l_image = 0.0;
  double total = 0.0;
};

struct TrainReport {
  std::vector<EpochStats> epochs;
  ResidualStats validation;
};

struct TrainResult {
  LocNetParams params;
  TrainReport report;
};

// Deterministic for a fixed config seed. When `validation` is non-empty the
// report carries identity-residual statistics on held-out poses drawn from
// `validation_ranges`.
TrainResult train(std::span<const Image> dataset, const LocNetArch& arch,
                  const TrainConfig& config, std::span<const Image> validation = {},
                  const PoseRanges& validation_ranges = {});

// Median/mean/p90 of identity_residual(theta_gt * theta_p) over one random
// pose per image.
ResidualStats pose_residuals(const LocNetParams& params, std::span<const Image> images,
                             const PoseRanges& ranges, std::uint64_t seed);

struct Calibration {
  Image v;
  AffineMatrix theta_p;
};

// Predicts theta_p and warps u by it. An image larger than the network
// input by an integer factor is area-downsampled for the prediction only;
// the warp is applied at full resolution.
Calibration calibrate(const LocNetParams& params, const Image& u);

AffineMatrix predict_theta(const LocNetParams& params, const Image& u);

// CSV with header "epoch,l_theta,l_image,total".
void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report);

}  // namespace rustan
