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
#include <vector>

#include "rustan/image.hpp"
#include "rustan/nn.hpp"
#include "rustan/random.hpp"

namespace rustan {

// Encoder-decoder restoration net. The input image is concatenated with two
// normalized coordinate planes and encoded by two stride-2 convs. The decoder
// upsamples, concatenates the first encoder stage and the per-channel mean of
// the deepest features, and convolves; a final conv predicts one gain plane
// and one offset plane per colour at half resolution, which are upsampled and
// applied to the input: out_c = x_c + gain * detail_c + offset_c, where
// detail_c is x_c minus a box blur of radius width / 32.
struct DistillerArch {
  int height = 128;
  int width = 128;
  int enc1 = 8;
  int enc2 = 16;

  static constexpr int kImageChannels = 3;
  static constexpr int kInputChannels = kImageChannels + 2;

  // Throws ConfigError unless both sides are divisible by 4.
  void validate() const;
  std::size_t param_count() const;

  std::vector<int> encode() const;
  static DistillerArch decode(const std::vector<int>& fields);

  friend bool operator==(const DistillerArch&, const DistillerArch&) = default;
};

struct DistillerParams {
  DistillerArch arch;
  std::vector<double> values;
};

struct PairedSample {
  Image x;  // degraded
  Image y;  // clean target
};

struct DistillerCache {
  nn::Tensor input;  // image + coordinate planes
  nn::Tensor e1, e2, d1_in, d1;
  nn::Tensor head;    // gain plane, then one offset plane per colour
  nn::Tensor detail;  // image minus its local mean
  std::vector<double> cols[4];
};

// Hidden convs get fan-in scaled uniform weights; the output conv starts at
// zero so a fresh network is the identity.
DistillerParams distiller_init(const DistillerArch& arch, Rng& rng);

// Unclamped output. Throws ShapeError when x does not match the arch.
Image distiller_forward(const DistillerParams& params, const Image& x,
                        DistillerCache* cache = nullptr);

// Parameter gradient for d(loss)/d(output) = grad_out.
std::vector<double> distiller_backward(const DistillerParams& params,
                                       const DistillerCache& cache, const Image& grad_out);

// Mean |y - g_out| over all pixels and channels.
double distill_loss(const Image& y, const Image& g_out);

struct DistillConfig {
  double learning_rate = 3e-3;
  int epochs = 40;
  int batch_size = 4;
  std::uint64_t seed = 0;

  void validate() const;  // throws ConfigError
};

struct DistillReport {
  std::vector<double> epoch_loss;
};

struct DistillResult {
  DistillerParams params;
  DistillReport report;
};

// Adam on the L1 objective. Throws NumericalError on a non-finite loss.
DistillResult train_distiller(std::span<const PairedSample> dataset, const DistillerArch& arch,
                              const DistillConfig& config);

// Forward pass clamped to [0, 1].
Image restore(const DistillerParams& params, const Image& x);

// Returned for identical images, where the ratio is unbounded.
inline constexpr double kPsnrMax = 100.0;

// 10 log10(1 / MSE) for unit-range images.
double psnr(const Image& a, const Image& b);

// CSV with header "epoch,l1".
void write_distill_report_csv(const std::filesystem::path& path, const DistillReport& report);

}  // namespace rustan
