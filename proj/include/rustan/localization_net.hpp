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
#include <vector>

#include "rustan/affine.hpp"
#include "rustan/image.hpp"
#include "rustan/nn.hpp"
#include "rustan/random.hpp"

namespace rustan {

struct ConvStage {
  int kernel = 3;
  int stride = 2;
  int channels = 8;
};

// conv stages (each followed by ReLU) -> average pool onto a
// pool_grid x pool_grid lattice -> dense(hidden) + ReLU -> dense(6).
struct LocNetArch {
  int height = 64;
  int width = 64;
  int channels = 3;
  std::vector<ConvStage> stages{{3, 2, 8}, {3, 2, 16}};
  int pool_grid = 4;
  int hidden = 32;

  // Throws ConfigError when the spatial sizes do not chain.
  void validate() const;
  std::size_t param_count() const;

  std::vector<int> encode() const;
  static LocNetArch decode(const std::vector<int>& fields);

  friend bool operator==(const LocNetArch& a, const LocNetArch& b) {
    return a.encode() == b.encode();
  }
};

struct LocNetParams {
  LocNetArch arch;
  std::vector<double> values;
};

// Activations kept for the backward pass.
struct LocNetCache {
  std::vector<nn::Tensor> stage_inputs;
  std::vector<std::vector<double>> cols;
  nn::Tensor last_conv;  // post-ReLU output of the final conv stage
  nn::Tensor pooled;
  std::vector<double> hidden;  // post-ReLU
};

struct LocNetOutput {
  AffineMatrix theta;
  LocNetCache cache;
};

// Hidden layers get fan-in scaled uniform weights; the output layer starts
// with zero weights and the identity transform as bias, so a fresh network
// predicts exactly the identity.
LocNetParams locnet_init(const LocNetArch& arch, Rng& rng);

// Throws ShapeError when the image does not match the architecture.
LocNetOutput locnet_forward(const LocNetParams& params, const Image& u);

std::vector<double> locnet_backward(const LocNetParams& params, const LocNetCache& cache,
                                    const std::array<double, 6>& grad_theta);

}  // namespace rustan
