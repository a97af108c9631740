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

namespace rustan {

// Normalized source coordinates for every target pixel, row-major. The
// normalization is corner-aligned: index 0 maps to -1, index dim-1 to +1.
struct SamplingGrid {
  int height = 0;
  int width = 0;
  std::vector<double> xs;
  std::vector<double> ys;
};

inline double normalize_coord(double index, int dim) {
  return -1.0 + 2.0 * index / static_cast<double>(dim - 1);
}
inline double denormalize_coord(double norm, int dim) {
  return (norm + 1.0) * static_cast<double>(dim - 1) * 0.5;
}

// theta maps target coordinates to source coordinates (pull warping).
SamplingGrid generate_grid(const AffineMatrix& theta, int height, int width);

// Output has the grid's shape and u's channel count.
Image bilinear_sample(const Image& u, const SamplingGrid& grid);

// bilinear_sample(u, generate_grid(theta, u.height(), u.width())), fused
// and dispatched to the active kernel table.
Image warp(const Image& u, const AffineMatrix& theta);

struct WarpGradients {
  Image grad_u;
  std::array<double, 6> grad_theta{};  // row-major top two rows
};

// Exact reverse-mode gradients of warp(). At integer source coordinates the
// derivative of the interpolation weights is taken from the left cell.
WarpGradients warp_backward(const Image& u, const AffineMatrix& theta,
                            const Image& grad_out);

// grad_theta only; skips the scatter into grad_u.
std::array<double, 6> warp_backward_theta(const Image& u, const AffineMatrix& theta,
                                          const Image& grad_out);

}  // namespace rustan
