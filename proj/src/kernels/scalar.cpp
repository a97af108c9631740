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
// Portable reference kernels. These define the expected results that the
// SIMD variants are tested against.

#include <cmath>

#include "rustan/kernels.hpp"

namespace rustan::kernels {
namespace {

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_abs_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

}  // namespace

namespace detail {

// Shared with the SIMD variants for their tails, so a tail column is
// computed bit-identically whichever table is active.
void sample_columns_scalar(const SampleRowArgs& a, int begin, int end) {
  const int w = a.src_width;
  const int h = a.src_height;
  for (int i = begin; i < end; ++i) {
    const double px = a.px0 + static_cast<double>(i) * a.dpx;
    const double py = a.py0 + static_cast<double>(i) * a.dpy;
    const double fx0 = std::floor(px);
    const double fy0 = std::floor(py);
    const double fx = px - fx0;
    const double fy = py - fy0;
    // Anything beyond one pixel outside contributes nothing; this also
    // keeps the integer conversion below in range.
    if (!(fx0 >= -1.0 && fx0 <= w - 1.0 && fy0 >= -1.0 && fy0 <= h - 1.0)) {
      for (int c = 0; c < a.channels; ++c) a.dst[c * a.dst_plane + i] = 0.0;
      continue;
    }
    const int x0 = static_cast<int>(fx0);
    const int y0 = static_cast<int>(fy0);
    const bool vx0 = x0 >= 0;
    const bool vx1 = x0 + 1 <= w - 1;
    const bool vy0 = y0 >= 0;
    const bool vy1 = y0 + 1 <= h - 1;
    for (int c = 0; c < a.channels; ++c) {
      const double* src = a.src + c * a.src_plane;
      const double v00 = (vy0 && vx0) ? src[y0 * w + x0] : 0.0;
      const double v01 = (vy0 && vx1) ? src[y0 * w + x0 + 1] : 0.0;
      const double v10 = (vy1 && vx0) ? src[(y0 + 1) * w + x0] : 0.0;
      const double v11 = (vy1 && vx1) ? src[(y0 + 1) * w + x0 + 1] : 0.0;
      const double top = (1.0 - fx) * v00 + fx * v01;
      const double bottom = (1.0 - fx) * v10 + fx * v11;
      a.dst[c * a.dst_plane + i] = (1.0 - fy) * top + fy * bottom;
    }
  }
}

namespace {
void sample_row_scalar(const SampleRowArgs& a) { sample_columns_scalar(a, 0, a.count); }
}  // namespace

const KernelTable kScalarTable = {
    Isa::kScalar, axpy_scalar, dot_scalar, sum_abs_diff_scalar, sample_row_scalar,
};

}  // namespace detail
}  // namespace rustan::kernels
