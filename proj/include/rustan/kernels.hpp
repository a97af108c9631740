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

// Data-parallel inner loops. Every kernel has a portable scalar reference
// and, on x86-64, an AVX2 variant. The active table is chosen once at
// startup from CPUID and can be forced for equivalence testing.

#include <cstddef>
#include <span>
#include <string_view>

namespace rustan::kernels {

enum class Isa { kScalar, kAvx2 };

std::string_view isa_name(Isa isa);

// One output row of an affine bilinear warp. Source pixel coordinates of
// output column i are (px0 + i * dpx, py0 + i * dpy). Samples outside the
// source contribute zero.
struct SampleRowArgs {
  const double* src = nullptr;   // channel 0 plane of the source
  std::size_t src_plane = 0;     // elements between channel planes
  int src_height = 0;
  int src_width = 0;
  int channels = 0;
  double* dst = nullptr;         // channel 0, first column of the row
  std::size_t dst_plane = 0;
  int count = 0;
  double px0 = 0.0;
  double dpx = 0.0;
  double py0 = 0.0;
  double dpy = 0.0;
};

struct KernelTable {
  Isa isa;
  // y += a * x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*dot)(const double* a, const double* b, std::size_t n);
  double (*sum_abs_diff)(const double* a, const double* b, std::size_t n);
  void (*sample_row)(const SampleRowArgs& args);
};

bool available(Isa isa);

// Throws ConfigError if the ISA is not supported by this build or CPU.
const KernelTable& table(Isa isa);

const KernelTable& active();
void select(Isa isa);
Isa best_available();

// Span wrappers over the active table.
void axpy(double a, std::span<const double> x, std::span<double> y);
double dot(std::span<const double> a, std::span<const double> b);
double sum_abs_diff(std::span<const double> a, std::span<const double> b);

namespace detail {
extern const KernelTable kScalarTable;
#if defined(RUSTAN_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif
}  // namespace detail

}  // namespace rustan::kernels
