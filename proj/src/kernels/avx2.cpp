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
// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// is only entered after the dispatcher has confirmed CPU support.

#include <immintrin.h>

#include <cmath>

#include "rustan/kernels.hpp"

namespace rustan::kernels {
namespace detail {
void sample_columns_scalar(const SampleRowArgs& a, int begin, int end);
}  // namespace detail

namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d y0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    const __m256d y1 =
        _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4));
    _mm256_storeu_pd(y + i, y0);
    _mm256_storeu_pd(y + i + 4, y1);
  }
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i,
                     _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

double sum_abs_diff_avx2(const double* a, const double* b, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d0));
    acc1 = _mm256_add_pd(acc1, _mm256_andnot_pd(sign, d1));
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_add_pd(acc0, _mm256_andnot_pd(sign, d));
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

// Same arithmetic, in the same order and without fusion, as the scalar
// reference; the two are bit-identical.
void sample_row_avx2(const SampleRowArgs& a) {
  const int n4 = a.count & ~3;
  const __m256d lane = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
  const __m256d px0 = _mm256_set1_pd(a.px0);
  const __m256d dpx = _mm256_set1_pd(a.dpx);
  const __m256d py0 = _mm256_set1_pd(a.py0);
  const __m256d dpy = _mm256_set1_pd(a.dpy);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d neg_one = _mm256_set1_pd(-1.0);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d xmax = _mm256_set1_pd(a.src_width - 1.0);
  const __m256d ymax = _mm256_set1_pd(a.src_height - 1.0);
  const __m128i width = _mm_set1_epi32(a.src_width);

  for (int i = 0; i < n4; i += 4) {
    const __m256d vi = _mm256_add_pd(_mm256_set1_pd(static_cast<double>(i)), lane);
    const __m256d px = _mm256_add_pd(px0, _mm256_mul_pd(vi, dpx));
    const __m256d py = _mm256_add_pd(py0, _mm256_mul_pd(vi, dpy));
    const __m256d fx0 = _mm256_floor_pd(px);
    const __m256d fy0 = _mm256_floor_pd(py);
    const __m256d fx = _mm256_sub_pd(px, fx0);
    const __m256d fy = _mm256_sub_pd(py, fy0);

    const __m256d inside = _mm256_and_pd(
        _mm256_and_pd(_mm256_cmp_pd(fx0, neg_one, _CMP_GE_OQ),
                      _mm256_cmp_pd(fx0, xmax, _CMP_LE_OQ)),
        _mm256_and_pd(_mm256_cmp_pd(fy0, neg_one, _CMP_GE_OQ),
                      _mm256_cmp_pd(fy0, ymax, _CMP_LE_OQ)));
    const __m256d mx0 = _mm256_and_pd(inside, _mm256_cmp_pd(fx0, zero, _CMP_GE_OQ));
    const __m256d mx1 =
        _mm256_and_pd(inside, _mm256_cmp_pd(_mm256_add_pd(fx0, one), xmax, _CMP_LE_OQ));
    const __m256d my0 = _mm256_and_pd(inside, _mm256_cmp_pd(fy0, zero, _CMP_GE_OQ));
    const __m256d my1 =
        _mm256_and_pd(inside, _mm256_cmp_pd(_mm256_add_pd(fy0, one), ymax, _CMP_LE_OQ));
    const __m256d m00 = _mm256_and_pd(my0, mx0);
    const __m256d m01 = _mm256_and_pd(my0, mx1);
    const __m256d m10 = _mm256_and_pd(my1, mx0);
    const __m256d m11 = _mm256_and_pd(my1, mx1);

    // Lanes outside the valid range are masked; clamp before converting so
    // the integer indices stay representable.
    const __m128i ix0 = _mm256_cvtpd_epi32(_mm256_max_pd(_mm256_min_pd(fx0, xmax), neg_one));
    const __m128i iy0 = _mm256_cvtpd_epi32(_mm256_max_pd(_mm256_min_pd(fy0, ymax), neg_one));
    const __m128i i00 = _mm_add_epi32(_mm_mullo_epi32(iy0, width), ix0);
    const __m128i i01 = _mm_add_epi32(i00, _mm_set1_epi32(1));
    const __m128i i10 = _mm_add_epi32(i00, width);
    const __m128i i11 = _mm_add_epi32(i10, _mm_set1_epi32(1));
    const __m256d wx0 = _mm256_sub_pd(one, fx);
    const __m256d wy0 = _mm256_sub_pd(one, fy);

    for (int c = 0; c < a.channels; ++c) {
      const double* src = a.src + c * a.src_plane;
      const __m256d v00 = _mm256_mask_i32gather_pd(zero, src, i00, m00, 8);
      const __m256d v01 = _mm256_mask_i32gather_pd(zero, src, i01, m01, 8);
      const __m256d v10 = _mm256_mask_i32gather_pd(zero, src, i10, m10, 8);
      const __m256d v11 = _mm256_mask_i32gather_pd(zero, src, i11, m11, 8);
      const __m256d top = _mm256_add_pd(_mm256_mul_pd(wx0, v00), _mm256_mul_pd(fx, v01));
      const __m256d bottom = _mm256_add_pd(_mm256_mul_pd(wx0, v10), _mm256_mul_pd(fx, v11));
      const __m256d v = _mm256_add_pd(_mm256_mul_pd(wy0, top), _mm256_mul_pd(fy, bottom));
      _mm256_storeu_pd(a.dst + c * a.dst_plane + i, _mm256_and_pd(v, inside));
    }
  }
  detail::sample_columns_scalar(a, n4, a.count);
}

}  // namespace

namespace detail {
const KernelTable kAvx2Table = {
    Isa::kAvx2, axpy_avx2, dot_avx2, sum_abs_diff_avx2, sample_row_avx2,
};
}  // namespace detail

}  // namespace rustan::kernels
