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
#include "rustan/affine.hpp"

#include <cmath>

#include "rustan/error.hpp"

namespace rustan {

bool PoseSpec::valid() const {
  return sx > 0.0 && sy > 0.0 && std::abs(phi) <= kPi && std::abs(tx) <= 1.0 &&
         std::abs(ty) <= 1.0;
}

PoseRanges PoseRanges::identity_only() {
  PoseRanges r;
  r.tx = {0.0, 0.0};
  r.ty = {0.0, 0.0};
  r.phi = {0.0, 0.0};
  r.sx = {1.0, 1.0};
  r.sy = {1.0, 1.0};
  return r;
}

bool PoseRanges::valid() const {
  auto ok = [](const Interval& i, double lo, double hi) {
    return i.lo <= i.hi && i.lo >= lo && i.hi <= hi;
  };
  return ok(tx, -1.0, 1.0) && ok(ty, -1.0, 1.0) && ok(phi, -kPi, kPi) && sx.lo > 0.0 &&
         sx.lo <= sx.hi && sy.lo > 0.0 && sy.lo <= sy.hi;
}

AffineMatrix::AffineMatrix() {
  m_[0] = {1.0, 0.0, 0.0};
  m_[1] = {0.0, 1.0, 0.0};
  m_[2] = {0.0, 0.0, 1.0};
}

AffineMatrix AffineMatrix::from_top_rows(const std::array<double, 6>& top) {
  AffineMatrix a;
  a.m_[0] = {top[0], top[1], top[2]};
  a.m_[1] = {top[3], top[4], top[5]};
  return a;
}

double& AffineMatrix::at(int r, int c) {
  if (r < 0 || r > 1 || c < 0 || c > 2) {
    throw std::out_of_range("AffineMatrix::at: only the top two rows are writable");
  }
  return m_[r][c];
}

std::array<double, 6> AffineMatrix::top_rows() const {
  return {m_[0][0], m_[0][1], m_[0][2], m_[1][0], m_[1][1], m_[1][2]};
}

AffineMatrix compose_pose(const PoseSpec& pose) {
  const double c = std::cos(pose.phi);
  const double s = std::sin(pose.phi);
  // T * R * S expanded; the translation column is untouched by R and S.
  return AffineMatrix::from_top_rows(
      {c * pose.sx, 0.0 - s * pose.sy, pose.tx, s * pose.sx, c * pose.sy, pose.ty});
}

AffineMatrix invert(const AffineMatrix& a) {
  const double det = a.linear_det();
  if (std::abs(det) < 1e-12) {
    throw SingularMatrixError("invert: singular affine matrix");
  }
  const double i00 = a(1, 1) / det;
  const double i01 = -a(0, 1) / det;
  const double i10 = -a(1, 0) / det;
  const double i11 = a(0, 0) / det;
  const double t0 = -(i00 * a(0, 2) + i01 * a(1, 2));
  const double t1 = -(i10 * a(0, 2) + i11 * a(1, 2));
  return AffineMatrix::from_top_rows({i00, i01, t0, i10, i11, t1});
}

AffineMatrix matmul(const AffineMatrix& a, const AffineMatrix& b) {
  std::array<double, 6> top{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      double acc = 0.0;
      for (int k = 0; k < 3; ++k) acc += a(r, k) * b(k, c);
      top[r * 3 + c] = acc;
    }
  }
  return AffineMatrix::from_top_rows(top);
}

double identity_residual(const AffineMatrix& a) {
  double acc = 0.0;
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) acc += std::abs(a(r, c) - (r == c ? 1.0 : 0.0));
  }
  return acc / 9.0;
}

PoseSpec sample_pose(Rng& rng, const PoseRanges& ranges) {
  PoseSpec p;
  p.tx = uniform(rng, ranges.tx.lo, ranges.tx.hi);
  p.ty = uniform(rng, ranges.ty.lo, ranges.ty.hi);
  p.phi = uniform(rng, ranges.phi.lo, ranges.phi.hi);
  p.sx = uniform(rng, ranges.sx.lo, ranges.sx.hi);
  p.sy = uniform(rng, ranges.sy.lo, ranges.sy.hi);
  return p;
}

}  // namespace rustan
