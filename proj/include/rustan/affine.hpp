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

#include "rustan/random.hpp"

namespace rustan {

// Translation (normalized units), rotation (radians) and axis scales.
struct PoseSpec {
  double tx = 0.0;
  double ty = 0.0;
  double phi = 0.0;
  double sx = 1.0;
  double sy = 1.0;

  bool valid() const;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct PoseRanges {
  Interval tx{-0.1, 0.1};
  Interval ty{-0.1, 0.1};
  Interval phi{-0.2617993877991494, 0.2617993877991494};  // +-15 degrees
  Interval sx{0.9, 1.1};
  Interval sy{0.9, 1.1};

  static PoseRanges identity_only();
  bool valid() const;
};

// 3x3 homogeneous affine matrix; the bottom row is always [0, 0, 1]. The
// top two rows are the 2x3 block that maps target to source coordinates.
class AffineMatrix {
 public:
  AffineMatrix();  // identity

  // Row-major top two rows: {a11, a12, a13, a21, a22, a23}.
  static AffineMatrix from_top_rows(const std::array<double, 6>& top);

  double operator()(int r, int c) const { return m_[r][c]; }
  // Only the top two rows are writable; the bottom row is fixed.
  double& at(int r, int c);

  std::array<double, 6> top_rows() const;
  double linear_det() const { return m_[0][0] * m_[1][1] - m_[0][1] * m_[1][0]; }

  friend bool operator==(const AffineMatrix&, const AffineMatrix&) = default;

 private:
  std::array<std::array<double, 3>, 3> m_{};
};

// T(tx, ty) * R(phi) * S(sx, sy).
AffineMatrix compose_pose(const PoseSpec& pose);

// Throws SingularMatrixError when |det| of the linear block is below 1e-12.
AffineMatrix invert(const AffineMatrix& a);

AffineMatrix matmul(const AffineMatrix& a, const AffineMatrix& b);

// Mean absolute deviation from the identity over all 9 entries.
double identity_residual(const AffineMatrix& a);

PoseSpec sample_pose(Rng& rng, const PoseRanges& ranges);

constexpr double kPi = 3.14159265358979323846;
constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace rustan
