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
#include "rustan/grid_sampler.hpp"

#include <cmath>

#include "rustan/error.hpp"
#include "rustan/kernels.hpp"

namespace rustan {
namespace {

void require_grid_dims(int height, int width) {
  if (height < 2 || width < 2) throw ShapeError("sampling grid must be at least 2x2");
}

// Source pixel coordinates along one target row are affine in the column
// index; this returns (px0, dpx, py0, dpy) for row y. The normalization is
// folded into pixel space so that the identity maps every pixel onto itself
// exactly, with no rounding from a normalize/denormalize round trip.
struct RowCoeffs {
  double px0, dpx, py0, dpy;
};

RowCoeffs row_coeffs(const AffineMatrix& t, int y, int out_h, int out_w, int src_h,
                     int src_w) {
  const double sx = (src_w - 1) * 0.5;
  const double sy = (src_h - 1) * 0.5;
  const double rxx = static_cast<double>(src_w - 1) / (out_w - 1);
  const double rxy = static_cast<double>(src_w - 1) / (out_h - 1);
  const double ryx = static_cast<double>(src_h - 1) / (out_w - 1);
  const double ryy = static_cast<double>(src_h - 1) / (out_h - 1);
  return {t(0, 1) * rxy * y + (t(0, 2) + 1.0 - t(0, 0) - t(0, 1)) * sx, t(0, 0) * rxx,
          t(1, 1) * ryy * y + (t(1, 2) + 1.0 - t(1, 0) - t(1, 1)) * sy, t(1, 0) * ryx};
}

double sample_point(const Image& u, int c, double px, double py) {
  const double fx0 = std::floor(px);
  const double fy0 = std::floor(py);
  const int w = u.width();
  const int h = u.height();
  if (!(fx0 >= -1.0 && fx0 <= w - 1.0 && fy0 >= -1.0 && fy0 <= h - 1.0)) return 0.0;
  const int x0 = static_cast<int>(fx0);
  const int y0 = static_cast<int>(fy0);
  const double fx = px - fx0;
  const double fy = py - fy0;
  auto px_at = [&](int yy, int xx) {
    return (xx >= 0 && xx < w && yy >= 0 && yy < h) ? u.at(c, yy, xx) : 0.0;
  };
  const double top = (1.0 - fx) * px_at(y0, x0) + fx * px_at(y0, x0 + 1);
  const double bottom = (1.0 - fx) * px_at(y0 + 1, x0) + fx * px_at(y0 + 1, x0 + 1);
  return (1.0 - fy) * top + fy * bottom;
}

// Shared body of the two backward entry points.
std::array<double, 6> backward_impl(const Image& u, const AffineMatrix& theta,
                                    const Image& grad_out, Image* grad_u) {
  require_same_shape(u, grad_out, "warp_backward");
  const int h = u.height();
  const int w = u.width();
  const double half_w = (w - 1) * 0.5;
  const double half_h = (h - 1) * 0.5;
  std::array<double, 6> gt{};
  auto value = [&](int c, int yy, int xx) {
    return (xx >= 0 && xx < w && yy >= 0 && yy < h) ? u.at(c, yy, xx) : 0.0;
  };
  for (int y = 0; y < h; ++y) {
    const RowCoeffs rc = row_coeffs(theta, y, h, w, h, w);
    const double yt = normalize_coord(y, h);
    for (int x = 0; x < w; ++x) {
      const double px = rc.px0 + x * rc.dpx;
      const double py = rc.py0 + x * rc.dpy;
      if (!(px > -1.0 && px < w && py > -1.0 && py < h)) continue;
      // Left-cell convention: an integer coordinate belongs to the cell on
      // its left, so fx, fy lie in (0, 1].
      const int x0 = static_cast<int>(std::ceil(px)) - 1;
      const int y0 = static_cast<int>(std::ceil(py)) - 1;
      const double fx = px - x0;
      const double fy = py - y0;
      double dpx = 0.0;
      double dpy = 0.0;
      for (int c = 0; c < u.channels(); ++c) {
        const double g = grad_out.at(c, y, x);
        if (g == 0.0) continue;
        const double v00 = value(c, y0, x0);
        const double v01 = value(c, y0, x0 + 1);
        const double v10 = value(c, y0 + 1, x0);
        const double v11 = value(c, y0 + 1, x0 + 1);
        dpx += g * ((1.0 - fy) * (v01 - v00) + fy * (v11 - v10));
        dpy += g * ((1.0 - fx) * (v10 - v00) + fx * (v11 - v01));
        if (grad_u != nullptr) {
          auto scatter = [&](int yy, int xx, double wgt) {
            if (xx >= 0 && xx < w && yy >= 0 && yy < h) grad_u->at(c, yy, xx) += g * wgt;
          };
          scatter(y0, x0, (1.0 - fx) * (1.0 - fy));
          scatter(y0, x0 + 1, fx * (1.0 - fy));
          scatter(y0 + 1, x0, (1.0 - fx) * fy);
          scatter(y0 + 1, x0 + 1, fx * fy);
        }
      }
      const double xt = normalize_coord(x, w);
      dpx *= half_w;
      dpy *= half_h;
      gt[0] += dpx * xt;
      gt[1] += dpx * yt;
      gt[2] += dpx;
      gt[3] += dpy * xt;
      gt[4] += dpy * yt;
      gt[5] += dpy;
    }
  }
  return gt;
}

}  // namespace

SamplingGrid generate_grid(const AffineMatrix& theta, int height, int width) {
  require_grid_dims(height, width);
  SamplingGrid g;
  g.height = height;
  g.width = width;
  g.xs.resize(static_cast<std::size_t>(height) * width);
  g.ys.resize(g.xs.size());
  for (int y = 0; y < height; ++y) {
    const double yt = normalize_coord(y, height);
    for (int x = 0; x < width; ++x) {
      const double xt = normalize_coord(x, width);
      const std::size_t k = static_cast<std::size_t>(y) * width + x;
      g.xs[k] = theta(0, 0) * xt + theta(0, 1) * yt + theta(0, 2);
      g.ys[k] = theta(1, 0) * xt + theta(1, 1) * yt + theta(1, 2);
    }
  }
  return g;
}

Image bilinear_sample(const Image& u, const SamplingGrid& grid) {
  require_grid_dims(grid.height, grid.width);
  if (grid.xs.size() != static_cast<std::size_t>(grid.height) * grid.width ||
      grid.ys.size() != grid.xs.size()) {
    throw ShapeError("bilinear_sample: grid storage does not match its shape");
  }
  Image out(grid.height, grid.width, u.channels());
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 0; x < grid.width; ++x) {
      const std::size_t k = static_cast<std::size_t>(y) * grid.width + x;
      const double px = denormalize_coord(grid.xs[k], u.width());
      const double py = denormalize_coord(grid.ys[k], u.height());
      for (int c = 0; c < u.channels(); ++c) out.at(c, y, x) = sample_point(u, c, px, py);
    }
  }
  return out;
}

Image warp(const Image& u, const AffineMatrix& theta) {
  require_grid_dims(u.height(), u.width());
  Image out(u.height(), u.width(), u.channels());
  const auto& k = kernels::active();
  for (int y = 0; y < u.height(); ++y) {
    const RowCoeffs rc = row_coeffs(theta, y, u.height(), u.width(), u.height(), u.width());
    kernels::SampleRowArgs args;
    args.src = u.data().data();
    args.src_plane = u.plane_size();
    args.src_height = u.height();
    args.src_width = u.width();
    args.channels = u.channels();
    args.dst = out.data().data() + static_cast<std::size_t>(y) * u.width();
    args.dst_plane = out.plane_size();
    args.count = u.width();
    args.px0 = rc.px0;
    args.dpx = rc.dpx;
    args.py0 = rc.py0;
    args.dpy = rc.dpy;
    k.sample_row(args);
  }
  return out;
}

WarpGradients warp_backward(const Image& u, const AffineMatrix& theta,
                            const Image& grad_out) {
  WarpGradients g;
  g.grad_u = Image(u.height(), u.width(), u.channels());
  g.grad_theta = backward_impl(u, theta, grad_out, &g.grad_u);
  return g;
}

std::array<double, 6> warp_backward_theta(const Image& u, const AffineMatrix& theta,
                                          const Image& grad_out) {
  return backward_impl(u, theta, grad_out, nullptr);
}

}  // namespace rustan
