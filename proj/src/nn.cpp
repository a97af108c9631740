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
#include "rustan/nn.hpp"

#include <algorithm>
#include <cmath>

#include "rustan/error.hpp"
#include "rustan/kernels.hpp"

namespace rustan::nn {

Tensor Tensor::from_image(const Image& img) {
  Tensor t(img.channels(), img.height(), img.width());
  std::copy(img.data().begin(), img.data().end(), t.data.begin());
  return t;
}

Image Tensor::to_image() const {
  Image img(height, width, channels);
  std::copy(data.begin(), data.end(), img.data().begin());
  return img;
}

void Conv2d::forward(std::span<const double> params, const Tensor& in, Tensor& out,
                     std::vector<double>& cols) const {
  if (in.channels != in_channels) throw ShapeError("conv2d: input channel mismatch");
  const int oh = out_dim(in.height);
  const int ow = out_dim(in.width);
  const std::size_t p = static_cast<std::size_t>(oh) * ow;
  const std::size_t k_rows = static_cast<std::size_t>(in_channels) * kernel * kernel;
  cols.assign(k_rows * p, 0.0);
  std::size_t row = 0;
  for (int c = 0; c < in_channels; ++c) {
    const double* src = in.channel(c);
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        double* dst = cols.data() + row * p;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < in.width) dst[oy * ow + ox] = src[iy * in.width + ix];
          }
        }
      }
    }
  }

  out = Tensor(out_channels, oh, ow);
  const auto& k = kernels::active();
  const double* w = params.data() + offset;
  const double* b = w + weight_count();
  for (int o = 0; o < out_channels; ++o) {
    double* dst = out.channel(o);
    std::fill(dst, dst + p, b[o]);
    const double* wo = w + o * k_rows;
    for (std::size_t r = 0; r < k_rows; ++r) k.axpy(wo[r], cols.data() + r * p, dst, p);
  }
}

void Conv2d::backward(std::span<const double> params, const Tensor& in,
                      const std::vector<double>& cols, const Tensor& grad_out,
                      std::span<double> grad_params, Tensor* grad_in) const {
  const int oh = grad_out.height;
  const int ow = grad_out.width;
  const std::size_t p = static_cast<std::size_t>(oh) * ow;
  const std::size_t k_rows = static_cast<std::size_t>(in_channels) * kernel * kernel;
  const auto& k = kernels::active();
  const double* w = params.data() + offset;
  double* gw = grad_params.data() + offset;
  double* gb = gw + weight_count();
  std::vector<double> grad_cols;
  if (grad_in != nullptr) grad_cols.assign(k_rows * p, 0.0);
  for (int o = 0; o < out_channels; ++o) {
    const double* go = grad_out.channel(o);
    double bias_acc = 0.0;
    for (std::size_t i = 0; i < p; ++i) bias_acc += go[i];
    gb[o] += bias_acc;
    for (std::size_t r = 0; r < k_rows; ++r) {
      gw[o * k_rows + r] += k.dot(go, cols.data() + r * p, p);
      if (grad_in != nullptr) k.axpy(w[o * k_rows + r], go, grad_cols.data() + r * p, p);
    }
  }
  if (grad_in == nullptr) return;
  *grad_in = Tensor(in.channels, in.height, in.width);
  std::size_t row = 0;
  for (int c = 0; c < in_channels; ++c) {
    double* dst = grad_in->channel(c);
    for (int ky = 0; ky < kernel; ++ky) {
      for (int kx = 0; kx < kernel; ++kx, ++row) {
        const double* src = grad_cols.data() + row * p;
        for (int oy = 0; oy < oh; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= in.height) continue;
          for (int ox = 0; ox < ow; ++ox) {
            const int ix = ox * stride - pad + kx;
            if (ix >= 0 && ix < in.width) dst[iy * in.width + ix] += src[oy * ow + ox];
          }
        }
      }
    }
  }
}

void Dense::forward(std::span<const double> params, std::span<const double> in,
                    std::span<double> out) const {
  if (static_cast<int>(in.size()) != in_features ||
      static_cast<int>(out.size()) != out_features) {
    throw ShapeError("dense: feature count mismatch");
  }
  const auto& k = kernels::active();
  const double* w = params.data() + offset;
  const double* b = w + static_cast<std::size_t>(out_features) * in_features;
  for (int o = 0; o < out_features; ++o) {
    out[o] = b[o] + k.dot(w + static_cast<std::size_t>(o) * in_features, in.data(),
                          static_cast<std::size_t>(in_features));
  }
}

void Dense::backward(std::span<const double> params, std::span<const double> in,
                     std::span<const double> grad_out, std::span<double> grad_params,
                     std::span<double> grad_in) const {
  const auto& k = kernels::active();
  const double* w = params.data() + offset;
  double* gw = grad_params.data() + offset;
  double* gb = gw + static_cast<std::size_t>(out_features) * in_features;
  const auto n = static_cast<std::size_t>(in_features);
  if (!grad_in.empty()) std::fill(grad_in.begin(), grad_in.end(), 0.0);
  for (int o = 0; o < out_features; ++o) {
    const double g = grad_out[o];
    gb[o] += g;
    if (g == 0.0) continue;
    k.axpy(g, in.data(), gw + o * n, n);
    if (!grad_in.empty()) k.axpy(g, w + o * n, grad_in.data(), n);
  }
}

void relu(std::span<double> x) {
  for (double& v : x) v = v > 0.0 ? v : 0.0;
}

void relu_backward(std::span<const double> activated, std::span<double> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!(activated[i] > 0.0)) grad[i] = 0.0;
  }
}

Tensor avg_pool_grid(const Tensor& in, int grid) {
  if (grid < 1 || in.height % grid != 0 || in.width % grid != 0) {
    throw ShapeError("avg_pool_grid: feature map not divisible by pool grid");
  }
  const int ch = in.height / grid;
  const int cw = in.width / grid;
  const double norm = 1.0 / (ch * cw);
  Tensor out(in.channels, grid, grid);
  for (int c = 0; c < in.channels; ++c) {
    const double* src = in.channel(c);
    for (int gy = 0; gy < grid; ++gy) {
      for (int gx = 0; gx < grid; ++gx) {
        double acc = 0.0;
        for (int y = gy * ch; y < (gy + 1) * ch; ++y) {
          for (int x = gx * cw; x < (gx + 1) * cw; ++x) acc += src[y * in.width + x];
        }
        out.channel(c)[gy * grid + gx] = acc * norm;
      }
    }
  }
  return out;
}

Tensor avg_pool_grid_backward(const Tensor& grad_out, int in_height, int in_width) {
  const int grid = grad_out.height;
  const int ch = in_height / grid;
  const int cw = in_width / grid;
  const double norm = 1.0 / (ch * cw);
  Tensor g(grad_out.channels, in_height, in_width);
  for (int c = 0; c < g.channels; ++c) {
    double* dst = g.channel(c);
    for (int y = 0; y < in_height; ++y) {
      for (int x = 0; x < in_width; ++x) {
        dst[y * in_width + x] = grad_out.channel(c)[(y / ch) * grid + x / cw] * norm;
      }
    }
  }
  return g;
}

Tensor upsample2x(const Tensor& in) {
  Tensor out(in.channels, in.height * 2, in.width * 2);
  for (int c = 0; c < in.channels; ++c) {
    const double* src = in.channel(c);
    double* dst = out.channel(c);
    for (int y = 0; y < out.height; ++y) {
      for (int x = 0; x < out.width; ++x) dst[y * out.width + x] = src[(y / 2) * in.width + x / 2];
    }
  }
  return out;
}

Tensor upsample2x_backward(const Tensor& grad_out) {
  Tensor g(grad_out.channels, grad_out.height / 2, grad_out.width / 2);
  for (int c = 0; c < g.channels; ++c) {
    const double* src = grad_out.channel(c);
    double* dst = g.channel(c);
    for (int y = 0; y < grad_out.height; ++y) {
      for (int x = 0; x < grad_out.width; ++x) {
        dst[(y / 2) * g.width + x / 2] += src[y * grad_out.width + x];
      }
    }
  }
  return g;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
  if (a.height != b.height || a.width != b.width) {
    throw ShapeError("concat_channels: spatial size mismatch");
  }
  Tensor out(a.channels + b.channels, a.height, a.width);
  std::copy(a.data.begin(), a.data.end(), out.data.begin());
  std::copy(b.data.begin(), b.data.end(),
            out.data.begin() + static_cast<std::ptrdiff_t>(a.data.size()));
  return out;
}

void init_fan_in_uniform(std::span<double> weights, int fan_in, Rng& rng) {
  const double bound = std::sqrt(6.0 / fan_in);
  for (double& w : weights) w = uniform(rng, -bound, bound);
}

}  // namespace rustan::nn
