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

// Hand-derived layers shared by the localization net and the distiller.
// Parameters live in one flat vector per network; each layer knows its
// offset into it. Convolutions run as im2col followed by axpy/dot rows so
// the inner loops go through the dispatched kernels.

#include <cstddef>
#include <span>
#include <vector>

#include "rustan/image.hpp"
#include "rustan/random.hpp"

namespace rustan::nn {

struct Tensor {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t plane() const { return static_cast<std::size_t>(height) * width; }
  double* channel(int c) { return data.data() + c * plane(); }
  const double* channel(int c) const { return data.data() + c * plane(); }

  static Tensor from_image(const Image& img);
  Image to_image() const;
};

struct Conv2d {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 3;
  int stride = 1;
  int pad = 1;
  std::size_t offset = 0;  // weights [out][in][ky][kx], then bias [out]

  std::size_t weight_count() const {
    return static_cast<std::size_t>(out_channels) * in_channels * kernel * kernel;
  }
  std::size_t param_count() const { return weight_count() + out_channels; }
  int out_dim(int in) const { return (in + 2 * pad - kernel) / stride + 1; }

  // `cols` receives the im2col matrix, which backward() needs again.
  void forward(std::span<const double> params, const Tensor& in, Tensor& out,
               std::vector<double>& cols) const;
  // Accumulates into grad_params; writes grad_in when non-null.
  void backward(std::span<const double> params, const Tensor& in,
                const std::vector<double>& cols, const Tensor& grad_out,
                std::span<double> grad_params, Tensor* grad_in) const;
};

struct Dense {
  int in_features = 0;
  int out_features = 0;
  std::size_t offset = 0;  // weights [out][in], then bias [out]

  std::size_t param_count() const {
    return static_cast<std::size_t>(out_features) * (in_features + 1);
  }
  void forward(std::span<const double> params, std::span<const double> in,
               std::span<double> out) const;
  void backward(std::span<const double> params, std::span<const double> in,
                std::span<const double> grad_out, std::span<double> grad_params,
                std::span<double> grad_in) const;
};

void relu(std::span<double> x);
// Zeroes grad where the (post-activation) output is not positive.
void relu_backward(std::span<const double> activated, std::span<double> grad);

// Average pooling onto a grid x grid lattice of cells.
Tensor avg_pool_grid(const Tensor& in, int grid);
Tensor avg_pool_grid_backward(const Tensor& grad_out, int in_height, int in_width);

Tensor upsample2x(const Tensor& in);
Tensor upsample2x_backward(const Tensor& grad_out);

Tensor concat_channels(const Tensor& a, const Tensor& b);

// Uniform(-sqrt(6 / fan_in), +sqrt(6 / fan_in)) weights, zero bias.
void init_fan_in_uniform(std::span<double> weights, int fan_in, Rng& rng);

}  // namespace rustan::nn
