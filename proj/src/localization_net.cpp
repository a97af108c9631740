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
#include "rustan/localization_net.hpp"

#include <string>

#include "rustan/error.hpp"

namespace rustan {
namespace {

struct Layout {
  std::vector<nn::Conv2d> convs;
  nn::Dense fc1;
  nn::Dense fc2;
  int last_channels = 0;
  int last_height = 0;
  int last_width = 0;
  std::size_t total = 0;
};

Layout make_layout(const LocNetArch& arch) {
  Layout l;
  int c = arch.channels;
  int h = arch.height;
  int w = arch.width;
  std::size_t off = 0;
  for (const ConvStage& s : arch.stages) {
    nn::Conv2d conv{c, s.channels, s.kernel, s.stride, s.kernel / 2, off};
    off += conv.param_count();
    h = conv.out_dim(h);
    w = conv.out_dim(w);
    c = s.channels;
    l.convs.push_back(conv);
  }
  l.last_channels = c;
  l.last_height = h;
  l.last_width = w;
  l.fc1 = {c * arch.pool_grid * arch.pool_grid, arch.hidden, off};
  off += l.fc1.param_count();
  l.fc2 = {arch.hidden, 6, off};
  off += l.fc2.param_count();
  l.total = off;
  return l;
}

}  // namespace

void LocNetArch::validate() const {
  if (height < 2 || width < 2 || (channels != 1 && channels != 3)) {
    throw ConfigError("locnet: input must be at least 2x2 with 1 or 3 channels");
  }
  if (stages.empty() || hidden < 1 || pool_grid < 1) {
    throw ConfigError("locnet: need at least one conv stage, a hidden layer and a pool grid");
  }
  int h = height;
  int w = width;
  for (const ConvStage& s : stages) {
    if (s.kernel < 1 || s.kernel % 2 == 0 || s.stride < 1 || s.channels < 1) {
      throw ConfigError("locnet: conv stages need odd kernels and positive stride/channels");
    }
    const nn::Conv2d conv{1, 1, s.kernel, s.stride, s.kernel / 2, 0};
    h = conv.out_dim(h);
    w = conv.out_dim(w);
  }
  if (h % pool_grid != 0 || w % pool_grid != 0) {
    throw ConfigError("locnet: final feature map " + std::to_string(h) + "x" +
                      std::to_string(w) + " not divisible by pool grid " +
                      std::to_string(pool_grid));
  }
}

std::size_t LocNetArch::param_count() const { return make_layout(*this).total; }

std::vector<int> LocNetArch::encode() const {
  std::vector<int> f{height, width, channels, pool_grid, hidden,
                     static_cast<int>(stages.size())};
  for (const ConvStage& s : stages) {
    f.push_back(s.kernel);
    f.push_back(s.stride);
    f.push_back(s.channels);
  }
  return f;
}

LocNetArch LocNetArch::decode(const std::vector<int>& f) {
  if (f.size() < 6 || f.size() != 6 + 3 * static_cast<std::size_t>(f[5])) {
    throw DataError("locnet: malformed architecture descriptor");
  }
  LocNetArch a;
  a.height = f[0];
  a.width = f[1];
  a.channels = f[2];
  a.pool_grid = f[3];
  a.hidden = f[4];
  a.stages.clear();
  for (int i = 0; i < f[5]; ++i) {
    a.stages.push_back({f[6 + 3 * i], f[7 + 3 * i], f[8 + 3 * i]});
  }
  a.validate();
  return a;
}

LocNetParams locnet_init(const LocNetArch& arch, Rng& rng) {
  arch.validate();
  const Layout l = make_layout(arch);
  LocNetParams p{arch, std::vector<double>(l.total, 0.0)};
  std::span<double> v(p.values);
  for (const nn::Conv2d& conv : l.convs) {
    nn::init_fan_in_uniform(v.subspan(conv.offset, conv.weight_count()),
                            conv.in_channels * conv.kernel * conv.kernel, rng);
  }
  nn::init_fan_in_uniform(
      v.subspan(l.fc1.offset, static_cast<std::size_t>(l.fc1.in_features) * l.fc1.out_features),
      l.fc1.in_features, rng);
  // fc2 weights stay zero; bias is the identity's top two rows.
  const std::size_t bias = l.fc2.offset + static_cast<std::size_t>(l.fc2.in_features) * 6;
  const std::array<double, 6> ident{1.0, 0.0, 0.0, 0.0, 1.0, 0.0};
  for (int i = 0; i < 6; ++i) p.values[bias + i] = ident[i];
  return p;
}

LocNetOutput locnet_forward(const LocNetParams& params, const Image& u) {
  const LocNetArch& arch = params.arch;
  if (u.height() != arch.height || u.width() != arch.width || u.channels() != arch.channels) {
    throw ShapeError("locnet_forward: image " + std::to_string(u.height()) + "x" +
                     std::to_string(u.width()) + "x" + std::to_string(u.channels()) +
                     " does not match architecture " + std::to_string(arch.height) + "x" +
                     std::to_string(arch.width) + "x" + std::to_string(arch.channels));
  }
  const Layout l = make_layout(arch);
  if (params.values.size() != l.total) throw ShapeError("locnet_forward: parameter count");
  LocNetOutput out;
  LocNetCache& cache = out.cache;
  nn::Tensor x = nn::Tensor::from_image(u);
  cache.cols.resize(l.convs.size());
  for (std::size_t i = 0; i < l.convs.size(); ++i) {
    nn::Tensor y;
    l.convs[i].forward(params.values, x, y, cache.cols[i]);
    nn::relu(y.data);
    cache.stage_inputs.push_back(std::move(x));
    x = std::move(y);
  }
  cache.last_conv = std::move(x);
  cache.pooled = nn::avg_pool_grid(cache.last_conv, arch.pool_grid);
  cache.hidden.assign(arch.hidden, 0.0);
  l.fc1.forward(params.values, cache.pooled.data, cache.hidden);
  nn::relu(cache.hidden);
  std::array<double, 6> top{};
  l.fc2.forward(params.values, cache.hidden, top);
  out.theta = AffineMatrix::from_top_rows(top);
  return out;
}

std::vector<double> locnet_backward(const LocNetParams& params, const LocNetCache& cache,
                                    const std::array<double, 6>& grad_theta) {
  const Layout l = make_layout(params.arch);
  std::vector<double> grad(l.total, 0.0);
  std::vector<double> g_hidden(params.arch.hidden, 0.0);
  l.fc2.backward(params.values, cache.hidden, grad_theta, grad, g_hidden);
  nn::relu_backward(cache.hidden, g_hidden);
  nn::Tensor g_pooled(cache.pooled.channels, cache.pooled.height, cache.pooled.width);
  l.fc1.backward(params.values, cache.pooled.data, g_hidden, grad, g_pooled.data);
  nn::Tensor g = nn::avg_pool_grid_backward(g_pooled, cache.last_conv.height,
                                            cache.last_conv.width);
  nn::relu_backward(cache.last_conv.data, g.data);
  for (std::size_t i = l.convs.size(); i-- > 0;) {
    const bool need_input_grad = i > 0;
    nn::Tensor g_in;
    l.convs[i].backward(params.values, cache.stage_inputs[i], cache.cols[i], g, grad,
                        need_input_grad ? &g_in : nullptr);
    if (!need_input_grad) break;
    // stage_inputs[i] is the post-ReLU output of stage i-1.
    nn::relu_backward(cache.stage_inputs[i].data, g_in.data);
    g = std::move(g_in);
  }
  return grad;
}

}  // namespace rustan
