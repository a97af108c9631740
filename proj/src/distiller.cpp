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
#include "rustan/distiller.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "rustan/adam.hpp"
#include "rustan/error.hpp"
#include "rustan/kernels.hpp"

namespace rustan {
namespace {

struct Layout {
  nn::Conv2d e1, e2, d1, out;
  std::size_t total = 0;
};

Layout make_layout(const DistillerArch& a) {
  constexpr int in = DistillerArch::kInputChannels;
  Layout l;
  std::size_t off = 0;
  l.e1 = {in, a.enc1, 3, 2, 1, off};
  off += l.e1.param_count();
  l.e2 = {a.enc1, a.enc2, 3, 2, 1, off};
  off += l.e2.param_count();
  l.d1 = {2 * a.enc2 + a.enc1, a.enc1, 3, 1, 1, off};
  off += l.d1.param_count();
  l.out = {a.enc1, 1 + DistillerArch::kImageChannels, 3, 1, 1, off};
  off += l.out.param_count();
  l.total = off;
  return l;
}

nn::Tensor slice_channels(const nn::Tensor& t, int begin, int count) {
  nn::Tensor out(count, t.height, t.width);
  std::copy(t.channel(begin), t.channel(begin) + count * t.plane(), out.data.begin());
  return out;
}

// Box-blur radius of the local mean that the gain acts around.
int detail_radius(int width) { return std::max(1, width / 32); }

// x minus its clamped-edge box blur, per channel. The gain scales this
// zero-mean detail so it does not compete with the offset.
nn::Tensor local_detail(const Image& x) {
  const int h = x.height();
  const int w = x.width();
  const int r = detail_radius(w);
  nn::Tensor out(x.channels(), h, w);
  std::vector<double> tmp(x.plane_size());
  for (int ch = 0; ch < x.channels(); ++ch) {
    const auto src = x.plane(ch);
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) s += src[y * w + std::clamp(xx + k, 0, w - 1)];
        tmp[y * w + xx] = s / (2 * r + 1);
      }
    }
    double* dst = out.channel(ch);
    for (int y = 0; y < h; ++y) {
      for (int xx = 0; xx < w; ++xx) {
        double s = 0.0;
        for (int k = -r; k <= r; ++k) s += tmp[std::clamp(y + k, 0, h - 1) * w + xx];
        dst[y * w + xx] = src[y * w + xx] - s / (2 * r + 1);
      }
    }
  }
  return out;
}

nn::Tensor with_coordinates(const Image& x) {
  nn::Tensor t(DistillerArch::kInputChannels, x.height(), x.width());
  std::copy(x.data().begin(), x.data().end(), t.data.begin());
  double* xs = t.channel(DistillerArch::kImageChannels);
  double* ys = t.channel(DistillerArch::kImageChannels + 1);
  for (int r = 0; r < x.height(); ++r) {
    for (int c = 0; c < x.width(); ++c) {
      xs[r * x.width() + c] = 2.0 * c / (x.width() - 1) - 1.0;
      ys[r * x.width() + c] = 2.0 * r / (x.height() - 1) - 1.0;
    }
  }
  return t;
}

// Per-channel spatial mean of t, repeated over an h x w plane.
nn::Tensor broadcast_mean(const nn::Tensor& t, int h, int w) {
  nn::Tensor out(t.channels, h, w);
  for (int c = 0; c < t.channels; ++c) {
    const double* src = t.channel(c);
    const double mean = std::accumulate(src, src + t.plane(), 0.0) / double(t.plane());
    std::fill(out.channel(c), out.channel(c) + out.plane(), mean);
  }
  return out;
}

void broadcast_mean_backward(const nn::Tensor& grad_out, nn::Tensor& grad_in) {
  for (int c = 0; c < grad_in.channels; ++c) {
    const double* g = grad_out.channel(c);
    const double share =
        std::accumulate(g, g + grad_out.plane(), 0.0) / double(grad_in.plane());
    double* dst = grad_in.channel(c);
    for (std::size_t i = 0; i < grad_in.plane(); ++i) dst[i] += share;
  }
}

}  // namespace

void DistillerArch::validate() const {
  if (height < 8 || width < 8 || height % 4 != 0 || width % 4 != 0)
    throw ConfigError("distiller: image sides must be multiples of 4 and at least 8, got " +
                      std::to_string(height) + "x" + std::to_string(width));
  if (enc1 < 1 || enc2 < 1) throw ConfigError("distiller: channel counts must be positive");
}

std::size_t DistillerArch::param_count() const { return make_layout(*this).total; }

std::vector<int> DistillerArch::encode() const { return {height, width, enc1, enc2}; }

DistillerArch DistillerArch::decode(const std::vector<int>& f) {
  if (f.size() != 4) throw DataError("distiller: expected 4 architecture fields");
  DistillerArch a{f[0], f[1], f[2], f[3]};
  a.validate();
  return a;
}

DistillerParams distiller_init(const DistillerArch& arch, Rng& rng) {
  arch.validate();
  const Layout l = make_layout(arch);
  DistillerParams p{arch, std::vector<double>(l.total, 0.0)};
  for (const nn::Conv2d* c : {&l.e1, &l.e2, &l.d1}) {
    nn::init_fan_in_uniform(
        std::span<double>(p.values).subspan(c->offset, c->weight_count()),
        c->in_channels * c->kernel * c->kernel, rng);
  }
  return p;
}

Image distiller_forward(const DistillerParams& params, const Image& x, DistillerCache* cache) {
  const DistillerArch& a = params.arch;
  if (x.height() != a.height || x.width() != a.width ||
      x.channels() != DistillerArch::kImageChannels) {
    throw ShapeError("distiller: image " + std::to_string(x.height()) + "x" +
                     std::to_string(x.width()) + "x" + std::to_string(x.channels()) +
                     " does not match " + std::to_string(a.height) + "x" +
                     std::to_string(a.width) + "x3");
  }
  const Layout l = make_layout(a);
  if (params.values.size() != l.total) throw ShapeError("distiller: parameter count");
  DistillerCache local;
  DistillerCache& c = cache != nullptr ? *cache : local;
  c.input = with_coordinates(x);
  l.e1.forward(params.values, c.input, c.e1, c.cols[0]);
  nn::relu(c.e1.data);
  l.e2.forward(params.values, c.e1, c.e2, c.cols[1]);
  nn::relu(c.e2.data);
  c.d1_in = nn::concat_channels(nn::concat_channels(nn::upsample2x(c.e2), c.e1),
                                broadcast_mean(c.e2, c.e1.height, c.e1.width));
  l.d1.forward(params.values, c.d1_in, c.d1, c.cols[2]);
  nn::relu(c.d1.data);
  nn::Tensor head_half;
  l.out.forward(params.values, c.d1, head_half, c.cols[3]);
  c.head = nn::upsample2x(head_half);
  // y_c = x_c + gain * detail_c + offset_c; one gain plane shared by all channels.
  c.detail = local_detail(x);
  Image y = x;
  const std::size_t plane = x.plane_size();
  const double* gain = c.head.channel(0);
  for (int ch = 0; ch < x.channels(); ++ch) {
    const double* offset = c.head.channel(1 + ch);
    const double* detail = c.detail.channel(ch);
    auto yd = y.plane(ch);
    for (std::size_t i = 0; i < plane; ++i) yd[i] += gain[i] * detail[i] + offset[i];
  }
  return y;
}

std::vector<double> distiller_backward(const DistillerParams& params,
                                       const DistillerCache& c, const Image& grad_out) {
  const Layout l = make_layout(params.arch);
  std::vector<double> grad(l.total, 0.0);
  const std::size_t plane = grad_out.plane_size();
  nn::Tensor g_head(c.head.channels, c.head.height, c.head.width);
  double* g_gain = g_head.channel(0);
  for (int ch = 0; ch < grad_out.channels(); ++ch) {
    const auto go = grad_out.plane(ch);
    const double* detail = c.detail.channel(ch);
    double* g_offset = g_head.channel(1 + ch);
    for (std::size_t i = 0; i < plane; ++i) {
      g_gain[i] += go[i] * detail[i];
      g_offset[i] = go[i];
    }
  }

  const DistillerArch& a = params.arch;
  nn::Tensor g_d1;
  l.out.backward(params.values, c.d1, c.cols[3], nn::upsample2x_backward(g_head), grad, &g_d1);
  nn::relu_backward(c.d1.data, g_d1.data);

  nn::Tensor g_d1_in;
  l.d1.backward(params.values, c.d1_in, c.cols[2], g_d1, grad, &g_d1_in);
  nn::Tensor g_e2 = nn::upsample2x_backward(slice_channels(g_d1_in, 0, a.enc2));
  nn::Tensor g_e1 = slice_channels(g_d1_in, a.enc2, a.enc1);
  broadcast_mean_backward(slice_channels(g_d1_in, a.enc2 + a.enc1, a.enc2), g_e2);
  nn::relu_backward(c.e2.data, g_e2.data);

  nn::Tensor g_e1_from_e2;
  l.e2.backward(params.values, c.e1, c.cols[1], g_e2, grad, &g_e1_from_e2);
  kernels::axpy(1.0, g_e1_from_e2.data, g_e1.data);
  nn::relu_backward(c.e1.data, g_e1.data);
  l.e1.backward(params.values, c.input, c.cols[0], g_e1, grad, nullptr);
  return grad;
}

double distill_loss(const Image& y, const Image& g_out) {
  require_same_shape(y, g_out, "distill_loss");
  return mean_abs_diff(y, g_out);
}

void DistillConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("distiller: learning rate must be positive");
  if (epochs < 0) throw ConfigError("distiller: epochs must be non-negative");
  if (batch_size < 1) throw ConfigError("distiller: batch size must be positive");
}

DistillResult train_distiller(std::span<const PairedSample> dataset, const DistillerArch& arch,
                              const DistillConfig& config) {
  config.validate();
  if (dataset.empty()) throw ConfigError("train_distiller: empty dataset");
  for (const PairedSample& s : dataset) require_same_shape(s.x, s.y, "train_distiller pair");
  Rng init_rng(derive_seed(config.seed, 1));
  DistillResult result{distiller_init(arch, init_rng), {}};
  Rng rng(derive_seed(config.seed, 2));
  AdamState opt(result.params.values.size());
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  DistillerCache cache;
  std::vector<double> grad(result.params.values.size());
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1],
                order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1))]);
    }
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const PairedSample& s = dataset[order[k]];
        const Image out = distiller_forward(result.params, s.x, &cache);
        const double loss = distill_loss(s.y, out);
        if (!std::isfinite(loss)) {
          throw NumericalError("non-finite distillation loss at epoch " +
                               std::to_string(epoch) + ", sample " +
                               std::to_string(order[k]));
        }
        epoch_loss += loss;
        Image g(out.height(), out.width(), out.channels());
        const double scale = 1.0 / static_cast<double>(out.size());
        const auto yd = s.y.data();
        const auto od = out.data();
        auto gd = g.data();
        for (std::size_t i = 0; i < gd.size(); ++i) {
          const double d = yd[i] - od[i];
          gd[i] = d > 0.0 ? -scale : (d < 0.0 ? scale : 0.0);
        }
        const std::vector<double> gs = distiller_backward(result.params, cache, g);
        kernels::axpy(1.0, gs, grad);
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (double& v : grad) v *= inv;
      adam_update(result.params.values, opt, grad, config.learning_rate);
    }
    result.report.epoch_loss.push_back(epoch_loss / static_cast<double>(dataset.size()));
  }
  return result;
}

Image restore(const DistillerParams& params, const Image& x) {
  Image y = distiller_forward(params, x);
  clamp_unit(y);
  return y;
}

double psnr(const Image& a, const Image& b) {
  require_same_shape(a, b, "psnr");
  double sse = 0.0;
  const auto ad = a.data();
  const auto bd = b.data();
  for (std::size_t i = 0; i < ad.size(); ++i) sse += (ad[i] - bd[i]) * (ad[i] - bd[i]);
  if (sse == 0.0) return kPsnrMax;
  return std::min(kPsnrMax, 10.0 * std::log10(static_cast<double>(ad.size()) / sse));
}

void write_distill_report_csv(const std::filesystem::path& path, const DistillReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "epoch,l1\n";
  char buf[64];
  for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
    std::snprintf(buf, sizeof(buf), "%zu,%.9g\n", e + 1, report.epoch_loss[e]);
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace rustan
