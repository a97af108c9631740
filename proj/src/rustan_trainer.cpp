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
#include "rustan/rustan_trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "rustan/error.hpp"
#include "rustan/grid_sampler.hpp"

namespace rustan {
namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

bool finite(const LossTerms& l) {
  return std::isfinite(l.total) && std::isfinite(l.l_theta) && std::isfinite(l.l_image);
}

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  return v[lo] + (v[hi] - v[lo]) * (pos - lo);
}

}  // namespace

std::string_view mode_name(TrainMode m) {
  switch (m) {
    case TrainMode::kRustan:
      return "rustan";
    case TrainMode::kStnBaseline:
      return "stn_baseline";
    case TrainMode::kNone:
      return "none";
  }
  return "unknown";
}

TrainMode parse_mode(std::string_view name) {
  if (name == "rustan") return TrainMode::kRustan;
  if (name == "stn_baseline") return TrainMode::kStnBaseline;
  if (name == "none") return TrainMode::kNone;
  throw ConfigError("unknown mode: " + std::string(name));
}

void TrainConfig::validate() const {
  if (lambda1 < 0.0 || lambda2 < 0.0) throw ConfigError("lambda1 and lambda2 must be >= 0");
  if (mode == TrainMode::kRustan && lambda1 == 0.0 && lambda2 == 0.0) {
    throw ConfigError("rustan mode needs lambda1 or lambda2 to be non-zero");
  }
  if (mode == TrainMode::kStnBaseline && lambda2 == 0.0) {
    throw ConfigError("stn_baseline mode needs lambda2 > 0");
  }
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!ranges.valid()) throw ConfigError("invalid pose ranges");
}

double TrainConfig::effective_lambda1() const {
  return mode == TrainMode::kStnBaseline ? 0.0 : lambda1;
}

LossTerms rustan_loss(const AffineMatrix& theta_gt, const AffineMatrix& theta_p,
                      const Image& v_gt, const Image& v_p, double lambda1, double lambda2) {
  require_same_shape(v_gt, v_p, "rustan_loss");
  LossTerms l;
  l.l_theta = identity_residual(matmul(theta_gt, theta_p));
  l.l_image = mean_abs_diff(v_gt, v_p);
  l.total = lambda1 * l.l_theta + lambda2 * l.l_image;
  return l;
}

std::array<double, 6> theta_loss_grad(const AffineMatrix& theta_gt,
                                      const AffineMatrix& theta_p) {
  const AffineMatrix m = matmul(theta_gt, theta_p);
  std::array<double, 6> g{};
  for (int k = 0; k < 2; ++k) {
    for (int j = 0; j < 3; ++j) {
      double acc = 0.0;
      for (int i = 0; i < 3; ++i) {
        acc += theta_gt(i, k) * sign(m(i, j) - (i == j ? 1.0 : 0.0));
      }
      g[k * 3 + j] = acc / 9.0;
    }
  }
  return g;
}

SampleGradient rustan_sample_gradient(const LocNetParams& params, const Image& v_gt,
                                      const AffineMatrix& theta_gt, double lambda1,
                                      double lambda2) {
  const Image u = warp(v_gt, theta_gt);
  LocNetOutput fwd = locnet_forward(params, u);
  const Image v_p = warp(u, fwd.theta);

  SampleGradient out;
  out.loss = rustan_loss(theta_gt, fwd.theta, v_gt, v_p, lambda1, lambda2);
  std::array<double, 6> g_theta{};
  if (lambda1 != 0.0) {
    const auto g = theta_loss_grad(theta_gt, fwd.theta);
    for (int i = 0; i < 6; ++i) g_theta[i] += lambda1 * g[i];
  }
  if (lambda2 != 0.0) {
    Image g_vp(v_p.height(), v_p.width(), v_p.channels());
    const double scale = lambda2 / static_cast<double>(v_p.size());
    auto gv = g_vp.data();
    const auto a = v_gt.data();
    const auto b = v_p.data();
    for (std::size_t i = 0; i < gv.size(); ++i) gv[i] = -sign(a[i] - b[i]) * scale;
    const auto g = warp_backward_theta(u, fwd.theta, g_vp);
    for (int i = 0; i < 6; ++i) g_theta[i] += g[i];
  }
  out.grad = locnet_backward(params, fwd.cache, g_theta);
  return out;
}

LossTerms train_step(LocNetParams& params, AdamState& opt, std::span<const Image> batch,
                     const TrainConfig& config, Rng& rng) {
  config.validate();
  if (batch.empty()) throw ConfigError("train_step: empty batch");
  if (opt.m.size() != params.values.size()) opt = AdamState(params.values.size());
  const double lambda1 = config.effective_lambda1();
  std::vector<double> grad(params.values.size(), 0.0);
  LossTerms mean;
  for (const Image& v_gt : batch) {
    const AffineMatrix theta_gt = compose_pose(sample_pose(rng, config.ranges));
    SampleGradient s = rustan_sample_gradient(params, v_gt, theta_gt, lambda1, config.lambda2);
    if (!finite(s.loss)) {
      throw NumericalError("non-finite loss at Adam step " + std::to_string(opt.step + 1) +
                           ": l_theta=" + std::to_string(s.loss.l_theta) +
                           " l_image=" + std::to_string(s.loss.l_image));
    }
    for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += s.grad[i];
    mean.total += s.loss.total;
    mean.l_theta += s.loss.l_theta;
    mean.l_image += s.loss.l_image;
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) {
    g *= inv;
    if (!std::isfinite(g)) throw NumericalError("non-finite gradient in train_step");
  }
  mean.total *= inv;
  mean.l_theta *= inv;
  mean.l_image *= inv;
  adam_update(params.values, opt, grad, config.learning_rate);
  return mean;
}

TrainResult train(std::span<const Image> dataset, const LocNetArch& arch,
                  const TrainConfig& config, std::span<const Image> validation,
                  const PoseRanges& validation_ranges) {
  config.validate();
  if (dataset.empty()) throw ConfigError("train: empty dataset");
  Rng init_rng(derive_seed(config.seed, 1));
  TrainResult result{locnet_init(arch, init_rng), {}};
  if (config.mode != TrainMode::kNone) {
    Rng rng(derive_seed(config.seed, 2));
    AdamState opt(result.params.values.size());
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    std::vector<Image> batch;
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
      for (std::size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1],
                  order[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(i) - 1))]);
      }
      EpochStats stats{epoch, 0.0, 0.0, 0.0};
      int steps = 0;
      for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
        const std::size_t end = std::min(order.size(), start + config.batch_size);
        batch.clear();
        for (std::size_t k = start; k < end; ++k) batch.push_back(dataset[order[k]]);
        const LossTerms l = train_step(result.params, opt, batch, config, rng);
        stats.l_theta += l.l_theta;
        stats.l_image += l.l_image;
        stats.total += l.total;
        ++steps;
      }
      stats.l_theta /= steps;
      stats.l_image /= steps;
      stats.total /= steps;
      result.report.epochs.push_back(stats);
    }
  }
  if (!validation.empty()) {
    result.report.validation =
        pose_residuals(result.params, validation, validation_ranges, derive_seed(config.seed, 3));
  }
  return result;
}

ResidualStats pose_residuals(const LocNetParams& params, std::span<const Image> images,
                             const PoseRanges& ranges, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> r;
  for (const Image& img : images) {
    const AffineMatrix theta_gt = compose_pose(sample_pose(rng, ranges));
    const AffineMatrix theta_p = predict_theta(params, warp(img, theta_gt));
    r.push_back(identity_residual(matmul(theta_gt, theta_p)));
  }
  ResidualStats s;
  s.count = static_cast<int>(r.size());
  if (r.empty()) return s;
  s.mean = std::accumulate(r.begin(), r.end(), 0.0) / r.size();
  s.median = quantile(r, 0.5);
  s.p90 = quantile(r, 0.9);
  return s;
}

AffineMatrix predict_theta(const LocNetParams& params, const Image& u) {
  const LocNetArch& a = params.arch;
  if (u.height() == a.height && u.width() == a.width) return locnet_forward(params, u).theta;
  if (u.height() % a.height == 0 && u.width() % a.width == 0 &&
      u.height() / a.height == u.width() / a.width) {
    return locnet_forward(params, downsample_area(u, u.height() / a.height)).theta;
  }
  throw ShapeError("calibrate: image " + std::to_string(u.height()) + "x" +
                   std::to_string(u.width()) + " is not an integer multiple of the " +
                   std::to_string(a.height) + "x" + std::to_string(a.width) + " network input");
}

Calibration calibrate(const LocNetParams& params, const Image& u) {
  Calibration c;
  c.theta_p = predict_theta(params, u);
  c.v = warp(u, c.theta_p);
  return c;
}

void write_train_report_csv(const std::filesystem::path& path, const TrainReport& report) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "epoch,l_theta,l_image,total\n";
  char buf[128];
  for (const EpochStats& e : report.epochs) {
    std::snprintf(buf, sizeof(buf), "%d,%.9g,%.9g,%.9g\n", e.epoch, e.l_theta, e.l_image,
                  e.total);
    out << buf;
  }
  if (!out) throw DataError("write failed: " + path.string());
}

}  // namespace rustan
