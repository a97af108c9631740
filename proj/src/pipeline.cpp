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
#include "rustan/pipeline.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>

#include "rustan/checkpoint.hpp"
#include "rustan/detection.hpp"
#include "rustan/error.hpp"
#include "rustan/rustan_trainer.hpp"

namespace rustan {

std::string_view target_name(TrainTarget t) {
  switch (t) {
    case TrainTarget::kRustan: return "rustan";
    case TrainTarget::kStnBaseline: return "stn_baseline";
    case TrainTarget::kDistiller: return "distiller";
  }
  return "rustan";
}

TrainTarget parse_target(std::string_view name) {
  if (name == "rustan") return TrainTarget::kRustan;
  if (name == "stn_baseline") return TrainTarget::kStnBaseline;
  if (name == "distiller") return TrainTarget::kDistiller;
  throw ConfigError("unknown training target '" + std::string(name) +
                    "' (expected rustan, stn_baseline or distiller)");
}

std::filesystem::path checkpoint_path(const ExperimentConfig& c, TrainTarget t) {
  return c.checkpoint_dir() / (std::string(target_name(t)) + ".ckpt");
}

std::filesystem::path train_report_path(const ExperimentConfig& c, TrainTarget t) {
  return c.report_dir() / ("train_" + std::string(target_name(t)) + ".csv");
}

std::filesystem::path eval_csv_path(const ExperimentConfig& c) {
  return c.results_dir() / "eval.csv";
}

std::filesystem::path f1_csv_path(const ExperimentConfig& c) {
  return c.results_dir() / "f1_curves.csv";
}

LocNetParams load_locnet(const std::filesystem::path& path) {
  const Checkpoint ck = read_checkpoint(path);
  if (ck.kind != ModelKind::kLocalizationNet)
    throw DataError(path.string() + ": not a localization net checkpoint");
  LocNetParams p{LocNetArch::decode(ck.arch), ck.params};
  if (p.values.size() != p.arch.param_count())
    throw DataError(path.string() + ": parameter count does not match architecture");
  return p;
}

DistillerParams load_distiller(const std::filesystem::path& path) {
  const Checkpoint ck = read_checkpoint(path);
  if (ck.kind != ModelKind::kDistiller)
    throw DataError(path.string() + ": not a distiller checkpoint");
  DistillerParams p{DistillerArch::decode(ck.arch), ck.params};
  if (p.values.size() != p.arch.param_count())
    throw DataError(path.string() + ": parameter count does not match architecture");
  return p;
}

void save_locnet(const std::filesystem::path& path, const LocNetParams& p) {
  write_checkpoint(path, {ModelKind::kLocalizationNet, p.arch.encode(), p.values});
}

void save_distiller(const std::filesystem::path& path, const DistillerParams& p) {
  write_checkpoint(path, {ModelKind::kDistiller, p.arch.encode(), p.values});
}

LoadedSet load_dataset(const std::filesystem::path& dir) {
  const Manifest m = read_manifest(dir);
  if (m.entries.empty()) throw DataError("empty dataset manifest in " + dir.string());
  LoadedSet s;
  for (const ManifestEntry& e : m.entries) {
    s.clean.push_back(read_ppm(dir / e.clean));
    s.degraded.push_back(read_ppm(dir / e.degraded));
    s.truth.push_back(read_truth(dir / e.truth));
  }
  return s;
}

SynthOutput cmd_synth(const ExperimentConfig& c) {
  c.validate();
  SynthOutput out;
  out.train = make_paired_dataset(c.train_count, c.scene,
                                  {{c.weather.kind, c.train_intensity, 1.0}}, c.image_size,
                                  derive_seed(c.seed, 11), c.train_dir(), c.weather);
  out.eval = make_paired_dataset(c.eval_count, c.scene,
                                 {{c.weather.kind, {c.eval_intensity, c.eval_intensity}, 1.0}},
                                 c.image_size, derive_seed(c.seed, 12), c.eval_dir(), c.weather);
  return out;
}

namespace {

std::vector<Image> to_locnet_resolution(const std::vector<Image>& images, const LocNetArch& a) {
  std::vector<Image> out;
  for (const Image& img : images) {
    if (img.height() == a.height && img.width() == a.width) {
      out.push_back(img);
      continue;
    }
    if (img.height() % a.height != 0 || img.width() % a.width != 0 ||
        img.height() / a.height != img.width() / a.width) {
      throw ShapeError("scene size is not an integer multiple of the network input");
    }
    out.push_back(downsample_area(img, img.height() / a.height));
  }
  return out;
}

void write_validation(const std::filesystem::path& path, const ResidualStats& s) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  char buf[160];
  std::snprintf(buf, sizeof(buf), "count,median,mean,p90\n%d,%.9g,%.9g,%.9g\n", s.count,
                s.median, s.mean, s.p90);
  out << buf;
}

}  // namespace

void cmd_train(const ExperimentConfig& c, TrainTarget target) {
  c.validate();
  const LoadedSet train_set = load_dataset(c.train_dir());
  std::filesystem::create_directories(c.checkpoint_dir());
  std::filesystem::create_directories(c.report_dir());

  if (target == TrainTarget::kDistiller) {
    std::vector<PairedSample> pairs;
    for (std::size_t i = 0; i < train_set.clean.size(); ++i)
      pairs.push_back({train_set.degraded[i], train_set.clean[i]});
    DistillConfig dc = c.distiller;
    dc.seed = derive_seed(c.seed, 23);
    DistillResult r = train_distiller(pairs, c.distiller_arch, dc);
    save_distiller(checkpoint_path(c, target), r.params);
    write_distill_report_csv(train_report_path(c, target), r.report);
    return;
  }

  TrainConfig tc = c.rustan;
  tc.mode = target == TrainTarget::kRustan ? TrainMode::kRustan : TrainMode::kStnBaseline;
  tc.seed = derive_seed(c.seed, 21);
  const std::vector<Image> images = to_locnet_resolution(train_set.clean, c.locnet);
  std::vector<Image> validation;
  if (std::filesystem::exists(c.eval_dir() / "manifest.txt"))
    validation = to_locnet_resolution(load_dataset(c.eval_dir()).clean, c.locnet);
  PoseRanges val_ranges;
  val_ranges.phi = {-deg_to_rad(10.0), deg_to_rad(10.0)};
  TrainResult r = train(images, c.locnet, tc, validation, val_ranges);
  save_locnet(checkpoint_path(c, target), r.params);
  write_train_report_csv(train_report_path(c, target), r.report);
  if (!validation.empty()) {
    auto path = train_report_path(c, target);
    path.replace_filename("train_" + std::string(target_name(target)) + "_validation.csv");
    write_validation(path, r.report.validation);
  }
}

std::vector<EvalRow> cmd_eval(const ExperimentConfig& c) {
  c.validate();
  if (c.modes.empty()) throw ConfigError("eval: no calibration modes requested");
  const LoadedSet set = load_dataset(c.eval_dir());

  std::optional<LocNetParams> rustan_net, stn_net;
  std::optional<DistillerParams> distiller;
  for (TrainMode m : c.modes) {
    if (m == TrainMode::kRustan && !rustan_net)
      rustan_net = load_locnet(checkpoint_path(c, TrainTarget::kRustan));
    if (m == TrainMode::kStnBaseline && !stn_net)
      stn_net = load_locnet(checkpoint_path(c, TrainTarget::kStnBaseline));
  }
  for (EvalInput in : c.inputs) {
    if (in == EvalInput::kRestored && !distiller)
      distiller = load_distiller(checkpoint_path(c, TrainTarget::kDistiller));
  }

  double f1_angle = c.angles_deg.front();
  for (double a : c.angles_deg)
    if (std::abs(a - c.f1_angle_deg) < std::abs(f1_angle - c.f1_angle_deg)) f1_angle = a;

  std::vector<EvalRow> rows;
  std::vector<F1Row> f1_rows;
  const std::size_t n = set.clean.size();
  for (double angle : c.angles_deg) {
    const double phi = deg_to_rad(angle);
    for (EvalInput input : c.inputs) {
      std::vector<Image> rotated(n);
      for (std::size_t i = 0; i < n; ++i) {
        const Image& src = input == EvalInput::kClean ? set.clean[i] : set.degraded[i];
        rotated[i] = rotate_scene(src, {}, phi).image;
        if (input == EvalInput::kRestored) rotated[i] = restore(*distiller, rotated[i]);
      }
      for (TrainMode mode : c.modes) {
        const LocNetParams* net = mode == TrainMode::kRustan       ? &*rustan_net
                                  : mode == TrainMode::kStnBaseline ? &*stn_net
                                                                    : nullptr;
        std::vector<std::vector<Detection>> dets(n);
        for (std::size_t i = 0; i < n; ++i) {
          dets[i] = detect(net != nullptr ? calibrate(*net, rotated[i]).v : rotated[i]);
        }
        const MetricsReport m = map_scores(dets, set.truth, c.confidence_threshold);
        rows.push_back({angle, std::string(mode_name(mode)), std::string(input_name(input)),
                        m.aggregate.precision, m.aggregate.recall, m.aggregate.f1, m.map50,
                        m.map50_95});
        if (angle == f1_angle) {
          for (int k = 0; k < kNumClasses; ++k) {
            const auto cls = ElementClass(k);
            for (const F1Point& p : f1_curve(cls, dets, set.truth)) {
              f1_rows.push_back({angle, std::string(mode_name(mode)),
                                 std::string(input_name(input)), std::string(class_name(cls)),
                                 p.confidence, p.prf.precision, p.prf.recall, p.prf.f1});
            }
          }
        }
      }
    }
  }
  std::filesystem::create_directories(c.results_dir());
  write_eval_csv(eval_csv_path(c), rows);
  write_f1_csv(f1_csv_path(c), f1_rows);
  return rows;
}

ReportFiles cmd_report(const ExperimentConfig& c) {
  return write_report(eval_csv_path(c), f1_csv_path(c), c.report_dir());
}

}  // namespace rustan
