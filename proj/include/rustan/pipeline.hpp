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

#include <filesystem>
#include <string_view>
#include <vector>

#include "rustan/config.hpp"
#include "rustan/distiller.hpp"
#include "rustan/localization_net.hpp"
#include "rustan/report.hpp"
#include "rustan/scene.hpp"

namespace rustan {

enum class TrainTarget { kRustan, kStnBaseline, kDistiller };

std::string_view target_name(TrainTarget t);
TrainTarget parse_target(std::string_view name);  // throws ConfigError

struct SynthOutput {
  Manifest train;
  Manifest eval;
};

// Training set: weather intensities drawn from the training interval.
// Evaluation set: fixed evaluation intensity. Both are rewritten in full.
SynthOutput cmd_synth(const ExperimentConfig& config);

// Checkpoint under checkpoint_dir(), loss curve CSV under report_dir().
std::filesystem::path checkpoint_path(const ExperimentConfig& config, TrainTarget t);
std::filesystem::path train_report_path(const ExperimentConfig& config, TrainTarget t);
void cmd_train(const ExperimentConfig& config, TrainTarget target);

// For every angle, input and mode: rotate, optionally restore weather,
// optionally calibrate, detect, and score against the canonical truth.
// Writes results/eval.csv and results/f1_curves.csv and returns the rows.
std::vector<EvalRow> cmd_eval(const ExperimentConfig& config);

std::filesystem::path eval_csv_path(const ExperimentConfig& config);
std::filesystem::path f1_csv_path(const ExperimentConfig& config);

ReportFiles cmd_report(const ExperimentConfig& config);

// Shared with tests and tools.
LocNetParams load_locnet(const std::filesystem::path& path);
DistillerParams load_distiller(const std::filesystem::path& path);
void save_locnet(const std::filesystem::path& path, const LocNetParams& params);
void save_distiller(const std::filesystem::path& path, const DistillerParams& params);

struct LoadedSet {
  std::vector<Image> clean;
  std::vector<Image> degraded;
  std::vector<SceneTruth> truth;
};
LoadedSet load_dataset(const std::filesystem::path& dir);

}  // namespace rustan
