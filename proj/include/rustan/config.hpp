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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rustan/distiller.hpp"
#include "rustan/localization_net.hpp"
#include "rustan/rustan_trainer.hpp"
#include "rustan/scene.hpp"

namespace rustan {

enum class EvalInput { kClean, kDegraded, kRestored };

std::string_view input_name(EvalInput i);
EvalInput parse_input(std::string_view name);  // throws ConfigError

struct ExperimentConfig {
  std::uint64_t seed = 20261015;
  std::filesystem::path workdir = "work";

  SceneSpec scene;
  int image_size = 128;
  int train_count = 200;
  int eval_count = 50;

  WeatherSpec weather;           // kind and kind-specific parameters
  Interval train_intensity{0.0, 0.8};
  double eval_intensity = 0.5;

  LocNetArch locnet;
  TrainConfig rustan;            // mode is set per command
  DistillerArch distiller_arch;  // height and width follow image_size
  DistillConfig distiller;

  std::vector<double> angles_deg{0.0, 3.0, 5.0, 10.0, 15.0};
  std::vector<TrainMode> modes{TrainMode::kNone, TrainMode::kStnBaseline, TrainMode::kRustan};
  std::vector<EvalInput> inputs{EvalInput::kClean, EvalInput::kDegraded, EvalInput::kRestored};
  double confidence_threshold = 0.25;
  double f1_angle_deg = 5.0;

  // Throws ConfigError naming the offending key.
  void validate() const;

  std::filesystem::path train_dir() const { return workdir / "data" / "train"; }
  std::filesystem::path eval_dir() const { return workdir / "data" / "eval"; }
  std::filesystem::path checkpoint_dir() const { return workdir / "checkpoints"; }
  std::filesystem::path report_dir() const { return workdir / "reports"; }
  std::filesystem::path results_dir() const { return workdir / "results"; }
};

// INI-style file: [section] headers and key = value lines; '#' and ';'
// start comments. Unknown sections or keys are rejected. See
// docs/config.md for the grammar and every key.
ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& text);

std::vector<double> parse_angle_list(const std::string& csv);  // throws ConfigError
std::vector<TrainMode> parse_mode_list(const std::string& csv);  // empty list allowed

}  // namespace rustan
