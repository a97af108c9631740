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
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rustan/config.hpp"
#include "rustan/error.hpp"
#include "rustan/pipeline.hpp"

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kNumerical = 3 };

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string workdir;
  std::string mode;
  std::string angles;
};

rustan::ExperimentConfig resolve(const Options& o) {
  rustan::ExperimentConfig c = o.config.empty() ? rustan::ExperimentConfig{}
                                                : rustan::load_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (!o.workdir.empty()) c.workdir = o.workdir;
  if (!o.angles.empty()) c.angles_deg = rustan::parse_angle_list(o.angles);
  c.distiller_arch.height = c.distiller_arch.width = c.image_size;
  c.validate();
  return c;
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "experiment config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (overrides the config)");
  cmd->add_option("--workdir", o.workdir, "working directory (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Runway scene calibration and detection experiments"};
  app.require_subcommand(1);
  Options o;

  CLI::App* synth = app.add_subcommand("synth", "write paired training and evaluation scenes");
  add_common(synth, o);

  CLI::App* train = app.add_subcommand("train", "train one model and write its checkpoint");
  add_common(train, o);
  train->add_option("--mode", o.mode, "rustan, stn_baseline or distiller")->required();

  CLI::App* eval = app.add_subcommand("eval", "run the rotation sweep and score detections");
  add_common(eval, o);
  eval->add_option("--mode", o.mode, "comma-separated calibration modes (none, stn_baseline, rustan)");
  eval->add_option("--angles", o.angles, "comma-separated rotation angles in degrees");

  CLI::App* report = app.add_subcommand("report", "summary table and plots from eval results");
  add_common(report, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    rustan::ExperimentConfig c = resolve(o);
    if (*synth) {
      const auto out = rustan::cmd_synth(c);
      std::printf("wrote %zu training and %zu evaluation scenes under %s\n",
                  out.train.entries.size(), out.eval.entries.size(),
                  (c.workdir / "data").string().c_str());
    } else if (*train) {
      const auto target = rustan::parse_target(o.mode);
      rustan::cmd_train(c, target);
      std::printf("wrote %s\n", rustan::checkpoint_path(c, target).string().c_str());
    } else if (*eval) {
      if (eval->count("--mode") > 0) c.modes = rustan::parse_mode_list(o.mode);
      const auto rows = rustan::cmd_eval(c);
      std::printf("wrote %zu rows to %s\n", rows.size(),
                  rustan::eval_csv_path(c).string().c_str());
    } else if (*report) {
      const auto files = rustan::cmd_report(c);
      std::printf("%s\n", files.summary.string().c_str());
      for (const auto& p : files.plots) std::printf("%s\n", p.string().c_str());
    }
  } catch (const rustan::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const rustan::NumericalError& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kData;
  }
  return kOk;
}
