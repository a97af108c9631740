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
#include "rustan/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "rustan/error.hpp"

namespace rustan {
namespace {

using Tree = boost::property_tree::ptree;

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

int to_int32(const std::string& key, const std::string& v) {
  const long long x = to_int(key, v);
  if (x < -(1LL << 31) || x >= (1LL << 31)) throw ConfigError(key + ": out of range");
  return static_cast<int>(x);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError(key + ": expected an unsigned integer, got '" + v + "'");
  return out;
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key,
                                  const std::string& value)>;

template <typename T>
Setter num(T ExperimentConfig::*field) {
  return [field](ExperimentConfig& c, const std::string& k, const std::string& v) {
    if constexpr (std::is_same_v<T, int>) {
      c.*field = to_int32(k, v);
    } else {
      c.*field = to_double(k, v);
    }
  };
}

Setter dbl(std::function<double&(ExperimentConfig&)> ref) {
  return [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
    ref(c) = to_double(k, v);
  };
}

Setter i32(std::function<int&(ExperimentConfig&)> ref) {
  return [ref](ExperimentConfig& c, const std::string& k, const std::string& v) {
    ref(c) = to_int32(k, v);
  };
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"experiment.seed",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.seed = to_u64(k, v);
       }},
      {"experiment.workdir",
       [](ExperimentConfig& c, const std::string&, const std::string& v) { c.workdir = v; }},

      {"scene.size", num(&ExperimentConfig::image_size)},
      {"scene.train_count", num(&ExperimentConfig::train_count)},
      {"scene.eval_count", num(&ExperimentConfig::eval_count)},
      {"scene.marker_count", i32([](ExperimentConfig& c) -> int& { return c.scene.marker_count; })},
      {"scene.dash_count", i32([](ExperimentConfig& c) -> int& { return c.scene.dash_count; })},
      {"scene.ground_texture",
       dbl([](ExperimentConfig& c) -> double& { return c.scene.ground_texture; })},

      {"weather.kind",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.weather.kind = parse_weather(v);
       }},
      {"weather.train_intensity_min",
       dbl([](ExperimentConfig& c) -> double& { return c.train_intensity.lo; })},
      {"weather.train_intensity_max",
       dbl([](ExperimentConfig& c) -> double& { return c.train_intensity.hi; })},
      {"weather.eval_intensity", num(&ExperimentConfig::eval_intensity)},
      {"weather.fog_falloff", dbl([](ExperimentConfig& c) -> double& { return c.weather.fog_falloff; })},
      {"weather.rain_streaks", i32([](ExperimentConfig& c) -> int& { return c.weather.rain_streaks; })},
      {"weather.rain_length", dbl([](ExperimentConfig& c) -> double& { return c.weather.rain_length; })},
      {"weather.rain_angle", dbl([](ExperimentConfig& c) -> double& { return c.weather.rain_angle; })},
      {"weather.rain_brightness",
       dbl([](ExperimentConfig& c) -> double& { return c.weather.rain_brightness; })},
      {"weather.snow_flakes", i32([](ExperimentConfig& c) -> int& { return c.weather.snow_flakes; })},
      {"weather.snow_radius", dbl([](ExperimentConfig& c) -> double& { return c.weather.snow_radius; })},
      {"weather.snow_brightness",
       dbl([](ExperimentConfig& c) -> double& { return c.weather.snow_brightness; })},

      {"locnet.resolution",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.locnet.height = c.locnet.width = to_int32(k, v);
       }},
      {"locnet.stage_channels",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.locnet.stages.clear();
         for (const std::string& item : split_list(v))
           c.locnet.stages.push_back({3, 2, to_int32(k, item)});
       }},
      {"locnet.pool_grid", i32([](ExperimentConfig& c) -> int& { return c.locnet.pool_grid; })},
      {"locnet.hidden", i32([](ExperimentConfig& c) -> int& { return c.locnet.hidden; })},

      {"rustan.lambda1", dbl([](ExperimentConfig& c) -> double& { return c.rustan.lambda1; })},
      {"rustan.lambda2", dbl([](ExperimentConfig& c) -> double& { return c.rustan.lambda2; })},
      {"rustan.learning_rate",
       dbl([](ExperimentConfig& c) -> double& { return c.rustan.learning_rate; })},
      {"rustan.epochs", i32([](ExperimentConfig& c) -> int& { return c.rustan.epochs; })},
      {"rustan.batch_size", i32([](ExperimentConfig& c) -> int& { return c.rustan.batch_size; })},
      {"rustan.max_translation",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const double t = to_double(k, v);
         c.rustan.ranges.tx = {-t, t};
         c.rustan.ranges.ty = {-t, t};
       }},
      {"rustan.max_rotation_deg",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         const double r = deg_to_rad(to_double(k, v));
         c.rustan.ranges.phi = {-r, r};
       }},
      {"rustan.min_scale",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.rustan.ranges.sx.lo = c.rustan.ranges.sy.lo = to_double(k, v);
       }},
      {"rustan.max_scale",
       [](ExperimentConfig& c, const std::string& k, const std::string& v) {
         c.rustan.ranges.sx.hi = c.rustan.ranges.sy.hi = to_double(k, v);
       }},

      {"distiller.learning_rate",
       dbl([](ExperimentConfig& c) -> double& { return c.distiller.learning_rate; })},
      {"distiller.epochs", i32([](ExperimentConfig& c) -> int& { return c.distiller.epochs; })},
      {"distiller.batch_size", i32([](ExperimentConfig& c) -> int& { return c.distiller.batch_size; })},
      {"distiller.enc1", i32([](ExperimentConfig& c) -> int& { return c.distiller_arch.enc1; })},
      {"distiller.enc2", i32([](ExperimentConfig& c) -> int& { return c.distiller_arch.enc2; })},

      {"eval.angles",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.angles_deg = parse_angle_list(v);
       }},
      {"eval.modes",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.modes = parse_mode_list(v);
       }},
      {"eval.inputs",
       [](ExperimentConfig& c, const std::string&, const std::string& v) {
         c.inputs.clear();
         for (const std::string& item : split_list(v)) c.inputs.push_back(parse_input(item));
       }},
      {"eval.confidence_threshold", num(&ExperimentConfig::confidence_threshold)},
      {"eval.f1_angle", num(&ExperimentConfig::f1_angle_deg)},
  };
  return table;
}

}  // namespace

std::string_view input_name(EvalInput i) {
  switch (i) {
    case EvalInput::kClean: return "clean";
    case EvalInput::kDegraded: return "degraded";
    case EvalInput::kRestored: return "restored";
  }
  return "clean";
}

EvalInput parse_input(std::string_view name) {
  if (name == "clean") return EvalInput::kClean;
  if (name == "degraded") return EvalInput::kDegraded;
  if (name == "restored") return EvalInput::kRestored;
  throw ConfigError("unknown evaluation input '" + std::string(name) +
                    "' (expected clean, degraded or restored)");
}

std::vector<double> parse_angle_list(const std::string& csv) {
  std::vector<double> out;
  for (const std::string& item : split_list(csv)) out.push_back(to_double("angles", item));
  if (out.empty()) throw ConfigError("angles: empty list");
  return out;
}

std::vector<TrainMode> parse_mode_list(const std::string& csv) {
  std::vector<TrainMode> out;
  for (const std::string& item : split_list(csv)) out.push_back(parse_mode(item));
  return out;
}

void ExperimentConfig::validate() const {
  if (image_size < 64 || image_size % 4 != 0)
    throw ConfigError("scene.size: must be a multiple of 4 and at least 64");
  if (train_count < 1) throw ConfigError("scene.train_count: must be at least 1");
  if (eval_count < 1) throw ConfigError("scene.eval_count: must be at least 1");
  if (!weather.valid()) throw ConfigError("weather: invalid parameters");
  if (!(train_intensity.lo >= 0.0 && train_intensity.lo <= train_intensity.hi &&
        train_intensity.hi <= 1.0))
    throw ConfigError("weather.train_intensity_min/max: need 0 <= min <= max <= 1");
  if (!(eval_intensity >= 0.0 && eval_intensity <= 1.0))
    throw ConfigError("weather.eval_intensity: must lie in [0, 1]");
  locnet.validate();
  if (image_size % locnet.height != 0 || image_size % locnet.width != 0)
    throw ConfigError("locnet.resolution: must divide scene.size");
  rustan.validate();
  distiller.validate();
  DistillerArch d = distiller_arch;
  d.height = d.width = image_size;
  d.validate();
  if (angles_deg.empty()) throw ConfigError("eval.angles: empty list");
  for (double a : angles_deg)
    if (!(std::abs(a) <= 90.0)) throw ConfigError("eval.angles: each angle must lie in [-90, 90]");
  if (modes.empty()) throw ConfigError("eval.modes: empty list");
  if (inputs.empty()) throw ConfigError("eval.inputs: empty list");
  if (!(confidence_threshold >= 0.0 && confidence_threshold <= 1.0))
    throw ConfigError("eval.confidence_threshold: must lie in [0, 1]");
}

ExperimentConfig parse_config(const std::string& text) {
  Tree tree;
  std::istringstream in(text);
  try {
    boost::property_tree::ini_parser::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  ExperimentConfig c;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty())
      throw ConfigError("config key '" + section + "' must be inside a [section]");
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = setters().find(full);
      if (it == setters().end()) throw ConfigError("unknown config key '" + full + "'");
      it->second(c, full, trim(value.data()));
    }
  }
  c.distiller_arch.height = c.distiller_arch.width = c.image_size;
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

}  // namespace rustan
