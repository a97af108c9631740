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
#include <string>
#include <vector>

namespace rustan {

inline constexpr const char* kEvalSchema = "# schema: rustan-eval v1";
inline constexpr const char* kEvalHeader =
    "angle_deg,mode,input,precision,recall,f1,map50,map50_95";
inline constexpr const char* kF1Schema = "# schema: rustan-f1 v1";
inline constexpr const char* kF1Header = "angle_deg,mode,input,class,confidence,precision,recall,f1";

struct EvalRow {
  double angle_deg = 0.0;
  std::string mode;
  std::string input;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double map50 = 0.0;
  double map50_95 = 0.0;
};

struct F1Row {
  double angle_deg = 0.0;
  std::string mode;
  std::string input;
  std::string cls;
  double confidence = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);
void write_f1_csv(const std::filesystem::path& path, const std::vector<F1Row>& rows);

// Throw DataError naming the file and line on malformed input.
std::vector<EvalRow> read_eval_csv(const std::filesystem::path& path);
std::vector<F1Row> read_f1_csv(const std::filesystem::path& path);

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

// Line plot with markers, axes, ticks and a legend in series order.
std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series,
                             double y_min = 0.0, double y_max = 1.0);

// Fixed-width text grid; the first row is the header.
std::string format_table(const std::vector<std::vector<std::string>>& rows);

struct ReportFiles {
  std::filesystem::path summary;
  std::vector<std::filesystem::path> plots;
};

// Writes summary.txt, one mAP50-vs-angle plot per input kind and, when the
// F1 curve file exists, one F1-vs-confidence plot per class.
ReportFiles write_report(const std::filesystem::path& eval_csv,
                         const std::filesystem::path& f1_csv,
                         const std::filesystem::path& out_dir);

}  // namespace rustan
