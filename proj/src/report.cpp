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
#include "rustan/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "rustan/error.hpp"

namespace rustan {
namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

class CsvReader {
 public:
  CsvReader(const std::filesystem::path& path, const char* schema, const char* header)
      : path_(path), in_(path) {
    if (!in_) throw DataError("cannot read " + path.string());
    std::string line;
    if (!next_raw(line) || line != schema)
      fail("expected schema line '" + std::string(schema) + "'");
    if (!next_raw(line) || line != header) fail("expected header '" + std::string(header) + "'");
  }

  bool next(std::vector<std::string>& fields, std::size_t expected) {
    std::string line;
    while (next_raw(line)) {
      if (line.empty()) continue;
      fields = split_fields(line);
      if (fields.size() != expected)
        fail("expected " + std::to_string(expected) + " fields, got " +
             std::to_string(fields.size()));
      return true;
    }
    return false;
  }

  double number(const std::string& s) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
      fail("not a number: '" + s + "'");
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("malformed CSV " + path_.string() + ":" + std::to_string(line_) + ": " +
                    what);
  }

 private:
  bool next_raw(std::string& line) {
    if (!std::getline(in_, line)) return false;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  }

  std::filesystem::path path_;
  std::ifstream in_;
  int line_ = 0;
};

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw DataError("write failed: " + path.string());
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                    "#bcbd22"};

}  // namespace

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
  std::ostringstream out;
  out << kEvalSchema << '\n' << kEvalHeader << '\n';
  for (const EvalRow& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.4f,%s,%s,%.9f,%.9f,%.9f,%.9f,%.9f\n", r.angle_deg,
                  r.mode.c_str(), r.input.c_str(), r.precision, r.recall, r.f1, r.map50,
                  r.map50_95);
    out << buf;
  }
  write_text(path, out.str());
}

void write_f1_csv(const std::filesystem::path& path, const std::vector<F1Row>& rows) {
  std::ostringstream out;
  out << kF1Schema << '\n' << kF1Header << '\n';
  for (const F1Row& r : rows) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.4f,%s,%s,%s,%.2f,%.9f,%.9f,%.9f\n", r.angle_deg,
                  r.mode.c_str(), r.input.c_str(), r.cls.c_str(), r.confidence, r.precision,
                  r.recall, r.f1);
    out << buf;
  }
  write_text(path, out.str());
}

std::vector<EvalRow> read_eval_csv(const std::filesystem::path& path) {
  CsvReader csv(path, kEvalSchema, kEvalHeader);
  std::vector<EvalRow> rows;
  std::vector<std::string> f;
  while (csv.next(f, 8)) {
    if (f[1].empty() || f[2].empty()) csv.fail("empty mode or input");
    rows.push_back({csv.number(f[0]), f[1], f[2], csv.number(f[3]), csv.number(f[4]),
                    csv.number(f[5]), csv.number(f[6]), csv.number(f[7])});
  }
  if (rows.empty()) throw DataError("malformed CSV " + path.string() + ": no data rows");
  return rows;
}

std::vector<F1Row> read_f1_csv(const std::filesystem::path& path) {
  CsvReader csv(path, kF1Schema, kF1Header);
  std::vector<F1Row> rows;
  std::vector<std::string> f;
  while (csv.next(f, 8)) {
    rows.push_back({csv.number(f[0]), f[1], f[2], f[3], csv.number(f[4]), csv.number(f[5]),
                    csv.number(f[6]), csv.number(f[7])});
  }
  return rows;
}

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label, const std::vector<Series>& series,
                             double y_min, double y_max) {
  constexpr double kW = 640, kH = 400, kLeft = 60, kRight = 170, kTop = 40, kBottom = 50;
  const double pw = kW - kLeft - kRight;
  const double ph = kH - kTop - kBottom;
  double x_min = 0.0, x_max = 1.0;
  bool first = true;
  for (const Series& s : series) {
    for (double x : s.x) {
      x_min = first ? x : std::min(x_min, x);
      x_max = first ? x : std::max(x_max, x);
      first = false;
    }
  }
  if (x_max - x_min < 1e-12) {
    x_min -= 1.0;
    x_max += 1.0;
  }
  if (y_max - y_min < 1e-12) y_max = y_min + 1.0;
  auto sx = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - y_min) / (y_max - y_min)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
    << "\" viewBox=\"0 0 " << kW << ' ' << kH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << kW / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << escape_xml(title) << "</text>\n";
  o << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = x_min + (x_max - x_min) * i / 5.0;
    const double yv = y_min + (y_max - y_min) * i / 5.0;
    const std::string px = fmt("%.2f", sx(xv));
    const std::string py = fmt("%.2f", sy(yv));
    o << "<line x1=\"" << px << "\" y1=\"" << kTop + ph << "\" x2=\"" << px << "\" y2=\""
      << kTop + ph + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << px << "\" y=\"" << kTop + ph + 18 << "\" text-anchor=\"middle\">"
      << fmt("%.2f", xv) << "</text>\n";
    o << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft + pw
      << "\" y2=\"" << py << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << kLeft - 8 << "\" y=\"" << py << "\" text-anchor=\"end\" dy=\"4\">"
      << fmt("%.2f", yv) << "</text>\n";
  }
  o << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kH - 10 << "\" text-anchor=\"middle\">"
    << escape_xml(x_label) << "</text>\n";
  o << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << kTop + ph / 2 << ")\">" << escape_xml(y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    if (s.x.size() > 1) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        o << (i ? " " : "") << fmt("%.2f", sx(s.x[i])) << ',' << fmt("%.2f", sy(s.y[i]));
      }
      o << "\"/>\n";
    }
    if (s.x.size() <= 20) {
      for (std::size_t i = 0; i < s.x.size(); ++i) {
        o << "<circle cx=\"" << fmt("%.2f", sx(s.x[i])) << "\" cy=\"" << fmt("%.2f", sy(s.y[i]))
          << "\" r=\"3\" fill=\"" << color << "\"/>\n";
      }
    }
    const double ly = kTop + 10 + 18.0 * k;
    o << "<line x1=\"" << kLeft + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + pw + 32
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << kLeft + pw + 38 << "\" y=\"" << ly + 4 << "\">" << escape_xml(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string format_table(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width;
  for (const auto& r : rows) {
    if (width.size() < r.size()) width.resize(r.size(), 0);
    for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::string out;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    std::string line;
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      if (i) line += "  ";
      line += rows[k][i] + std::string(width[i] - rows[k][i].size(), ' ');
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
    if (k == 0) {
      std::size_t total = 0;
      for (std::size_t i = 0; i < width.size(); ++i) total += width[i] + (i ? 2 : 0);
      out += std::string(total, '-') + '\n';
    }
  }
  return out;
}

ReportFiles write_report(const std::filesystem::path& eval_csv,
                         const std::filesystem::path& f1_csv,
                         const std::filesystem::path& out_dir) {
  const std::vector<EvalRow> rows = read_eval_csv(eval_csv);
  std::filesystem::create_directories(out_dir);
  ReportFiles files;

  // Keep first-appearance order so output follows the sweep order.
  std::vector<std::string> inputs, modes;
  std::vector<double> angles;
  auto note = [](auto& v, const auto& x) {
    if (std::find(v.begin(), v.end(), x) == v.end()) v.push_back(x);
  };
  for (const EvalRow& r : rows) {
    note(inputs, r.input);
    note(modes, r.mode);
    note(angles, r.angle_deg);
  }

  std::string summary;
  std::vector<std::vector<std::string>> table{
      {"angle", "mode", "input", "P", "R", "F1", "mAP50", "mAP50-95"}};
  for (const EvalRow& r : rows) {
    table.push_back({fmt("%.1f", r.angle_deg), r.mode, r.input, fmt("%.3f", r.precision),
                     fmt("%.3f", r.recall), fmt("%.3f", r.f1), fmt("%.3f", r.map50),
                     fmt("%.3f", r.map50_95)});
  }
  summary += format_table(table);

  for (const std::string& input : inputs) {
    std::vector<std::vector<std::string>> grid{{"mAP50 (" + input + ")"}};
    for (double a : angles) grid[0].push_back(fmt("%.1f", a));
    std::vector<Series> series;
    for (const std::string& mode : modes) {
      Series s{mode, {}, {}};
      std::vector<std::string> line{mode};
      for (double a : angles) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const EvalRow& r) {
          return r.input == input && r.mode == mode && r.angle_deg == a;
        });
        if (it == rows.end()) {
          line.push_back("-");
          continue;
        }
        line.push_back(fmt("%.3f", it->map50));
        s.x.push_back(a);
        s.y.push_back(it->map50);
      }
      grid.push_back(line);
      if (!s.x.empty()) series.push_back(s);
    }
    summary += '\n' + format_table(grid);
    const auto path = out_dir / ("map50_vs_angle_" + input + ".svg");
    write_text(path, render_line_plot("mAP50 vs rotation (" + input + " input)",
                                      "rotation (deg)", "mAP50", series));
    files.plots.push_back(path);
  }

  if (std::filesystem::exists(f1_csv)) {
    const std::vector<F1Row> f1 = read_f1_csv(f1_csv);
    std::map<std::string, std::vector<Series>> per_class;
    std::vector<std::string> classes;
    for (const F1Row& r : f1) {
      note(classes, r.cls);
      auto& list = per_class[r.cls];
      const std::string label = r.mode + " (" + r.input + ")";
      auto it = std::find_if(list.begin(), list.end(),
                             [&](const Series& s) { return s.label == label; });
      if (it == list.end()) {
        list.push_back({label, {}, {}});
        it = list.end() - 1;
      }
      it->x.push_back(r.confidence);
      it->y.push_back(r.f1);
    }
    for (const std::string& cls : classes) {
      const auto path = out_dir / ("f1_" + cls + ".svg");
      const double angle = f1.front().angle_deg;
      write_text(path, render_line_plot("F1 vs confidence: " + cls + " at " + fmt("%.1f", angle) +
                                            " deg",
                                        "confidence threshold", "F1", per_class[cls]));
      files.plots.push_back(path);
    }
  }

  files.summary = out_dir / "summary.txt";
  write_text(files.summary, summary);
  return files;
}

}  // namespace rustan
