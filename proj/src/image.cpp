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
#include "rustan/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "rustan/error.hpp"
#include "rustan/kernels.hpp"

namespace rustan {

Image::Image(int height, int width, int channels, double fill)
    : height_(height), width_(width), channels_(channels) {
  if (height <= 0 || width <= 0 || channels <= 0) {
    throw ShapeError("image dimensions must be positive");
  }
  data_.assign(static_cast<std::size_t>(channels) * plane_size(), fill);
}

bool Image::in_unit_range() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return v >= 0.0 && v <= 1.0; });
}

void require_same_shape(const Image& a, const Image& b, const char* what) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(what) + ": shape mismatch (" +
                     std::to_string(a.channels()) + "x" + std::to_string(a.height()) +
                     "x" + std::to_string(a.width()) + " vs " +
                     std::to_string(b.channels()) + "x" + std::to_string(b.height()) +
                     "x" + std::to_string(b.width()) + ")");
  }
}

void clamp_unit(Image& img) {
  for (double& v : img.data()) v = std::clamp(v, 0.0, 1.0);
}

Image downsample_area(const Image& img, int factor) {
  if (factor < 1 || img.height() % factor != 0 || img.width() % factor != 0) {
    throw ShapeError("downsample_area: dimensions not divisible by factor");
  }
  if (factor == 1) return img;
  const int h = img.height() / factor;
  const int w = img.width() / factor;
  Image out(h, w, img.channels());
  const double norm = 1.0 / (factor * factor);
  for (int c = 0; c < img.channels(); ++c) {
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        double acc = 0.0;
        for (int dy = 0; dy < factor; ++dy) {
          for (int dx = 0; dx < factor; ++dx) {
            acc += img.at(c, y * factor + dy, x * factor + dx);
          }
        }
        out.at(c, y, x) = acc * norm;
      }
    }
  }
  return out;
}

double mean_abs_diff(const Image& a, const Image& b) {
  require_same_shape(a, b, "mean_abs_diff");
  return kernels::sum_abs_diff(a.data(), b.data()) / static_cast<double>(a.size());
}

void write_ppm(const std::filesystem::path& path, const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw ShapeError("write_ppm: expected 1 or 3 channels");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path.string());
  out << "P6\n" << img.width() << " " << img.height() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(img.width()) * 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int k = 0; k < 3; ++k) {
        const int c = img.channels() == 3 ? k : 0;
        const double v = std::clamp(img.at(c, y, x), 0.0, 1.0);
        row[static_cast<std::size_t>(x) * 3 + k] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw DataError("write failed: " + path.string());
}

namespace {

// Reads the next whitespace-delimited header token, skipping comments.
std::string next_token(std::istream& in) {
  std::string tok;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

}  // namespace

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open for reading: " + path.string());
  if (next_token(in) != "P6") throw DataError("not a binary PPM (P6): " + path.string());
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token(in));
    height = std::stoi(next_token(in));
    maxval = std::stoi(next_token(in));
  } catch (const std::exception&) {
    throw DataError("malformed PPM header: " + path.string());
  }
  if (width <= 0 || height <= 0 || maxval != 255) {
    throw DataError("unsupported PPM geometry or maxval: " + path.string());
  }
  std::vector<unsigned char> raw(static_cast<std::size_t>(width) * height * 3);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError("truncated PPM data: " + path.string());
  }
  Image img(height, width, 3);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(c, y, x) =
            raw[(static_cast<std::size_t>(y) * width + x) * 3 + c] / 255.0;
      }
    }
  }
  return img;
}

}  // namespace rustan
