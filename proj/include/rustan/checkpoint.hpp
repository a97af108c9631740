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

// Network checkpoint file, shared by every trainable model:
//
//   offset  size        field
//   0       8           magic "RSTNCKPT"
//   8       4           format version (u32, currently 1)
//   12      4           model kind (u32: 1 localization net, 2 distiller)
//   16      4           architecture field count n (u32)
//   20      4n          architecture fields (i32 each)
//   20+4n   8           parameter count m (u64)
//   28+4n   8m          parameters (IEEE-754 binary64)
//
// All integers and floats are little-endian.

#include <cstdint>
#include <filesystem>
#include <vector>

namespace rustan {

enum class ModelKind : std::uint32_t { kLocalizationNet = 1, kDistiller = 2 };

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelKind kind = ModelKind::kLocalizationNet;
  std::vector<int> arch;
  std::vector<double> params;
};

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& ckpt);
// Throws DataError on a bad magic, unknown version or truncated payload.
Checkpoint decode_checkpoint(const std::vector<std::uint8_t>& bytes);

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace rustan
