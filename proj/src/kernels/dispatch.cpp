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
#include <atomic>
#include <string>

#include "rustan/error.hpp"
#include "rustan/kernels.hpp"

namespace rustan::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(RUSTAN_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&table(best_available())};
  return slot;
}

void require_size(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(a) +
                     " vs " + std::to_string(b));
  }
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
  }
  return "unknown";
}

bool available(Isa isa) {
  if (isa == Isa::kScalar) return true;
  static const bool avx2 = cpu_has_avx2();
  return avx2;
}

const KernelTable& table(Isa isa) {
  if (!available(isa)) {
    throw ConfigError("kernel ISA not available: " + std::string(isa_name(isa)));
  }
#if defined(RUSTAN_HAVE_AVX2)
  if (isa == Isa::kAvx2) return detail::kAvx2Table;
#endif
  return detail::kScalarTable;
}

Isa best_available() { return available(Isa::kAvx2) ? Isa::kAvx2 : Isa::kScalar; }

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

void select(Isa isa) { active_slot().store(&table(isa), std::memory_order_release); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  require_size(x.size(), y.size(), "axpy");
  active().axpy(a, x.data(), y.data(), x.size());
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_size(a.size(), b.size(), "dot");
  return active().dot(a.data(), b.data(), a.size());
}

double sum_abs_diff(std::span<const double> a, std::span<const double> b) {
  require_size(a.size(), b.size(), "sum_abs_diff");
  return active().sum_abs_diff(a.data(), b.data(), a.size());
}

}  // namespace rustan::kernels
