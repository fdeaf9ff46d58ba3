// Copyright 2026 The fksynth Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <atomic>
#include <cstdlib>
#include <string>

#include "fksynth/simd/kernels.h"

namespace fksynth::simd {

#if FKSYNTH_HAVE_AVX2
const KernelTable& Avx2KernelTable();
#endif

namespace {

bool CpuHasAvx2() {
#if FKSYNTH_HAVE_AVX2 && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* InitialTable() {
  const KernelTable* best = Avx2Kernels();
  if (best == nullptr) best = &ScalarKernels();
  if (const char* env = std::getenv("FKSYNTH_SIMD")) {
    if (auto isa = ParseIsa(env)) {
      if (*isa == Isa::kScalar) return &ScalarKernels();
      if (*isa == Isa::kAvx2 && Avx2Kernels() != nullptr) return Avx2Kernels();
    }
  }
  return best;
}

std::atomic<const KernelTable*>& Active() {
  static std::atomic<const KernelTable*> active{InitialTable()};
  return active;
}

}  // namespace

const KernelTable* Avx2Kernels() {
#if FKSYNTH_HAVE_AVX2
  static const bool supported = CpuHasAvx2();
  return supported ? &Avx2KernelTable() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& Kernels() { return *Active().load(std::memory_order_relaxed); }

Isa ActiveIsa() {
  return &Kernels() == &ScalarKernels() ? Isa::kScalar : Isa::kAvx2;
}

bool SetActiveIsa(Isa isa) {
  const KernelTable* table =
      isa == Isa::kScalar ? &ScalarKernels() : Avx2Kernels();
  if (table == nullptr) return false;
  Active().store(table, std::memory_order_relaxed);
  return true;
}

std::optional<Isa> ParseIsa(std::string_view name) {
  if (name == "scalar") return Isa::kScalar;
  if (name == "avx2") return Isa::kAvx2;
  return std::nullopt;
}

}  // namespace fksynth::simd
