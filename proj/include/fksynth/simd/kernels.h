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

#ifndef FKSYNTH_SIMD_KERNELS_H_
#define FKSYNTH_SIMD_KERNELS_H_

#include <cstddef>
#include <optional>
#include <string_view>

namespace fksynth::simd {

// Dense double-precision kernels used by the log-space factor algebra and the
// optimizer. Every kernel has a scalar reference implementation; vector
// variants must agree with it exactly for add/max style kernels and to within
// a few ulp for kernels that evaluate exp or reorder a reduction.
struct KernelTable {
  const char* name;
  // out[i] = a[i] + b[i]. out may alias a or b.
  void (*add)(const double* a, const double* b, double* out, size_t n);
  // out[i] = a[i] + s. out may alias a.
  void (*add_scalar)(const double* a, double s, double* out, size_t n);
  // max_i x[i]; -inf when n == 0.
  double (*reduce_max)(const double* x, size_t n);
  // sum_i exp(x[i] - shift). shift must be finite.
  double (*sum_exp_shifted)(const double* x, double shift, size_t n);
  // acc[i] = max(acc[i], x[i]).
  void (*max_into)(const double* x, double* acc, size_t n);
  // acc[i] += exp(x[i] - shift[i]). Every shift[i] must be finite.
  void (*accumulate_exp_shifted)(const double* x, const double* shift,
                                 double* acc, size_t n);
  // out[i] = exp(x[i] - shift). out may alias x.
  void (*exp_shifted)(const double* x, double shift, double* out, size_t n);
  // y[i] += a * x[i].
  void (*axpy)(double a, const double* x, double* y, size_t n);
  double (*dot)(const double* a, const double* b, size_t n);
  // sum_i |a[i] - b[i]|.
  double (*abs_diff_sum)(const double* a, const double* b, size_t n);
  // max_i |x[i]|; 0 when n == 0.
  double (*max_abs)(const double* x, size_t n);
};

enum class Isa { kScalar, kAvx2 };

const KernelTable& ScalarKernels();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* Avx2Kernels();

// The table selected at startup: the widest supported ISA unless the
// FKSYNTH_SIMD environment variable names another ("scalar", "avx2").
const KernelTable& Kernels();

Isa ActiveIsa();

// Overrides the active table. Returns false if the ISA is unavailable.
bool SetActiveIsa(Isa isa);

std::optional<Isa> ParseIsa(std::string_view name);

}  // namespace fksynth::simd

#endif  // FKSYNTH_SIMD_KERNELS_H_
