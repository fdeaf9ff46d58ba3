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

// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <cstdint>
#include <limits>

#include "fksynth/simd/kernels.h"

namespace fksynth::simd {
namespace {

constexpr size_t kLanes = 4;

inline __m256i TailMask(size_t remaining) {
  const int64_t r = static_cast<int64_t>(remaining);
  return _mm256_set_epi64x(r > 3 ? -1 : 0, r > 2 ? -1 : 0, r > 1 ? -1 : 0,
                           r > 0 ? -1 : 0);
}

// 2^n for integral n in [-1022, 1023], n held in a double lane.
inline __m256d Pow2(__m256d n) {
  const __m256d magic = _mm256_set1_pd(6755399441055744.0);  // 1.5 * 2^52
  __m256i bits = _mm256_sub_epi64(_mm256_castpd_si256(_mm256_add_pd(n, magic)),
                                  _mm256_castpd_si256(magic));
  bits = _mm256_slli_epi64(_mm256_add_epi64(bits, _mm256_set1_epi64x(1023)),
                           52);
  return _mm256_castsi256_pd(bits);
}

// exp(x) to within ~2 ulp of std::exp over the full double range, including
// the subnormal tail. Returns 0 below -745.2 and +inf above 709.79.
inline __m256d Exp(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634);
  const __m256d ln2_hi = _mm256_set1_pd(6.93147180369123816490e-01);
  const __m256d ln2_lo = _mm256_set1_pd(1.90821492927058770002e-10);
  const __m256d lo_limit = _mm256_set1_pd(-745.2);
  const __m256d hi_limit = _mm256_set1_pd(709.79);

  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  const __m256d overflow = _mm256_cmp_pd(x, hi_limit, _CMP_GT_OQ);
  x = _mm256_max_pd(_mm256_min_pd(x, hi_limit), lo_limit);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                    _MM_FROUND_TO_NEAREST_INT |
                                        _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  // Taylor series to degree 13; |r| <= ln2 / 2 keeps truncation below 1e-17.
  __m256d p = _mm256_set1_pd(1.0 / 6227020800.0);
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 479001600.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 39916800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 3628800.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 362880.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 40320.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 5040.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 720.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 120.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 24.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0 / 6.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(0.5));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));
  p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(1.0));

  // Split the scale so both halves stay normal down to the subnormal range.
  const __m256d n1 = _mm256_floor_pd(_mm256_mul_pd(n, _mm256_set1_pd(0.5)));
  const __m256d n2 = _mm256_sub_pd(n, n1);
  __m256d result = _mm256_mul_pd(_mm256_mul_pd(p, Pow2(n1)), Pow2(n2));

  result = _mm256_andnot_pd(underflow, result);
  result = _mm256_blendv_pd(
      result, _mm256_set1_pd(std::numeric_limits<double>::infinity()),
      overflow);
  return result;
}

inline double HorizontalSum(__m256d v) {
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

inline double HorizontalMax(__m256d v) {
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, v);
  double a = lanes[0] > lanes[1] ? lanes[0] : lanes[1];
  double b = lanes[2] > lanes[3] ? lanes[2] : lanes[3];
  return a > b ? a : b;
}

void Add(const double* a, const double* b, double* out, size_t n) {
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i,
                     _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void AddScalar(const double* a, double s, double* out, size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), vs));
  }
  for (; i < n; ++i) out[i] = a[i] + s;
}

double ReduceMax(const double* x, size_t n) {
  const double neg_inf = -std::numeric_limits<double>::infinity();
  __m256d m = _mm256_set1_pd(neg_inf);
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) m = _mm256_max_pd(m, _mm256_loadu_pd(x + i));
  double result = HorizontalMax(m);
  for (; i < n; ++i) result = x[i] > result ? x[i] : result;
  return result;
}

double SumExpShifted(const double* x, double shift, size_t n) {
  const __m256d vs = _mm256_set1_pd(shift);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_add_pd(acc, Exp(_mm256_sub_pd(_mm256_loadu_pd(x + i), vs)));
  }
  if (i < n) {
    const __m256i mask = TailMask(n - i);
    __m256d e = Exp(_mm256_sub_pd(_mm256_maskload_pd(x + i, mask), vs));
    acc = _mm256_add_pd(acc, _mm256_and_pd(e, _mm256_castsi256_pd(mask)));
  }
  return HorizontalSum(acc);
}

void MaxInto(const double* x, double* acc, size_t n) {
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    // Operand order matches std::max(acc, x) for equal or signed-zero inputs.
    _mm256_storeu_pd(acc + i,
                     _mm256_max_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(acc + i)));
  }
  for (; i < n; ++i) acc[i] = acc[i] < x[i] ? x[i] : acc[i];
}

void AccumulateExpShifted(const double* x, const double* shift, double* acc,
                          size_t n) {
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d e = Exp(_mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(shift + i)));
    _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i), e));
  }
  if (i < n) {
    const __m256i mask = TailMask(n - i);
    __m256d e = Exp(_mm256_sub_pd(_mm256_maskload_pd(x + i, mask),
                                  _mm256_maskload_pd(shift + i, mask)));
    _mm256_maskstore_pd(acc + i, mask,
                        _mm256_add_pd(_mm256_maskload_pd(acc + i, mask), e));
  }
}

void ExpShifted(const double* x, double shift, double* out, size_t n) {
  const __m256d vs = _mm256_set1_pd(shift);
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(out + i, Exp(_mm256_sub_pd(_mm256_loadu_pd(x + i), vs)));
  }
  if (i < n) {
    const __m256i mask = TailMask(n - i);
    _mm256_maskstore_pd(out + i, mask,
                        Exp(_mm256_sub_pd(_mm256_maskload_pd(x + i, mask), vs)));
  }
}

void Axpy(double a, const double* x, double* y, size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                            _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

double Dot(const double* a, const double* b, size_t n) {
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc);
  }
  double s = HorizontalSum(acc);
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double AbsDiffSum(const double* a, const double* b, size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d acc = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_add_pd(acc, _mm256_andnot_pd(sign, d));
  }
  double s = HorizontalSum(acc);
  for (; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double MaxAbs(const double* x, size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  __m256d m = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + kLanes <= n; i += kLanes) {
    m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  }
  double result = HorizontalMax(m);
  for (; i < n; ++i) {
    const double v = std::fabs(x[i]);
    result = v > result ? v : result;
  }
  return result;
}

}  // namespace

const KernelTable& Avx2KernelTable() {
  static const KernelTable table = {
      "avx2",   Add,       AddScalar,  ReduceMax,  SumExpShifted, MaxInto,
      AccumulateExpShifted, ExpShifted, Axpy, Dot, AbsDiffSum, MaxAbs,
  };
  return table;
}

}  // namespace fksynth::simd
