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

#include <algorithm>
#include <cmath>
#include <limits>

#include "fksynth/simd/kernels.h"

namespace fksynth::simd {
namespace {

void Add(const double* a, const double* b, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void AddScalar(const double* a, double s, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + s;
}

double ReduceMax(const double* x, size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < n; ++i) m = std::max(m, x[i]);
  return m;
}

double SumExpShifted(const double* x, double shift, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += std::exp(x[i] - shift);
  return s;
}

void MaxInto(const double* x, double* acc, size_t n) {
  for (size_t i = 0; i < n; ++i) acc[i] = std::max(acc[i], x[i]);
}

void AccumulateExpShifted(const double* x, const double* shift, double* acc,
                          size_t n) {
  for (size_t i = 0; i < n; ++i) acc[i] += std::exp(x[i] - shift[i]);
}

void ExpShifted(const double* x, double shift, double* out, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = std::exp(x[i] - shift);
}

void Axpy(double a, const double* x, double* y, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double Dot(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double AbsDiffSum(const double* a, const double* b, size_t n) {
  double s = 0.0;
  for (size_t i = 0; i < n; ++i) s += std::fabs(a[i] - b[i]);
  return s;
}

double MaxAbs(const double* x, size_t n) {
  double m = 0.0;
  for (size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

}  // namespace

const KernelTable& ScalarKernels() {
  static const KernelTable table = {
      "scalar",   Add,       AddScalar,  ReduceMax,  SumExpShifted, MaxInto,
      AccumulateExpShifted, ExpShifted, Axpy, Dot, AbsDiffSum, MaxAbs,
  };
  return table;
}

}  // namespace fksynth::simd
