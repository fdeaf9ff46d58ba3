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

#ifndef FKSYNTH_FACTOR_H_
#define FKSYNTH_FACTOR_H_

#include <cstdint>
#include <span>
#include <vector>

namespace fksynth {

// A dense table of log-values over a sorted set of variables, row-major with
// the first (smallest id) variable slowest.
struct Factor {
  std::vector<int> vars;
  std::vector<int> card;
  std::vector<double> values;

  Factor() = default;
  Factor(std::vector<int> vars, std::vector<int> card, double fill = 0.0);

  size_t size() const { return values.size(); }
  std::vector<int64_t> Strides() const;
  bool HasVar(int var) const;
};

// Cardinality lookup for each var in vars from a full-domain card vector.
std::vector<int> CardsOf(std::span<const int> vars, std::span<const int> domain_card);

// Number of cells in the span of the variables.
int64_t SpanOf(std::span<const int> vars, std::span<const int> domain_card);

// target += source, broadcasting source over target's extra variables.
// source.vars must be a subset of target.vars.
void AddInto(Factor& target, const Factor& source);

// target += source for raw source values laid out over source_vars.
void AddInto(Factor& target, std::span<const int> source_vars,
             std::span<const double> source_values);

// target -= source with (-inf) - (-inf) taken as -inf.
void SubtractInto(Factor& target, const Factor& source);

// Log-sum-exp over every variable not in keep. keep must be a subset of
// f.vars and sorted.
Factor Marginalize(const Factor& f, std::span<const int> keep);

// Numerically stable log(sum(exp(values))); -inf for an empty or all -inf span.
double LogSumExp(std::span<const double> values);

// Sets every cell whose value of var differs from value to -inf.
void ApplyEvidence(Factor& f, int var, int value);

// Union of sorted variable lists.
std::vector<int> UnionVars(std::span<const int> a, std::span<const int> b);
std::vector<int> IntersectVars(std::span<const int> a, std::span<const int> b);

}  // namespace fksynth

#endif  // FKSYNTH_FACTOR_H_
