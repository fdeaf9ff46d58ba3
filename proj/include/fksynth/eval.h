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

#ifndef FKSYNTH_EVAL_H_
#define FKSYNTH_EVAL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fksynth/datastore.h"
#include "fksynth/pipeline.h"
#include "fksynth/rng.h"
#include "json.hpp"

namespace fksynth {

// A parent relation and one of its child relations joined through a key.
struct TwoLevel {
  int parent = -1;
  int child = -1;
  int edge = -1;
};

// The first edge of the schema whose parent is the primary relation, or the
// first edge overall when none is.
TwoLevel DefaultTwoLevel(const DatabaseSchema& schema);

// Conjunction of membership conditions t[A] in S.
struct Predicate {
  struct Condition {
    int attr = 0;
    std::vector<int> values;  // sorted
  };
  std::vector<Condition> conditions;

  bool Matches(std::span<const int32_t> row) const;
};

// Parents with exactly `size` children that satisfy `parent` and contain
// distinct children matching each of `children`.
struct AggregateQuery {
  int size = 1;
  Predicate parent;
  std::vector<Predicate> children;
};

std::vector<AggregateQuery> GenQueries(const DatabaseSchema& schema, const TwoLevel& tl,
                                       int count, int children, int attrs_per_predicate,
                                       RngStream rng);

// Rounded (0.2)^(1/k) share of a domain of size n, at least 1.
int PredicateValueCount(int domain_size, int total_conditions);

int64_t EvalQuery(const Database& db, const TwoLevel& tl, const AggregateQuery& q);

double RelativeError(double truth, double synthetic, double num_parents);

nlohmann::json QueryToJson(const DatabaseSchema& schema, const TwoLevel& tl,
                           const AggregateQuery& q);

struct QueryReport {
  std::vector<int64_t> truth;
  std::vector<int64_t> synthetic;
  std::vector<double> relative_error;
  double mean_relative_error = 0.0;
};

QueryReport CompareOnQueries(const Database& truth, const Database& synthetic,
                             const TwoLevel& tl, const std::vector<AggregateQuery>& queries);

// Total-variation distance between the joint frequencies of (number of
// children, parent attribute values) in two databases.
double SizePatternTv(const Database& a, const Database& b, const TwoLevel& tl);

// Children per parent for the key.
std::vector<int> GroupSizes(const Database& db, const TwoLevel& tl);

// Reference generator that keeps the bundle's per-relation models but drops
// the cross-relation link: parents from their standalone model, group sizes
// from the mixture of the key's size distribution, children drawn
// independently from the key model's marginal over child columns.
Database IndependentPairing(const ModelBundle& bundle, const TwoLevel& tl, RngStream rng);

struct Benchmark {
  Database db;
  TwoLevel two_level;
  // Planted cluster of every parent of the two-level key, -1 when it has no
  // children.
  std::vector<int> parent_cluster;
  nlohmann::json planted;
};

struct BenchmarkSizes {
  int groups = 1000;  // parents of the two-level key
};

// Profiles: two_cluster_households, chain_3level, public_parent.
Benchmark GenBenchmark(const std::string& profile, const BenchmarkSizes& sizes, RngStream rng);
std::vector<std::string> BenchmarkProfiles();

// Writes schema.json, one CSV per relation and planted.json into dir.
void WriteBenchmark(const Benchmark& bench, const std::string& dir);

// Share of groups whose recovered label's majority planted cluster equals
// their own; 1 means every recovered label is pure.
double ClusterPurity(const std::vector<int>& planted, const std::vector<int>& recovered);
double AdjustedRandIndex(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace fksynth

#endif  // FKSYNTH_EVAL_H_
