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

#ifndef FKSYNTH_MARGINAL_H_
#define FKSYNTH_MARGINAL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fksynth/datastore.h"
#include "fksynth/privacy.h"

namespace fksynth {

// Variable space of a model over one relation. Variables 0..num_observed-1
// are the relation's attribute columns; any further variables are latent
// group attributes (Z1, Z2).
struct Domain {
  std::vector<int> card;
  int num_observed = 0;

  int num_vars() const { return static_cast<int>(card.size()); }
  int num_latent() const { return num_vars() - num_observed; }
  bool is_latent(int var) const { return var >= num_observed; }
  // Product of the variables' domain sizes.
  int64_t SpanSize(std::span<const int> vars) const;

  // Observed attributes of the relation plus num_latent latent variables of
  // size latent_card each.
  static Domain ForRelation(const EncodedRelation& relation, int num_latent,
                            int latent_card);
};

// A set of variables, kept sorted ascending (observed before latent).
struct MarginalSpec {
  std::vector<int> vars;

  MarginalSpec() = default;
  explicit MarginalSpec(std::vector<int> v);

  bool is_latent(const Domain& domain) const;
  bool Contains(int var) const;
  // Observed part of the spec.
  MarginalSpec ObservedPart(const Domain& domain) const;
  std::string ToString() const;

  friend bool operator==(const MarginalSpec&, const MarginalSpec&) = default;
  friend auto operator<=>(const MarginalSpec&, const MarginalSpec&) = default;
};

// Counts over the span of a spec, row-major with the first variable slowest.
struct MarginalTable {
  MarginalSpec spec;
  std::vector<double> counts;
  double sigma = 0.0;
  bool noisy = false;

  double Total() const;
};

// Row-major strides of the spec variables.
std::vector<int64_t> SpecStrides(const Domain& domain, const MarginalSpec& spec);

// Cell of a full assignment (one value per domain variable) in the spec.
int64_t CellIndex(const Domain& domain, const MarginalSpec& spec,
                  std::span<const int> assignment);

// Exact contingency counts of the relation on an observed spec.
MarginalTable ComputeObserved(const EncodedRelation& relation,
                              const Domain& domain, const MarginalSpec& spec);

// Expected counts on a latent spec. responsibilities holds one row of
// size SpanSize(latent vars) per group: the joint distribution over the
// domain's latent variables, first latent variable slowest.
MarginalTable ComputeLatentExpected(const EncodedRelation& relation,
                                    const GroupIndex& groups,
                                    const Domain& domain,
                                    const MarginalSpec& spec,
                                    std::span<const double> responsibilities);

// Adds N(0, sigma^2) to every cell through the mechanism, which records the
// ledger entry. sigma == 0 leaves the table untouched.
void AddGaussianNoise(MarginalTable& table, double sensitivity, double sigma,
                      privacy::Mechanism& mechanism, const std::string& label);

// n_tilde / span >= lambda * sqrt(2/pi) * sigma.
bool LambdaUseful(int64_t span_size, double n_tilde, double sigma,
                  double lambda);

double L1Distance(const MarginalTable& a, const MarginalTable& b);

}  // namespace fksynth

#endif  // FKSYNTH_MARGINAL_H_
