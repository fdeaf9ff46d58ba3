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

#include "fksynth/marginal.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "fksynth/error.h"
#include "fksynth/simd/kernels.h"

namespace fksynth {

int64_t Domain::SpanSize(std::span<const int> vars) const {
  int64_t s = 1;
  for (int v : vars) s *= card[v];
  return s;
}

Domain Domain::ForRelation(const EncodedRelation& relation, int num_latent,
                           int latent_card) {
  Domain d;
  d.card = relation.DomainSizes();
  d.num_observed = relation.num_attrs();
  for (int i = 0; i < num_latent; ++i) d.card.push_back(latent_card);
  return d;
}

MarginalSpec::MarginalSpec(std::vector<int> v) : vars(std::move(v)) {
  std::sort(vars.begin(), vars.end());
  vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
}

bool MarginalSpec::is_latent(const Domain& domain) const {
  return std::any_of(vars.begin(), vars.end(),
                     [&](int v) { return domain.is_latent(v); });
}

bool MarginalSpec::Contains(int var) const {
  return std::binary_search(vars.begin(), vars.end(), var);
}

MarginalSpec MarginalSpec::ObservedPart(const Domain& domain) const {
  MarginalSpec out;
  for (int v : vars) {
    if (!domain.is_latent(v)) out.vars.push_back(v);
  }
  return out;
}

std::string MarginalSpec::ToString() const {
  std::ostringstream os;
  os << '{';
  for (size_t i = 0; i < vars.size(); ++i) os << (i ? "," : "") << vars[i];
  os << '}';
  return os.str();
}

double MarginalTable::Total() const {
  double t = 0.0;
  for (double c : counts) t += c;
  return t;
}

std::vector<int64_t> SpecStrides(const Domain& domain, const MarginalSpec& spec) {
  std::vector<int64_t> strides(spec.vars.size());
  int64_t s = 1;
  for (size_t i = spec.vars.size(); i-- > 0;) {
    strides[i] = s;
    s *= domain.card[spec.vars[i]];
  }
  return strides;
}

int64_t CellIndex(const Domain& domain, const MarginalSpec& spec,
                  std::span<const int> assignment) {
  int64_t idx = 0;
  for (int v : spec.vars) idx = idx * domain.card[v] + assignment[v];
  return idx;
}

namespace {

void CheckSpec(const Domain& domain, const MarginalSpec& spec) {
  for (int v : spec.vars) {
    if (v < 0 || v >= domain.num_vars()) {
      Fail(ErrorCode::kAttrNotInRelation,
           "variable " + std::to_string(v) + " is outside the domain");
    }
  }
}

}  // namespace

MarginalTable ComputeObserved(const EncodedRelation& relation,
                              const Domain& domain, const MarginalSpec& spec) {
  CheckSpec(domain, spec);
  for (int v : spec.vars) {
    if (domain.is_latent(v) || v >= relation.num_attrs()) {
      Fail(ErrorCode::kAttrNotInRelation,
           "variable " + std::to_string(v) + " is not an observed attribute");
    }
  }
  MarginalTable t;
  t.spec = spec;
  t.counts.assign(domain.SpanSize(spec.vars), 0.0);
  for (size_t r = 0; r < relation.num_rows(); ++r) {
    int64_t idx = 0;
    for (int v : spec.vars) idx = idx * domain.card[v] + relation.at(r, v);
    t.counts[idx] += 1.0;
  }
  return t;
}

MarginalTable ComputeLatentExpected(const EncodedRelation& relation,
                                    const GroupIndex& groups,
                                    const Domain& domain,
                                    const MarginalSpec& spec,
                                    std::span<const double> responsibilities) {
  CheckSpec(domain, spec);
  const int num_latent = domain.num_latent();
  std::vector<int> latent_vars;
  for (int i = 0; i < num_latent; ++i) latent_vars.push_back(domain.num_observed + i);
  const int64_t z_span = domain.SpanSize(latent_vars);
  if (responsibilities.size() != groups.groups.size() * static_cast<size_t>(z_span)) {
    Fail(ErrorCode::kDimensionMismatch,
         "responsibilities do not match groups x latent span");
  }
  const MarginalSpec obs = spec.ObservedPart(domain);
  for (int v : obs.vars) {
    if (v >= relation.num_attrs()) {
      Fail(ErrorCode::kAttrNotInRelation, "variable " + std::to_string(v) + " not in relation");
    }
  }
  // For each joint latent value, its cell within the spec's latent part.
  std::vector<int> spec_latent;
  for (int v : spec.vars) {
    if (domain.is_latent(v)) spec_latent.push_back(v);
  }
  const int64_t spec_latent_span = domain.SpanSize(spec_latent);
  std::vector<int64_t> z_to_cell(z_span);
  std::vector<int> zvals(num_latent);
  for (int64_t z = 0; z < z_span; ++z) {
    int64_t rem = z;
    for (int i = num_latent; i-- > 0;) {
      zvals[i] = static_cast<int>(rem % domain.card[domain.num_observed + i]);
      rem /= domain.card[domain.num_observed + i];
    }
    int64_t cell = 0;
    for (int v : spec_latent) {
      cell = cell * domain.card[v] + zvals[v - domain.num_observed];
    }
    z_to_cell[z] = cell;
  }

  MarginalTable t;
  t.spec = spec;
  t.counts.assign(domain.SpanSize(spec.vars), 0.0);
  // Per group, the responsibilities collapsed to the spec's latent part.
  std::vector<double> collapsed(spec_latent_span);
  for (size_t g = 0; g < groups.groups.size(); ++g) {
    std::fill(collapsed.begin(), collapsed.end(), 0.0);
    const double* resp = responsibilities.data() + g * z_span;
    for (int64_t z = 0; z < z_span; ++z) collapsed[z_to_cell[z]] += resp[z];
    for (int r : groups.groups[g].members) {
      int64_t obs_idx = 0;
      for (int v : obs.vars) obs_idx = obs_idx * domain.card[v] + relation.at(r, v);
      double* dst = t.counts.data() + obs_idx * spec_latent_span;
      for (int64_t c = 0; c < spec_latent_span; ++c) dst[c] += collapsed[c];
    }
  }
  return t;
}

void AddGaussianNoise(MarginalTable& table, double sensitivity, double sigma,
                      privacy::Mechanism& mechanism, const std::string& label) {
  if (sigma < 0.0) Fail(ErrorCode::kInvalidArgument, "negative noise scale");
  table.sigma = sigma;
  if (sigma == 0.0 || mechanism.noiseless()) return;
  mechanism.Perturb(label, sensitivity, sigma, table.counts);
  table.noisy = true;
}

bool LambdaUseful(int64_t span_size, double n_tilde, double sigma,
                  double lambda) {
  if (sigma <= 0.0) return true;
  return n_tilde / static_cast<double>(span_size) >=
         lambda * std::sqrt(2.0 / std::numbers::pi) * sigma;
}

double L1Distance(const MarginalTable& a, const MarginalTable& b) {
  if (a.spec != b.spec || a.counts.size() != b.counts.size()) {
    Fail(ErrorCode::kSpecMismatch, "L1 distance between different specs");
  }
  return simd::Kernels().abs_diff_sum(a.counts.data(), b.counts.data(),
                                      a.counts.size());
}

}  // namespace fksynth
