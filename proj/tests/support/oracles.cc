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

#include "support/oracles.h"

#include <algorithm>
#include <cmath>
#include <set>

namespace fksynth::testing {

void ForEachAssignment(const std::vector<int>& card,
                       const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> x(card.size(), 0);
  while (true) {
    fn(x);
    size_t i = card.size();
    while (i > 0) {
      --i;
      if (++x[i] < card[i]) break;
      x[i] = 0;
      if (i == 0) return;
    }
    if (card.empty()) return;
  }
}

namespace {

size_t Cell(const Domain& domain, const MarginalSpec& spec, const std::vector<int>& x) {
  size_t idx = 0;
  for (int v : spec.vars) idx = idx * domain.card[v] + x[v];
  return idx;
}

}  // namespace

double BruteScore(const Domain& domain, const std::vector<MarginalSpec>& specs,
                  std::span<const double> theta, const std::vector<int>& x) {
  double s = 0.0;
  size_t off = 0;
  for (const MarginalSpec& spec : specs) {
    s += theta[off + Cell(domain, spec, x)];
    size_t span = 1;
    for (int v : spec.vars) span *= domain.card[v];
    off += span;
  }
  return s;
}

std::vector<double> BruteJoint(const Domain& domain,
                               const std::vector<MarginalSpec>& specs,
                               std::span<const double> theta) {
  std::vector<double> w;
  ForEachAssignment(domain.card, [&](const std::vector<int>& x) {
    w.push_back(BruteScore(domain, specs, theta, x));
  });
  const double mx = *std::max_element(w.begin(), w.end());
  long double total = 0.0L;
  for (double& v : w) {
    v = std::exp(v - mx);
    total += v;
  }
  for (double& v : w) v = static_cast<double>(v / total);
  return w;
}

double BruteLogPartition(const Domain& domain, const std::vector<MarginalSpec>& specs,
                         std::span<const double> theta) {
  std::vector<double> w;
  ForEachAssignment(domain.card, [&](const std::vector<int>& x) {
    w.push_back(BruteScore(domain, specs, theta, x));
  });
  const double mx = *std::max_element(w.begin(), w.end());
  long double total = 0.0L;
  for (double v : w) total += std::exp(static_cast<long double>(v - mx));
  return mx + static_cast<double>(std::log(total));
}

std::vector<double> BruteMarginals(const Domain& domain,
                                   const std::vector<MarginalSpec>& specs,
                                   std::span<const double> theta, double n) {
  const std::vector<double> p = BruteJoint(domain, specs, theta);
  std::vector<double> out(theta.size(), 0.0);
  size_t i = 0;
  ForEachAssignment(domain.card, [&](const std::vector<int>& x) {
    size_t off = 0;
    for (const MarginalSpec& spec : specs) {
      out[off + Cell(domain, spec, x)] += n * p[i];
      size_t span = 1;
      for (int v : spec.vars) span *= domain.card[v];
      off += span;
    }
    ++i;
  });
  return out;
}

RandomModel MakeRandomModel(RngStream& rng, int max_obs, int max_card,
                            int num_latent, int latent_card) {
  RandomModel m;
  const int obs = 2 + static_cast<int>(rng.UniformInt(max_obs - 1));
  for (int i = 0; i < obs; ++i) {
    m.domain.card.push_back(2 + static_cast<int>(rng.UniformInt(max_card - 1)));
  }
  m.domain.num_observed = obs;
  for (int i = 0; i < num_latent; ++i) m.domain.card.push_back(latent_card);
  const int nv = m.domain.num_vars();
  const int num_specs = 2 + static_cast<int>(rng.UniformInt(4));
  std::set<std::vector<int>> seen;
  for (int s = 0; s < num_specs; ++s) {
    const int size = 1 + static_cast<int>(rng.UniformInt(std::min(3, nv)));
    std::vector<int> vars;
    while (static_cast<int>(vars.size()) < size) {
      const int v = static_cast<int>(rng.UniformInt(nv));
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
    MarginalSpec spec(vars);
    if (seen.insert(spec.vars).second) m.specs.push_back(spec);
  }
  size_t params = 0;
  for (const MarginalSpec& s : m.specs) params += m.domain.SpanSize(s.vars);
  for (size_t i = 0; i < params; ++i) m.theta.push_back(rng.Normal(1.0));
  return m;
}

}  // namespace fksynth::testing
