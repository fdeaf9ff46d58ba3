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

#include "fksynth/latent_em.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_map>

#include "fksynth/error.h"
#include "fksynth/parallel.h"

namespace fksynth {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double SafeLog(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

// Maps every child row to a distinct-pattern id and keeps one row per
// pattern, so per-tuple likelihoods are computed once per pattern.
struct PatternIndex {
  std::vector<int> row_pattern;
  std::vector<size_t> representative;
};

PatternIndex IndexPatterns(const EncodedRelation& rel, int num_observed) {
  PatternIndex idx;
  idx.row_pattern.resize(rel.num_rows());
  std::unordered_map<std::string, int> ids;
  ids.reserve(rel.num_rows());
  std::string key;
  for (size_t r = 0; r < rel.num_rows(); ++r) {
    auto row = rel.row(r);
    key.assign(reinterpret_cast<const char*>(row.data()), num_observed * sizeof(int32_t));
    auto [it, inserted] = ids.emplace(key, static_cast<int>(idx.representative.size()));
    if (inserted) idx.representative.push_back(r);
    idx.row_pattern[r] = it->second;
  }
  return idx;
}

// log p(t | z) for every pattern and joint latent value.
struct TupleLikelihood {
  PatternIndex patterns;
  std::vector<double> log_p;  // patterns x span
  int64_t span = 1;
};

TupleLikelihood ComputeTupleLikelihood(const LatentFkModel& m, const EncodedRelation& child,
                                       int threads) {
  const GraphicalModel& gm = m.model;
  const Domain& dom = gm.domain();
  if (child.num_attrs() != dom.num_observed) {
    Fail(ErrorCode::kDimensionMismatch, "child columns do not match the model domain");
  }
  TupleLikelihood tl;
  tl.span = gm.latent_span();
  Calibration cal = gm.Calibrate(gm.theta());
  const std::vector<int> zvars = {m.z1_var(), m.z2_var()};
  const Factor pz_model = gm.QueryLogMarginal(cal, zvars);
  const double log_a = cal.log_partition;
  tl.patterns = IndexPatterns(child, dom.num_observed);
  const size_t np = tl.patterns.representative.size();
  tl.log_p.assign(np * tl.span, 0.0);
  ParallelFor(np, threads, [&](size_t begin, size_t end) {
    std::vector<int> assignment(dom.num_vars(), 0);
    for (size_t p = begin; p < end; ++p) {
      auto row = child.row(tl.patterns.representative[p]);
      for (int a = 0; a < dom.num_observed; ++a) assignment[a] = row[a];
      std::span<double> out(tl.log_p.data() + p * tl.span, tl.span);
      gm.ScoreLatent(gm.theta(), assignment, out);
      for (int64_t z = 0; z < tl.span; ++z) out[z] -= log_a + pz_model.values[z];
    }
  });
  return tl;
}

// Unnormalized log p(G, z) for one group into out.
void GroupLogJoint(const LatentFkModel& m, const TupleLikelihood& tl, const TupleGroup& g,
                   std::span<double> out) {
  const int size = static_cast<int>(g.members.size());
  for (int64_t z = 0; z < tl.span; ++z) {
    double v = SafeLog(m.p_z[z]);
    v += size <= m.tau ? SafeLog(m.PSize(static_cast<int>(z), size)) : kNegInf;
    out[z] = v;
  }
  for (int r : g.members) {
    const double* lp = tl.log_p.data() + static_cast<size_t>(tl.patterns.row_pattern[r]) * tl.span;
    for (int64_t z = 0; z < tl.span; ++z) out[z] += lp[z];
  }
}

void CheckNoise(double sigma, const privacy::Mechanism& mech) {
  if (sigma < 0.0 || (sigma == 0.0 && !mech.noiseless())) {
    Fail(ErrorCode::kInvalidArgument, "noise scale must be positive for a private run");
  }
}

void ClampAndNormalize(std::span<double> v) {
  double total = 0.0;
  for (double& x : v) {
    x = std::max(0.0, x);
    total += x;
  }
  const double uniform = 1.0 / static_cast<double>(v.size());
  for (double& x : v) x = total > 0.0 ? x / total : uniform;
}

}  // namespace

const char* EmModeName(EmMode mode) { return mode == EmMode::kSoft ? "soft" : "hard"; }

EmMode ParseEmMode(std::string_view name) {
  if (name == "soft") return EmMode::kSoft;
  if (name == "hard") return EmMode::kHard;
  Fail(ErrorCode::kInvalidArgument, "unknown EM mode '" + std::string(name) + "'");
}

std::vector<double> LatentFkModel::Data() const {
  std::vector<double> data(model.num_params(), 0.0);
  for (int s = 0; s < model.num_specs(); ++s) {
    const MarginalTable& t = tables[s];
    if (t.counts.empty()) continue;
    if (t.counts.size() != model.spec_size(s)) {
      Fail(ErrorCode::kDimensionMismatch, "table size does not match its spec");
    }
    std::copy(t.counts.begin(), t.counts.end(), data.begin() + model.offset(s));
  }
  return data;
}

int LatentFkModel::NumLatentSpecs() const {
  int n = 0;
  for (const MarginalSpec& s : model.specs()) n += s.is_latent(model.domain()) ? 1 : 0;
  return n;
}

LatentFkModel InitializeLatentModel(const EncodedRelation& child, int edge, int k, int tau,
                                    std::vector<MarginalTable> tables, double n_tilde,
                                    double init_scale, RngStream rng, int64_t clique_cap) {
  if (k < 1 || tau < 1) Fail(ErrorCode::kInvalidArgument, "latent size and tau must be >= 1");
  Domain domain = Domain::ForRelation(child, 2, k);
  std::vector<MarginalSpec> specs;
  specs.reserve(tables.size());
  for (const MarginalTable& t : tables) specs.push_back(t.spec);
  LatentFkModel m{edge, k, tau, GraphicalModel(domain, specs, clique_cap), std::move(tables),
                  n_tilde, {}, {}};
  m.p_z.assign(m.latent_span(), 1.0 / m.latent_span());
  m.p_size.assign(static_cast<size_t>(m.latent_span()) * tau, 1.0 / tau);
  std::vector<double>& theta = m.model.theta();
  if (init_scale > 0.0) {
    for (int s = 0; s < m.model.num_specs(); ++s) {
      if (!m.model.specs()[s].is_latent(domain)) continue;
      for (size_t c = 0; c < m.model.spec_size(s); ++c) {
        theta[m.model.offset(s) + c] = rng.Normal(init_scale);
      }
    }
  }
  return m;
}

Responsibilities EStep(const LatentFkModel& model, const EncodedRelation& child,
                       const GroupIndex& groups, int threads) {
  const TupleLikelihood tl = ComputeTupleLikelihood(model, child, threads);
  Responsibilities resp;
  resp.span = tl.span;
  const size_t ng = groups.groups.size();
  resp.prob.assign(ng * tl.span, 0.0);
  resp.hard.assign(ng, 0);
  std::vector<int64_t> fallbacks(ng, 0);
  ParallelFor(ng, threads, [&](size_t begin, size_t end) {
    std::vector<double> lj(tl.span);
    for (size_t g = begin; g < end; ++g) {
      GroupLogJoint(model, tl, groups.groups[g], lj);
      double mx = kNegInf;
      int best = 0;
      for (int64_t z = 0; z < tl.span; ++z) {
        if (lj[z] > mx) {
          mx = lj[z];
          best = static_cast<int>(z);
        }
      }
      double* row = resp.prob.data() + g * tl.span;
      if (!std::isfinite(mx)) {
        for (int64_t z = 0; z < tl.span; ++z) row[z] = 1.0 / tl.span;
        resp.hard[g] = 0;
        fallbacks[g] = 1;
        continue;
      }
      double total = 0.0;
      for (int64_t z = 0; z < tl.span; ++z) {
        row[z] = std::exp(lj[z] - mx);
        total += row[z];
      }
      for (int64_t z = 0; z < tl.span; ++z) row[z] /= total;
      resp.hard[g] = best;
    }
  });
  for (int64_t f : fallbacks) resp.uniform_fallbacks += f;
  return resp;
}

std::vector<double> AssignmentWeights(const Responsibilities& resp, EmMode mode) {
  if (mode == EmMode::kSoft) return resp.prob;
  std::vector<double> w(resp.prob.size(), 0.0);
  for (size_t g = 0; g < resp.num_groups(); ++g) w[g * resp.span + resp.hard[g]] = 1.0;
  return w;
}

std::vector<double> UpdatePZ(const Responsibilities& resp, EmMode mode, double sigma_z,
                             double mu_g, privacy::Mechanism& mechanism,
                             const std::string& label) {
  CheckNoise(sigma_z, mechanism);
  std::vector<double> cnt(resp.span, 0.0);
  if (mode == EmMode::kSoft) {
    for (size_t g = 0; g < resp.num_groups(); ++g) {
      auto row = resp.row(g);
      for (int64_t z = 0; z < resp.span; ++z) cnt[z] += row[z];
    }
  } else {
    for (int z : resp.hard) cnt[z] += 1.0;
  }
  if (sigma_z > 0.0) mechanism.Perturb(label, mu_g, sigma_z, cnt);
  ClampAndNormalize(cnt);
  return cnt;
}

std::vector<double> UpdatePSize(const Responsibilities& resp, const GroupIndex& groups,
                                int tau, EmMode mode, double sigma_size, double mu_g,
                                privacy::Mechanism& mechanism, const std::string& label) {
  CheckNoise(sigma_size, mechanism);
  if (groups.groups.size() != resp.num_groups()) {
    Fail(ErrorCode::kDimensionMismatch, "responsibilities do not match groups");
  }
  std::vector<double> cnt(static_cast<size_t>(resp.span) * tau, 0.0);
  for (size_t g = 0; g < resp.num_groups(); ++g) {
    const int size = static_cast<int>(groups.groups[g].members.size());
    if (size < 1 || size > tau) {
      Fail(ErrorCode::kInvalidArgument, "group size outside 1..tau");
    }
    if (mode == EmMode::kSoft) {
      auto row = resp.row(g);
      for (int64_t z = 0; z < resp.span; ++z) cnt[z * tau + size - 1] += row[z];
    } else {
      cnt[static_cast<size_t>(resp.hard[g]) * tau + size - 1] += 1.0;
    }
  }
  if (sigma_size > 0.0) mechanism.Perturb(label, mu_g, sigma_size, cnt);
  for (int64_t z = 0; z < resp.span; ++z) {
    ClampAndNormalize(std::span<double>(cnt.data() + z * tau, tau));
  }
  return cnt;
}

void MaterializeLatentTables(LatentFkModel& model, const EncodedRelation& child,
                             const GroupIndex& groups, const Responsibilities& resp,
                             EmMode mode, double sigma_latent, double mu_g,
                             privacy::Mechanism& mechanism, const std::string& label) {
  CheckNoise(sigma_latent, mechanism);
  const std::vector<double> weights = AssignmentWeights(resp, mode);
  const Domain& dom = model.model.domain();
  for (int s = 0; s < model.model.num_specs(); ++s) {
    const MarginalSpec& spec = model.model.specs()[s];
    if (!spec.is_latent(dom)) continue;
    MarginalTable t = ComputeLatentExpected(child, groups, dom, spec, weights);
    AddGaussianNoise(t, model.tau * mu_g, sigma_latent, mechanism,
                     label + "/" + spec.ToString());
    model.tables[s] = std::move(t);
  }
}

double QFunction(const LatentFkModel& model, const EncodedRelation& child,
                 const GroupIndex& groups, const Responsibilities& resp) {
  const TupleLikelihood tl = ComputeTupleLikelihood(model, child, 1);
  std::vector<double> lj(tl.span);
  double q = 0.0;
  for (size_t g = 0; g < groups.groups.size(); ++g) {
    GroupLogJoint(model, tl, groups.groups[g], lj);
    auto row = resp.row(g);
    for (int64_t z = 0; z < tl.span; ++z) {
      if (row[z] > 0.0) q += row[z] * lj[z];
    }
  }
  return q;
}

EmResult RunEm(LatentFkModel& model, const EncodedRelation& child, const GroupIndex& groups,
               int iterations, const privacy::FkNoise& noise, const EmSettings& settings,
               privacy::Mechanism& mechanism) {
  EmResult result;
  for (int it = 0; it < iterations; ++it) {
    EmIterationTrace trace;
    const std::string prefix = settings.label + "/iter" + std::to_string(it);
    Responsibilities resp = EStep(model, child, groups, settings.threads);
    trace.uniform_fallbacks = resp.uniform_fallbacks;
    if (settings.trace_q) trace.q_before = QFunction(model, child, groups, resp);
    model.p_z = UpdatePZ(resp, settings.mode, noise.sigma_z, settings.mu_g, mechanism,
                         prefix + "/p_z");
    model.p_size = UpdatePSize(resp, groups, model.tau, settings.mode, noise.sigma_size,
                               settings.mu_g, mechanism, prefix + "/p_size");
    if (settings.trace_q) trace.q_after = QFunction(model, child, groups, resp);
    MaterializeLatentTables(model, child, groups, resp, settings.mode, noise.sigma_latent,
                            settings.mu_g, mechanism, prefix + "/latent");
    trace.fit = FitTheta(model.model, model.model.theta(), model.Data(), model.n_tilde,
                         settings.fit);
    model.model.theta() = trace.fit.theta;
    result.iterations.push_back(std::move(trace));
  }
  result.resp = EStep(model, child, groups, settings.threads);
  return result;
}

}  // namespace fksynth
