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

#include "fksynth/model_select.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <utility>

#include "fksynth/error.h"
#include "fksynth/junction_tree.h"

namespace fksynth {
namespace {

double Effective(double sigma, const privacy::Mechanism& mech) {
  return mech.noiseless() ? 0.0 : sigma;
}

std::vector<double> ClampedDistribution(const std::vector<double>& counts) {
  std::vector<double> p(counts.size());
  double total = 0.0;
  for (size_t i = 0; i < counts.size(); ++i) {
    p[i] = std::max(0.0, counts[i]);
    total += p[i];
  }
  for (double& x : p) x = total > 0.0 ? x / total : 1.0 / static_cast<double>(p.size());
  return p;
}

nlohmann::json SpecJson(const MarginalSpec& s) { return s.vars; }

// Every combination of `size` elements of [0, n) in lexicographic order.
void Combinations(int n, int size, std::vector<std::vector<int>>& out) {
  std::vector<int> c(size);
  for (int i = 0; i < size; ++i) c[i] = i;
  while (true) {
    out.push_back(c);
    int i = size - 1;
    while (i >= 0 && c[i] == n - size + i) --i;
    if (i < 0) return;
    ++c[i];
    for (int j = i + 1; j < size; ++j) c[j] = c[j - 1] + 1;
  }
}

}  // namespace

ObservedMeasurements MeasureObserved(const EncodedRelation& rel, double sensitivity,
                                     const privacy::SingleRelationNoise& noise,
                                     const SelectionConfig& config,
                                     privacy::Mechanism& mechanism, const std::string& label) {
  ObservedMeasurements out;
  const Domain domain = Domain::ForRelation(rel, 0, 1);
  const int d = domain.num_observed;
  const double lambda = config.budget.lambda;

  double n = static_cast<double>(rel.num_rows());
  if (!mechanism.noiseless()) {
    n = mechanism.PerturbScalar(label + "/count", sensitivity, noise.sigma_count, n);
  }
  out.n_tilde = std::max(1.0, n);
  out.realized.count_queries = 1;
  out.trace["n_tilde"] = out.n_tilde;

  std::vector<std::vector<double>> one_way(d);
  for (int a = 0; a < d; ++a) {
    MarginalTable t = ComputeObserved(rel, domain, MarginalSpec({a}));
    AddGaussianNoise(t, sensitivity, Effective(noise.sigma_one_way, mechanism), mechanism,
                     label + "/one_way/" + t.spec.ToString());
    one_way[a] = ClampedDistribution(t.counts);
    out.tables.push_back(std::move(t));
  }
  out.realized.one_way = d;

  struct Scored {
    MarginalSpec spec;
    double score;
  };
  std::vector<Scored> scored;
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      MarginalSpec spec({a, b});
      MarginalTable truth = ComputeObserved(rel, domain, spec);
      const int cb = domain.card[b];
      double l1 = 0.0;
      for (int i = 0; i < domain.card[a]; ++i) {
        for (int j = 0; j < cb; ++j) {
          l1 += std::abs(truth.counts[i * cb + j] - out.n_tilde * one_way[a][i] * one_way[b][j]);
        }
      }
      if (!mechanism.noiseless()) {
        l1 = mechanism.PerturbScalar(label + "/pair_score/" + spec.ToString(), sensitivity,
                                     noise.sigma_pair_score, l1);
      }
      scored.push_back({spec, l1});
    }
  }
  out.realized.pair_scores = static_cast<int>(scored.size());
  std::stable_sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
    if (x.score != y.score) return x.score > y.score;
    return x.spec < y.spec;
  });
  // Kruskal on the noisy scores: a spanning forest of lambda-useful pairs.
  std::vector<int> component(d);
  for (int a = 0; a < d; ++a) component[a] = a;
  auto find = [&](int a) {
    while (component[a] != a) a = component[a] = component[component[a]];
    return a;
  };
  const double sigma_two = Effective(noise.sigma_two_way, mechanism);
  nlohmann::json pair_trace = nlohmann::json::array();
  for (const Scored& s : scored) {
    const bool useful = LambdaUseful(domain.SpanSize(s.spec.vars), out.n_tilde, sigma_two, lambda);
    const int ra = find(s.spec.vars[0]);
    const int rb = find(s.spec.vars[1]);
    const bool take = useful && ra != rb;
    pair_trace.push_back({{"spec", SpecJson(s.spec)}, {"score", s.score},
                          {"useful", useful}, {"selected", take}});
    if (take) {
      component[ra] = rb;
      out.pairs.push_back(s.spec);
    }
  }
  out.trace["pairs"] = std::move(pair_trace);
  for (const MarginalSpec& spec : out.pairs) {
    MarginalTable t = ComputeObserved(rel, domain, spec);
    AddGaussianNoise(t, sensitivity, sigma_two, mechanism, label + "/two_way/" + spec.ToString());
    out.tables.push_back(std::move(t));
  }
  out.realized.two_way = static_cast<int>(out.pairs.size());
  return out;
}

SingleRelationModel SelectSingleRelationModel(const EncodedRelation& rel, double sensitivity,
                                              const privacy::SingleRelationNoise& noise,
                                              const SelectionConfig& config,
                                              privacy::Mechanism& mechanism,
                                              const std::string& label) {
  ObservedMeasurements m = MeasureObserved(rel, sensitivity, noise, config, mechanism, label);
  std::vector<MarginalSpec> specs;
  std::vector<double> data;
  for (const MarginalTable& t : m.tables) {
    specs.push_back(t.spec);
    data.insert(data.end(), t.counts.begin(), t.counts.end());
  }
  GraphicalModel model(Domain::ForRelation(rel, 0, 1), specs, config.clique_cap);
  FitResult fit = FitTheta(model, model.theta(), data, m.n_tilde, config.fit);
  model.theta() = std::move(fit.theta);
  m.trace["fit_steps"] = fit.steps;
  m.trace["fit_converged"] = fit.converged;
  return SingleRelationModel{rel.relation, std::move(model), std::move(m.tables), m.n_tilde,
                             m.realized, std::move(m.trace)};
}

int ChooseLatentDomain(double n_tilde, int largest_domain, double sigma_latent, double lambda,
                       int cap) {
  if (cap < 1) Fail(ErrorCode::kInvalidArgument, "latent domain cap must be >= 1");
  if (sigma_latent <= 0.0) return cap;
  const double thr = lambda * std::sqrt(2.0 / std::numbers::pi) * sigma_latent;
  const double k1 = std::floor(std::sqrt(n_tilde / thr));
  const double k2 = std::floor(n_tilde / (std::max(largest_domain, 1) * thr));
  const double k = std::max(2.0, std::min(k1, k2));
  return static_cast<int>(std::min<double>(k, cap));
}

std::vector<MarginalSpec> LatentCandidateSpecs(const Domain& domain, int max_obs) {
  const int d = domain.num_observed;
  const int z1 = d;
  const int z2 = d + 1;
  std::vector<MarginalSpec> out;
  for (int size = 1; size <= std::min(d, max_obs); ++size) {
    std::vector<std::vector<int>> combos;
    Combinations(d, size, combos);
    for (const std::vector<int>& c : combos) {
      for (int variant = 0; variant < 3; ++variant) {
        std::vector<int> vars = c;
        if (variant != 1) vars.push_back(z1);
        if (variant != 0) vars.push_back(z2);
        out.emplace_back(std::move(vars));
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

FkBuildResult BuildFkModel(const Database& db, int edge, const GroupIndex& groups,
                           const privacy::FkPlan& plan, const SelectionConfig& config,
                           privacy::Mechanism& mechanism, RngStream rng) {
  const FkEdge& e = db.schema.edge(edge);
  const EncodedRelation& child = db.relations[e.child];
  const privacy::BudgetConfig& bc = config.budget;
  const std::string label = "fk/" + db.schema.EdgeName(edge);
  const double mu_t = plan.input.mu_t;
  const double mu_g = plan.input.mu_g;
  const int d = child.num_attrs();

  ObservedMeasurements obs =
      MeasureObserved(child, mu_t, plan.noise.line1, config, mechanism, label + "/line1");
  const double sigma_l = Effective(plan.noise.sigma_latent, mechanism);
  int largest = 1;
  for (int c : child.DomainSizes()) largest = std::max(largest, c);
  const int k = ChooseLatentDomain(obs.n_tilde, largest, sigma_l, bc.lambda,
                                   config.max_latent_card);

  std::vector<MarginalTable> tables = obs.tables;
  const int z1 = d;
  const int z2 = d + 1;
  for (int a = 0; a < d; ++a) {
    tables.push_back({MarginalSpec({a, z1}), {}, 0.0, false});
    tables.push_back({MarginalSpec({a, z2}), {}, 0.0, false});
  }
  tables.push_back({MarginalSpec({z1, z2}), {}, 0.0, false});

  LatentFkModel model = InitializeLatentModel(child, edge, k, e.tau, std::move(tables),
                                              obs.n_tilde, config.init_scale,
                                              rng.Derive("init"), config.clique_cap);
  EmSettings em;
  em.mode = config.mode;
  em.mu_g = mu_g;
  em.threads = config.threads;
  em.fit = config.fit;
  em.label = label + "/em";
  EmResult res = RunEm(model, child, groups, bc.em_iterations, plan.noise, em, mechanism);
  std::vector<EmIterationTrace> em_trace = std::move(res.iterations);

  privacy::C2Params realized;
  realized.mu_t = mu_t;
  realized.mu_g = mu_g;
  realized.tau = e.tau;
  realized.em_iterations = bc.em_iterations;
  realized.seed_marginals = 2 * d + 1;
  realized.line1 = obs.realized;
  realized.noise = plan.noise;

  nlohmann::json trace;
  trace["edge"] = db.schema.EdgeName(edge);
  trace["k"] = k;
  trace["observed"] = obs.trace;
  trace["rounds"] = nlohmann::json::array();

  const int increment = privacy::IncrementFor(bc, d);
  const std::vector<MarginalSpec> all_candidates =
      LatentCandidateSpecs(model.model.domain(), bc.max_candidate_obs_attrs);
  const double sigma_err = plan.noise.sigma_err;
  RngStream round_rng = rng.Derive("candidates");
  for (int round = 0; round < bc.rounds; ++round) {
    nlohmann::json rt;
    rt["round"] = round;
    const Domain& dom = model.model.domain();
    std::vector<MarginalSpec> pool;
    for (const MarginalSpec& s : all_candidates) {
      if (model.model.FindSpec(s) >= 0) continue;
      if (!LambdaUseful(dom.SpanSize(s.vars), model.n_tilde, sigma_l, bc.lambda)) continue;
      std::vector<MarginalSpec> with = model.model.specs();
      with.push_back(s);
      if (MaxCliqueSpan(dom, with) > model.model.clique_cap()) continue;
      pool.push_back(s);
    }
    if (pool.empty()) {
      rt["skipped"] = "NoUsefulCandidates";
      trace["rounds"].push_back(std::move(rt));
      continue;
    }
    // Partial Fisher-Yates draw of n_C specs without replacement.
    const size_t take = std::min<size_t>(pool.size(), static_cast<size_t>(bc.candidates));
    for (size_t i = 0; i < take; ++i) {
      const size_t j = i + round_rng.UniformInt(pool.size() - i);
      std::swap(pool[i], pool[j]);
    }
    pool.resize(take);

    const Calibration cal = model.model.Calibrate(model.model.theta());
    std::map<MarginalSpec, double> distance;  // by observed part
    struct Scored {
      MarginalSpec spec;
      double err;
    };
    std::vector<Scored> scored;
    for (const MarginalSpec& s : pool) {
      const MarginalSpec o = s.ObservedPart(dom);
      auto it = distance.find(o);
      if (it == distance.end()) {
        const MarginalTable truth = ComputeObserved(child, dom, o);
        const Factor f = model.model.QueryLogMarginal(cal, o.vars);
        double l1 = 0.0;
        for (size_t c = 0; c < truth.counts.size(); ++c) {
          l1 += std::abs(truth.counts[c] - model.n_tilde * std::exp(f.values[c]));
        }
        it = distance.emplace(o, l1).first;
      }
      double err = it->second;
      if (!mechanism.noiseless()) {
        err = mechanism.PerturbScalar(label + "/round" + std::to_string(round) + "/score/" +
                                          s.ToString(),
                                      mu_t, sigma_err, err);
      }
      scored.push_back({s, err});
    }
    realized.scored_candidates += static_cast<int64_t>(scored.size());
    std::sort(scored.begin(), scored.end(), [](const Scored& x, const Scored& y) {
      if (x.err != y.err) return x.err > y.err;
      return x.spec < y.spec;
    });
    nlohmann::json inserted = nlohmann::json::array();
    const size_t ninc = std::min<size_t>(scored.size(), static_cast<size_t>(increment));
    for (size_t i = 0; i < ninc; ++i) {
      const int idx = model.model.AddSpec(scored[i].spec);
      if (idx == static_cast<int>(model.tables.size())) {
        model.tables.push_back({scored[i].spec, {}, 0.0, false});
      }
      inserted.push_back({{"spec", SpecJson(scored[i].spec)}, {"score", scored[i].err}});
    }
    rt["scored"] = scored.size();
    rt["inserted"] = std::move(inserted);
    res = RunEm(model, child, groups, 1, plan.noise,
                [&] {
                  EmSettings s = em;
                  s.label = label + "/round" + std::to_string(round) + "/em";
                  return s;
                }(),
                mechanism);
    for (EmIterationTrace& t : res.iterations) em_trace.push_back(std::move(t));
    realized.marginals_after_round.push_back(model.NumLatentSpecs());
    trace["rounds"].push_back(std::move(rt));
  }
  trace["latent_specs"] = nlohmann::json::array();
  for (const MarginalSpec& s : model.model.specs()) {
    if (s.is_latent(model.model.domain())) trace["latent_specs"].push_back(SpecJson(s));
  }
  trace["uniform_fallbacks"] = res.resp.uniform_fallbacks;
  return FkBuildResult{std::move(model), std::move(res.resp), std::move(realized),
                       std::move(em_trace), std::move(trace)};
}

void AttachLatentToParent(EncodedRelation& parent, const GroupIndex& groups,
                          const std::vector<int>& hard, int k, const std::string& prefix) {
  if (hard.size() != groups.groups.size()) {
    Fail(ErrorCode::kDimensionMismatch, "assignments do not match groups");
  }
  const size_t old_width = parent.attributes.size();
  const size_t width = old_width + 2;
  std::vector<int32_t> codes(parent.num_rows() * width);
  for (size_t r = 0; r < parent.num_rows(); ++r) {
    std::copy_n(parent.codes.begin() + r * old_width, old_width, codes.begin() + r * width);
    codes[r * width + old_width] = k;
    codes[r * width + old_width + 1] = k;
  }
  for (size_t g = 0; g < groups.groups.size(); ++g) {
    const size_t r = static_cast<size_t>(groups.groups[g].parent_row);
    codes[r * width + old_width] = hard[g] / k;
    codes[r * width + old_width + 1] = hard[g] % k;
  }
  parent.codes = std::move(codes);
  parent.attributes.push_back({prefix + "Z1", k + 1, {}});
  parent.attributes.push_back({prefix + "Z2", k + 1, {}});
}

}  // namespace fksynth
