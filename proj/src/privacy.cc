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

#include "fksynth/privacy.h"

#include <algorithm>
#include <cmath>

#include "fksynth/error.h"

namespace fksynth::privacy {

double StandardNormalCdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double AdmissibleDeltaLhs(double epsilon, double gamma) {
  return StandardNormalCdf(gamma / 2.0 - epsilon / gamma) -
         std::exp(-epsilon) * StandardNormalCdf(-gamma / 2.0 - epsilon / gamma);
}

bool DeltaAdmissible(double epsilon, double delta, double gamma) {
  if (gamma <= 0.0) return true;
  return AdmissibleDeltaLhs(epsilon, gamma) <= delta;
}

double GammaMax(double epsilon, double delta) {
  if (!(epsilon > 0.0) || !(delta > 0.0) || !(delta < 1.0)) {
    Fail(ErrorCode::kInvalidArgument, "GammaMax needs epsilon > 0, 0 < delta < 1");
  }
  double lo = 1e-9;
  double hi = 1e3;
  if (DeltaAdmissible(epsilon, delta, hi)) return hi;
  if (!DeltaAdmissible(epsilon, delta, lo)) return lo;
  while (hi - lo > 1e-9) {
    const double mid = 0.5 * (lo + hi);
    if (DeltaAdmissible(epsilon, delta, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

void PrivacyLedger::Record(std::string label, double sensitivity, double sigma,
                           int64_t count) {
  if (!(sensitivity >= 0.0) || !(sigma > 0.0) || count < 0) {
    Fail(ErrorCode::kInvalidArgument,
         "ledger entry '" + label + "' needs sensitivity >= 0 and sigma > 0");
  }
  entries_.push_back({std::move(label), sensitivity, sigma, count});
  total_ += entries_.back().consumption();
}

double PrivacyLedger::TotalWithPrefix(std::string_view prefix) const {
  double t = 0.0;
  for (const LedgerEntry& e : entries_) {
    if (std::string_view(e.label).substr(0, prefix.size()) == prefix) {
      t += e.consumption();
    }
  }
  return t;
}

int64_t PrivacyLedger::CountWithPrefix(std::string_view prefix) const {
  int64_t t = 0;
  for (const LedgerEntry& e : entries_) {
    if (std::string_view(e.label).substr(0, prefix.size()) == prefix) t += e.count;
  }
  return t;
}

nlohmann::json PrivacyLedger::ToJson() const {
  nlohmann::json entries = nlohmann::json::array();
  double cumulative = 0.0;
  for (const LedgerEntry& e : entries_) {
    cumulative += e.consumption();
    entries.push_back({{"label", e.label},
                       {"sensitivity", e.sensitivity},
                       {"sigma", e.sigma},
                       {"count", e.count},
                       {"consumption", e.consumption()},
                       {"cumulative", cumulative}});
  }
  return {{"entries", std::move(entries)}, {"total", total_}};
}

PrivacyLedger PrivacyLedger::FromJson(const nlohmann::json& j) {
  PrivacyLedger ledger;
  try {
    for (const auto& e : j.at("entries")) {
      ledger.Record(e.at("label").get<std::string>(),
                    e.at("sensitivity").get<double>(), e.at("sigma").get<double>(),
                    e.at("count").get<int64_t>());
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("ledger: ") + e.what());
  }
  return ledger;
}

Mechanism::Mechanism(PrivacyLedger* ledger, RngStream rng)
    : ledger_(ledger), rng_(std::move(rng)) {
  if (ledger_ == nullptr) {
    Fail(ErrorCode::kInvalidArgument, "mechanism needs a ledger");
  }
}

Mechanism Mechanism::Noiseless() { return Mechanism(); }

void Mechanism::Perturb(std::string_view label, double sensitivity,
                        double sigma, std::span<double> values) {
  ++measurements_;
  if (noiseless()) return;
  ledger_->Record(std::string(label), sensitivity, sigma, 1);
  RngStream stream = rng_.Derive(label, static_cast<uint64_t>(measurements_));
  for (double& v : values) v += stream.Normal(sigma);
  draws_ += static_cast<int64_t>(values.size());
}

double Mechanism::PerturbScalar(std::string_view label, double sensitivity,
                                double sigma, double value) {
  Perturb(label, sensitivity, sigma, std::span<double>(&value, 1));
  return value;
}

double ConsumptionC1(int iterations, int latent_marginals, double mu_g, int tau,
                     double sigma_latent, double sigma_size, double sigma_z) {
  const double t2 = static_cast<double>(tau) * tau;
  return iterations * mu_g * mu_g *
         (latent_marginals * t2 / (sigma_latent * sigma_latent) +
          1.0 / (sigma_size * sigma_size) + 1.0 / (sigma_z * sigma_z));
}

SingleRelationCounts PlannedSingleCounts(int d) {
  SingleRelationCounts c;
  c.count_queries = 1;
  c.one_way = d;
  c.pair_scores = d * (d - 1) / 2;
  c.two_way = std::max(d - 1, 0);
  return c;
}

double ConsumptionSingle(double sensitivity, const SingleRelationNoise& noise,
                         const SingleRelationCounts& counts) {
  auto term = [](int q, double sigma) { return q > 0 ? q / (sigma * sigma) : 0.0; };
  return sensitivity * sensitivity *
         (term(counts.count_queries, noise.sigma_count) +
          term(counts.one_way, noise.sigma_one_way) +
          term(counts.pair_scores, noise.sigma_pair_score) +
          term(counts.two_way, noise.sigma_two_way));
}

double ConsumptionC2(const C2Params& p) {
  const FkNoise& n = p.noise;
  double total = ConsumptionSingle(p.mu_t, n.line1, p.line1);
  if (p.em_iterations > 0) {
    total += ConsumptionC1(p.em_iterations, p.seed_marginals, p.mu_g, p.tau,
                           n.sigma_latent, n.sigma_size, n.sigma_z);
  }
  for (int m : p.marginals_after_round) {
    total += ConsumptionC1(1, m, p.mu_g, p.tau, n.sigma_latent, n.sigma_size,
                           n.sigma_z);
  }
  if (p.scored_candidates > 0) {
    total += p.mu_t * p.mu_t * static_cast<double>(p.scored_candidates) /
             (n.sigma_err * n.sigma_err);
  }
  return total;
}

int IncrementFor(const BudgetConfig& config, int d) {
  if (config.increment > 0) return config.increment;
  return std::max(1, (d + 3) / 4);
}

int64_t CandidatePoolSize(int d, int max_obs) {
  int64_t subsets = 0;
  int64_t binom = 1;
  for (int s = 1; s <= std::min(d, max_obs); ++s) {
    binom = binom * (d - s + 1) / s;
    subsets += binom;
  }
  return 3 * subsets - 2 * static_cast<int64_t>(d);
}

namespace {

// sigma such that q queries of sensitivity D consume exactly budget.
double SolveSigma(double sensitivity, double queries, double budget) {
  return sensitivity * std::sqrt(queries / budget);
}

SingleRelationNoise PlanSingle(double sensitivity, const SingleRelationCounts& c,
                               double budget, const BudgetConfig& cfg) {
  double w_count = c.count_queries > 0 ? cfg.single_count_share : 0.0;
  double w_one = c.one_way > 0 ? cfg.single_one_way_share : 0.0;
  double w_score = c.pair_scores > 0 ? cfg.single_score_share : 0.0;
  double w_two = c.two_way > 0 ? cfg.single_two_way_share : 0.0;
  const double w = w_count + w_one + w_score + w_two;
  SingleRelationNoise n;
  if (w_count > 0) n.sigma_count = SolveSigma(sensitivity, c.count_queries, budget * w_count / w);
  if (w_one > 0) n.sigma_one_way = SolveSigma(sensitivity, c.one_way, budget * w_one / w);
  if (w_score > 0) n.sigma_pair_score = SolveSigma(sensitivity, c.pair_scores, budget * w_score / w);
  if (w_two > 0) n.sigma_two_way = SolveSigma(sensitivity, c.two_way, budget * w_two / w);
  return n;
}

}  // namespace

C2Params PlannedC2(const FkPlanInput& input, const BudgetConfig& config) {
  C2Params p;
  p.mu_t = input.mu_t;
  p.mu_g = input.mu_g;
  p.tau = input.tau;
  p.em_iterations = config.em_iterations;
  p.seed_marginals = 2 * input.d + 1;
  p.line1 = PlannedSingleCounts(input.d);
  const int inc = IncrementFor(config, input.d);
  int64_t pool = CandidatePoolSize(input.d, config.max_candidate_obs_attrs);
  int m = p.seed_marginals;
  for (int round = 0; round < config.rounds; ++round) {
    const int64_t scored = std::min<int64_t>(config.candidates, pool);
    const int64_t inserted = std::min<int64_t>(inc, scored);
    p.scored_candidates += scored;
    pool -= inserted;
    m += static_cast<int>(inserted);
    p.marginals_after_round.push_back(m);
  }
  return p;
}

NoisePlan PlanNoise(double epsilon, double delta,
                    const std::vector<FkPlanInput>& fks,
                    const std::vector<StandalonePlanInput>& standalone,
                    const BudgetConfig& config) {
  NoisePlan plan;
  plan.epsilon = epsilon;
  plan.delta = delta;
  plan.config = config;
  plan.gamma_max = GammaMax(epsilon, delta);
  const size_t parts = fks.size() + standalone.size();
  if (parts == 0) return plan;
  const double share = plan.bound() / static_cast<double>(parts);

  for (const FkPlanInput& in : fks) {
    FkPlan fp;
    fp.input = in;
    fp.budget = share;
    fp.increment = IncrementFor(config, in.d);
    fp.planned = PlannedC2(in, config);
    int64_t pool = CandidatePoolSize(in.d, config.max_candidate_obs_attrs);
    for (int round = 0; round < config.rounds; ++round) {
      const int64_t scored = std::min<int64_t>(config.candidates, pool);
      fp.scores_per_round.push_back(static_cast<int>(scored));
      pool -= std::min<int64_t>(fp.increment, scored);
    }
    const C2Params& c = fp.planned;
    int64_t latent_measurements = static_cast<int64_t>(c.em_iterations) * c.seed_marginals;
    for (int m : c.marginals_after_round) latent_measurements += m;
    const int em_iters = c.em_iterations + static_cast<int>(c.marginals_after_round.size());

    double w_line1 = config.line1_share;
    double w_em = em_iters > 0 ? config.em_share : 0.0;
    double w_score = c.scored_candidates > 0 ? config.score_share : 0.0;
    const double w = w_line1 + w_em + w_score;

    fp.noise.line1 = PlanSingle(in.mu_t, c.line1, share * w_line1 / w, config);
    if (w_em > 0) {
      const double em_budget = share * w_em / w;
      const double wsum = config.latent_weight + config.size_weight + config.z_weight;
      fp.noise.sigma_latent =
          SolveSigma(in.tau * in.mu_g, static_cast<double>(latent_measurements),
                     em_budget * config.latent_weight / wsum);
      fp.noise.sigma_size =
          SolveSigma(in.mu_g, em_iters, em_budget * config.size_weight / wsum);
      fp.noise.sigma_z =
          SolveSigma(in.mu_g, em_iters, em_budget * config.z_weight / wsum);
    }
    if (w_score > 0) {
      fp.noise.sigma_err = SolveSigma(in.mu_t, static_cast<double>(c.scored_candidates),
                                      share * w_score / w);
    }
    fp.planned.noise = fp.noise;
    plan.fks.emplace(in.edge, std::move(fp));
  }
  for (const StandalonePlanInput& in : standalone) {
    StandalonePlan sp;
    sp.input = in;
    sp.budget = share;
    sp.planned = PlannedSingleCounts(in.d);
    sp.noise = PlanSingle(in.sensitivity, sp.planned, share, config);
    plan.standalone.emplace(in.relation, std::move(sp));
  }
  return plan;
}

double NoisePlan::PlannedTotal() const {
  double total = 0.0;
  for (const auto& [edge, fp] : fks) total += ConsumptionC2(fp.planned);
  for (const auto& [rel, sp] : standalone) {
    total += ConsumptionSingle(sp.input.sensitivity, sp.noise, sp.planned);
  }
  return total;
}

nlohmann::json SingleNoiseToJson(const SingleRelationNoise& n) {
  return {{"sigma_count", n.sigma_count},
          {"sigma_one_way", n.sigma_one_way},
          {"sigma_pair_score", n.sigma_pair_score},
          {"sigma_two_way", n.sigma_two_way}};
}

nlohmann::json FkNoiseToJson(const FkNoise& n) {
  return {{"line1", SingleNoiseToJson(n.line1)},
          {"sigma_z", n.sigma_z},
          {"sigma_size", n.sigma_size},
          {"sigma_latent", n.sigma_latent},
          {"sigma_err", n.sigma_err}};
}

}  // namespace fksynth::privacy
