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

#ifndef FKSYNTH_PRIVACY_H_
#define FKSYNTH_PRIVACY_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fksynth/rng.h"
#include "json.hpp"

namespace fksynth::privacy {

// Standard normal CDF via erfc; absolute error below 1e-15.
double StandardNormalCdf(double x);

// Left-hand side of the exact Gaussian-mechanism condition
//   Phi(g/2 - e/g) - exp(-e) * Phi(-g/2 - e/g)
// for total consumption g^2.
double AdmissibleDeltaLhs(double epsilon, double gamma);

bool DeltaAdmissible(double epsilon, double delta, double gamma);

// Largest gamma in [1e-9, 1e3] with DeltaAdmissible, by bisection to an
// absolute tolerance of 1e-9. The returned value is always admissible.
double GammaMax(double epsilon, double delta);

struct LedgerEntry {
  std::string label;
  double sensitivity = 0.0;
  double sigma = 1.0;
  int64_t count = 1;

  double consumption() const {
    const double r = sensitivity / sigma;
    return static_cast<double>(count) * r * r;
  }
};

// Ordered record of every Gaussian measurement. Appends follow a
// single-writer contract; total() is the running sum of count * (D/sigma)^2.
class PrivacyLedger {
 public:
  void Record(std::string label, double sensitivity, double sigma,
              int64_t count = 1);

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  double total() const { return total_; }
  // Sum over entries whose label starts with prefix.
  double TotalWithPrefix(std::string_view prefix) const;
  int64_t CountWithPrefix(std::string_view prefix) const;

  nlohmann::json ToJson() const;
  static PrivacyLedger FromJson(const nlohmann::json& j);

 private:
  std::vector<LedgerEntry> entries_;
  double total_ = 0.0;
};

// The only source of Gaussian noise in the library. Every perturbation first
// appends a ledger entry. A noiseless mechanism returns values untouched and
// records nothing; it exists for exact reference runs and is never DP.
class Mechanism {
 public:
  Mechanism(PrivacyLedger* ledger, RngStream rng);
  static Mechanism Noiseless();

  bool noiseless() const { return ledger_ == nullptr; }

  void Perturb(std::string_view label, double sensitivity, double sigma,
               std::span<double> values);
  double PerturbScalar(std::string_view label, double sensitivity,
                       double sigma, double value);

  int64_t measurements() const { return measurements_; }
  int64_t draws() const { return draws_; }
  const PrivacyLedger* ledger() const { return ledger_; }

 private:
  Mechanism() : rng_(0, "noiseless") {}

  PrivacyLedger* ledger_ = nullptr;
  RngStream rng_;
  int64_t measurements_ = 0;
  int64_t draws_ = 0;
};

// ---------------------------------------------------------------------------
// Closed-form consumption.

// EM over T iterations with m latent marginals:
//   T * mu_g^2 * (m tau^2 / s_l^2 + 1 / s_size^2 + 1 / s_z^2).
double ConsumptionC1(int iterations, int latent_marginals, double mu_g, int tau,
                     double sigma_latent, double sigma_size, double sigma_z);

struct SingleRelationNoise {
  double sigma_count = 1.0;
  double sigma_one_way = 1.0;
  double sigma_pair_score = 1.0;
  double sigma_two_way = 1.0;
};

struct SingleRelationCounts {
  int count_queries = 1;
  int one_way = 0;
  int pair_scores = 0;
  int two_way = 0;
};

// Planned query counts for a relation with d modeled attributes.
SingleRelationCounts PlannedSingleCounts(int d);

double ConsumptionSingle(double sensitivity, const SingleRelationNoise& noise,
                         const SingleRelationCounts& counts);

struct FkNoise {
  SingleRelationNoise line1;
  double sigma_z = 1.0;
  double sigma_size = 1.0;
  double sigma_latent = 1.0;
  double sigma_err = 1.0;
};

// Structural parameters of one latent FK model build.
struct C2Params {
  double mu_t = 1.0;  // sensitivity of tuple-level queries
  double mu_g = 1.0;
  int tau = 1;
  int em_iterations = 6;
  int seed_marginals = 0;  // 2d + 1
  // Latent-marginal count after each refinement round (one EM iteration each).
  std::vector<int> marginals_after_round;
  int64_t scored_candidates = 0;
  SingleRelationCounts line1;
  FkNoise noise;
};

// Consumption of the single-relation stage, the initial EM run, every
// refinement EM iteration and the candidate scoring, summed.
double ConsumptionC2(const C2Params& p);

// ---------------------------------------------------------------------------
// Budget planning.

struct BudgetConfig {
  int em_iterations = 6;   // T
  int rounds = 2;          // T_C
  int candidates = 400;    // n_C
  int increment = 0;       // n_inc; 0 selects max(1, ceil(d / 4))
  int max_candidate_obs_attrs = 3;
  double lambda = 20.0;
  double line1_share = 0.20;
  double em_share = 0.75;
  double score_share = 0.05;
  double latent_weight = 20.0;
  double size_weight = 4.0;
  double z_weight = 1.0;
  double single_count_share = 0.05;
  double single_one_way_share = 0.35;
  double single_score_share = 0.10;
  double single_two_way_share = 0.50;
};

int IncrementFor(const BudgetConfig& config, int d);

// Number of latent candidate specs for d observed attributes: every subset of
// 1..max_obs attributes paired with Z1, Z2 or both, minus the 2d seeds.
int64_t CandidatePoolSize(int d, int max_obs);

struct FkPlanInput {
  int edge = -1;
  int d = 0;  // modeled attributes of the child, attached latent columns included
  int tau = 1;
  double mu_t = 1.0;
  double mu_g = 1.0;
};

struct StandalonePlanInput {
  int relation = -1;
  int d = 0;
  double sensitivity = 1.0;
};

struct FkPlan {
  FkPlanInput input;
  FkNoise noise;
  C2Params planned;  // structural counts the noise scales were solved for
  int increment = 1;
  std::vector<int> scores_per_round;
  double budget = 0.0;
};

struct StandalonePlan {
  StandalonePlanInput input;
  SingleRelationNoise noise;
  SingleRelationCounts planned;
  double budget = 0.0;
};

struct NoisePlan {
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma_max = 0.0;
  BudgetConfig config;
  std::map<int, FkPlan> fks;                // by edge
  std::map<int, StandalonePlan> standalone;  // by relation

  double bound() const { return gamma_max * gamma_max; }
  double PlannedTotal() const;
};

// Divides gamma_max^2 equally over FK models and standalone models, then
// splits each share by the configured fractions and solves every sigma in
// closed form so the planned consumption meets the share exactly.
NoisePlan PlanNoise(double epsilon, double delta,
                    const std::vector<FkPlanInput>& fks,
                    const std::vector<StandalonePlanInput>& standalone,
                    const BudgetConfig& config);

// Planned C2 parameters for an FK input (used by PlanNoise and in audits).
C2Params PlannedC2(const FkPlanInput& input, const BudgetConfig& config);

nlohmann::json FkNoiseToJson(const FkNoise& noise);
nlohmann::json SingleNoiseToJson(const SingleRelationNoise& noise);

}  // namespace fksynth::privacy

#endif  // FKSYNTH_PRIVACY_H_
