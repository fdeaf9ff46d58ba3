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

#ifndef FKSYNTH_MODEL_SELECT_H_
#define FKSYNTH_MODEL_SELECT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fksynth/datastore.h"
#include "fksynth/graphical_model.h"
#include "fksynth/latent_em.h"
#include "fksynth/marginal.h"
#include "fksynth/privacy.h"
#include "fksynth/rng.h"
#include "json.hpp"

namespace fksynth {

struct SelectionConfig {
  privacy::BudgetConfig budget;  // T, T_C, n_C, n_inc, lambda, spec size bound
  EmMode mode = EmMode::kSoft;
  int threads = 1;
  FitOptions fit;
  double init_scale = 0.5;  // latent theta perturbation at initialization
  int max_latent_card = 10;
  int64_t clique_cap = kDefaultCliqueCap;
};

// Noisy measurements of one relation's observed columns: the row count,
// every one-way marginal and the selected two-way marginals.
struct ObservedMeasurements {
  double n_tilde = 1.0;  // noisy count, floored at 1
  std::vector<MarginalTable> tables;
  std::vector<MarginalSpec> pairs;
  privacy::SingleRelationCounts realized;
  nlohmann::json trace;
};

// One-way marginals, then pairs scored by the noisy L1 distance between
// their true table and the independence table implied by the measured
// one-ways. The lambda-useful pairs of a maximum-score spanning forest
// (at most d - 1) are measured.
ObservedMeasurements MeasureObserved(const EncodedRelation& rel, double sensitivity,
                                     const privacy::SingleRelationNoise& noise,
                                     const SelectionConfig& config,
                                     privacy::Mechanism& mechanism, const std::string& label);

struct SingleRelationModel {
  int relation = -1;
  GraphicalModel model;
  std::vector<MarginalTable> tables;
  double n_tilde = 1.0;
  privacy::SingleRelationCounts realized;
  nlohmann::json trace;
};

SingleRelationModel SelectSingleRelationModel(const EncodedRelation& rel, double sensitivity,
                                              const privacy::SingleRelationNoise& noise,
                                              const SelectionConfig& config,
                                              privacy::Mechanism& mechanism,
                                              const std::string& label);

// Largest k with n/k^2 and n/(k |A|) both at least lambda sqrt(2/pi) sigma,
// floored at 2 and capped at `cap`. sigma == 0 yields the cap.
int ChooseLatentDomain(double n_tilde, int largest_domain, double sigma_latent, double lambda,
                       int cap);

// Latent specs considered for refinement: every set of 1..max_obs observed
// variables joined with Z1, Z2 or both, in lexicographic order.
std::vector<MarginalSpec> LatentCandidateSpecs(const Domain& domain, int max_obs);

struct FkBuildResult {
  LatentFkModel model;
  Responsibilities resp;
  privacy::C2Params realized;
  std::vector<EmIterationTrace> em_trace;
  nlohmann::json trace;
};

// Builds the latent model of one private foreign key of db (whose child may
// already carry attached latent columns) under the given noise plan.
FkBuildResult BuildFkModel(const Database& db, int edge, const GroupIndex& groups,
                           const privacy::FkPlan& plan, const SelectionConfig& config,
                           privacy::Mechanism& mechanism, RngStream rng);

// Appends two columns of domain k + 1 to the parent holding each referenced
// tuple's hard (z1, z2); unreferenced tuples get the value k.
void AttachLatentToParent(EncodedRelation& parent, const GroupIndex& groups,
                          const std::vector<int>& hard, int k, const std::string& prefix);

}  // namespace fksynth

#endif  // FKSYNTH_MODEL_SELECT_H_
