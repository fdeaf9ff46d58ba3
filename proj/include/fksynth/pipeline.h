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

#ifndef FKSYNTH_PIPELINE_H_
#define FKSYNTH_PIPELINE_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fksynth/datastore.h"
#include "fksynth/model_select.h"
#include "fksynth/privacy.h"
#include "fksynth/schema.h"
#include "json.hpp"

namespace fksynth {

struct ModelConfig {
  double epsilon = 1.0;
  double delta = 0.0;  // <= 0 selects DefaultDelta()
  uint64_t seed = 0;
  SelectionConfig selection;
  // Exact reference run: no noise and no ledger. Never differentially private.
  bool noiseless = false;
};

// 1/n for the largest secondary private relation, or the primary relation
// when there is none.
double DefaultDelta(const Database& db);

struct FkComponent {
  int edge = -1;
  FkBuildResult build;
  // Positions of this key's latent columns in the parent's augmented columns.
  int parent_z1_column = -1;
  int parent_z2_column = -1;
};

struct StandaloneComponent {
  SingleRelationModel model;
  double sensitivity = 1.0;
};

struct ModelBundle {
  DatabaseSchema schema;
  privacy::NoisePlan plan;
  privacy::PrivacyLedger ledger;
  bool noiseless = false;
  // Columns of every relation after attachment, schema attributes first.
  std::vector<std::vector<AttributeDef>> augmented_attributes;
  std::map<int, FkComponent> fks;
  std::map<int, StandaloneComponent> standalone;
  // Public relations as loaded; synthesis reuses their tuples.
  std::map<int, EncodedRelation> public_relations;

  // Closed-form consumption of every component from its realized structure.
  double ClosedFormTotal() const;
  nlohmann::json Audit() const;
};

// D for each standalone model: tuple multiplier for private relations and
// sqrt(2) times the summed group multipliers of the keys into a public one.
double StandaloneSensitivity(const DatabaseSchema& schema, int relation);

// Noise plan for the database's private keys and standalone models.
privacy::NoisePlan PlanForDatabase(const Database& db, double epsilon, double delta,
                                   const privacy::BudgetConfig& config);

// Builds every private key model in ascending order, attaching latent
// columns to parents as it goes, then the standalone models. db must be
// truncated.
ModelBundle ModelDatabase(const Database& db, const ModelConfig& config);

nlohmann::json C2ParamsToJson(const privacy::C2Params& p);
privacy::C2Params C2ParamsFromJson(const nlohmann::json& j);
nlohmann::json SingleCountsToJson(const privacy::SingleRelationCounts& c);
privacy::SingleRelationCounts SingleCountsFromJson(const nlohmann::json& j);
privacy::SingleRelationNoise SingleNoiseFromJson(const nlohmann::json& j);

nlohmann::json FkModelToJson(const LatentFkModel& m);

// Writes ledger.json (entries plus audit), manifest.json and one
// checkpoint per model into dir.
void SaveBundle(const ModelBundle& bundle, const std::string& dir);

struct AuditComponent {
  std::string name;
  std::string prefix;
  double closed_form = 0.0;
  double empirical = 0.0;
};

struct AuditReport {
  double epsilon = 0.0;
  double delta = 0.0;
  double gamma_max = 0.0;
  double ledger_total = 0.0;
  double closed_form_total = 0.0;
  std::vector<AuditComponent> components;
  int64_t entries = 0;
};

// Recomputes empirical per-component totals from the ledger entries and the
// closed forms from the stored structural parameters.
AuditReport AuditLedgerJson(const nlohmann::json& ledger_file);
std::string FormatAudit(const AuditReport& report);

}  // namespace fksynth

#endif  // FKSYNTH_PIPELINE_H_
