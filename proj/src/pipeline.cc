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

#include "fksynth/pipeline.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fksynth/error.h"

namespace fksynth {
namespace {

std::string FkPrefix(const DatabaseSchema& s, int edge) { return "fk/" + s.EdgeName(edge); }
std::string SinglePrefix(const DatabaseSchema& s, int rel) {
  return "single/" + s.relation(rel).name;
}

// Incoming private keys add two latent columns each.
int ModeledWidth(const DatabaseSchema& schema, int relation) {
  int d = static_cast<int>(schema.relation(relation).attributes.size());
  for (const FkEdge& e : schema.edges()) {
    if (e.parent == relation && e.is_private) d += 2;
  }
  return d;
}

std::string LatentPrefix(const DatabaseSchema& schema, int edge) {
  return "__latent[" + schema.EdgeName(edge) + "].";
}

void WriteJson(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

}  // namespace

double DefaultDelta(const Database& db) {
  size_t n = 0;
  for (int r = 0; r < db.schema.num_relations(); ++r) {
    if (db.schema.relation(r).privacy_class == PrivacyClass::kSecondaryPrivate) {
      n = std::max(n, db.relations[r].num_rows());
    }
  }
  if (n == 0 && db.schema.primary_relation() >= 0) {
    n = db.relations[db.schema.primary_relation()].num_rows();
  }
  return 1.0 / static_cast<double>(std::max<size_t>(n, 1));
}

double StandaloneSensitivity(const DatabaseSchema& schema, int relation) {
  if (schema.relation(relation).is_private()) {
    return static_cast<double>(schema.TupleMultiplier(relation));
  }
  double groups = 0.0;
  for (int e = 0; e < static_cast<int>(schema.edges().size()); ++e) {
    const FkEdge& edge = schema.edge(e);
    if (edge.parent == relation && edge.is_private) {
      groups += static_cast<double>(schema.GroupMultiplier(e));
    }
  }
  return std::sqrt(2.0) * groups;
}

privacy::NoisePlan PlanForDatabase(const Database& db, double epsilon, double delta,
                                   const privacy::BudgetConfig& config) {
  const DatabaseSchema& s = db.schema;
  std::vector<privacy::FkPlanInput> fks;
  for (int edge : s.private_fk_order()) {
    const FkEdge& e = s.edge(edge);
    fks.push_back({edge, ModeledWidth(s, e.child), e.tau,
                   static_cast<double>(s.TupleMultiplier(e.child)),
                   static_cast<double>(s.GroupMultiplier(edge))});
  }
  std::vector<privacy::StandalonePlanInput> standalone;
  for (int r : s.StandaloneModelRelations()) {
    standalone.push_back({r, ModeledWidth(s, r), StandaloneSensitivity(s, r)});
  }
  return privacy::PlanNoise(epsilon, delta, fks, standalone, config);
}

ModelBundle ModelDatabase(const Database& input, const ModelConfig& config) {
  Database db = input;
  const DatabaseSchema& schema = db.schema;
  const double delta = config.delta > 0.0 ? config.delta : DefaultDelta(db);
  // A reference run still needs sigma values for the usefulness tests it
  // skips; any positive epsilon gives a well-formed plan.
  const double epsilon = config.noiseless && config.epsilon <= 0.0 ? 1.0 : config.epsilon;
  ModelBundle bundle{schema, PlanForDatabase(db, epsilon, delta, config.selection.budget),
                     {}, config.noiseless, {}, {}, {}, {}};
  privacy::Mechanism mechanism =
      config.noiseless ? privacy::Mechanism::Noiseless()
                       : privacy::Mechanism(&bundle.ledger, RngStream(config.seed, "noise"));

  for (int edge : schema.private_fk_order()) {
    const FkEdge& e = schema.edge(edge);
    const GroupIndex groups = BuildGroups(db, edge);
    FkBuildResult build = BuildFkModel(db, edge, groups, bundle.plan.fks.at(edge),
                                       config.selection, mechanism,
                                       RngStream(config.seed, "fk_model", edge));
    EncodedRelation& parent = db.relations[e.parent];
    const int col = parent.num_attrs();
    AttachLatentToParent(parent, groups, build.resp.hard, build.model.k,
                         LatentPrefix(schema, edge));
    bundle.fks.emplace(edge, FkComponent{edge, std::move(build), col, col + 1});
  }
  for (int r : schema.StandaloneModelRelations()) {
    const double sens = StandaloneSensitivity(schema, r);
    SingleRelationModel m =
        SelectSingleRelationModel(db.relations[r], sens, bundle.plan.standalone.at(r).noise,
                                  config.selection, mechanism, SinglePrefix(schema, r));
    bundle.standalone.emplace(r, StandaloneComponent{std::move(m), sens});
  }
  for (int r = 0; r < schema.num_relations(); ++r) {
    bundle.augmented_attributes.push_back(db.relations[r].attributes);
    if (!schema.relation(r).is_private()) bundle.public_relations.emplace(r, db.relations[r]);
  }
  return bundle;
}

double ModelBundle::ClosedFormTotal() const {
  double total = 0.0;
  if (noiseless) return total;
  for (const auto& [edge, fk] : fks) total += privacy::ConsumptionC2(fk.build.realized);
  for (const auto& [rel, sc] : standalone) {
    total += privacy::ConsumptionSingle(sc.sensitivity, plan.standalone.at(rel).noise,
                                        sc.model.realized);
  }
  return total;
}

nlohmann::json SingleCountsToJson(const privacy::SingleRelationCounts& c) {
  return {{"count_queries", c.count_queries},
          {"one_way", c.one_way},
          {"pair_scores", c.pair_scores},
          {"two_way", c.two_way}};
}

privacy::SingleRelationCounts SingleCountsFromJson(const nlohmann::json& j) {
  privacy::SingleRelationCounts c;
  c.count_queries = j.at("count_queries").get<int>();
  c.one_way = j.at("one_way").get<int>();
  c.pair_scores = j.at("pair_scores").get<int>();
  c.two_way = j.at("two_way").get<int>();
  return c;
}

privacy::SingleRelationNoise SingleNoiseFromJson(const nlohmann::json& j) {
  privacy::SingleRelationNoise n;
  n.sigma_count = j.at("sigma_count").get<double>();
  n.sigma_one_way = j.at("sigma_one_way").get<double>();
  n.sigma_pair_score = j.at("sigma_pair_score").get<double>();
  n.sigma_two_way = j.at("sigma_two_way").get<double>();
  return n;
}

nlohmann::json C2ParamsToJson(const privacy::C2Params& p) {
  return {{"mu_t", p.mu_t},
          {"mu_g", p.mu_g},
          {"tau", p.tau},
          {"em_iterations", p.em_iterations},
          {"seed_marginals", p.seed_marginals},
          {"marginals_after_round", p.marginals_after_round},
          {"scored_candidates", p.scored_candidates},
          {"line1", SingleCountsToJson(p.line1)},
          {"noise", privacy::FkNoiseToJson(p.noise)}};
}

privacy::C2Params C2ParamsFromJson(const nlohmann::json& j) {
  privacy::C2Params p;
  p.mu_t = j.at("mu_t").get<double>();
  p.mu_g = j.at("mu_g").get<double>();
  p.tau = j.at("tau").get<int>();
  p.em_iterations = j.at("em_iterations").get<int>();
  p.seed_marginals = j.at("seed_marginals").get<int>();
  p.marginals_after_round = j.at("marginals_after_round").get<std::vector<int>>();
  p.scored_candidates = j.at("scored_candidates").get<int64_t>();
  p.line1 = SingleCountsFromJson(j.at("line1"));
  const nlohmann::json& n = j.at("noise");
  p.noise.line1 = SingleNoiseFromJson(n.at("line1"));
  p.noise.sigma_z = n.at("sigma_z").get<double>();
  p.noise.sigma_size = n.at("sigma_size").get<double>();
  p.noise.sigma_latent = n.at("sigma_latent").get<double>();
  p.noise.sigma_err = n.at("sigma_err").get<double>();
  return p;
}

nlohmann::json ModelBundle::Audit() const {
  nlohmann::json j = ledger.ToJson();
  j["epsilon"] = plan.epsilon;
  j["delta"] = plan.delta;
  j["gamma_max"] = plan.gamma_max;
  j["bound"] = plan.bound();
  j["noiseless"] = noiseless;
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& [edge, fk] : fks) {
    comps.push_back({{"name", schema.EdgeName(edge)},
                     {"kind", "fk"},
                     {"prefix", FkPrefix(schema, edge) + "/"},
                     {"realized", C2ParamsToJson(fk.build.realized)},
                     {"planned", C2ParamsToJson(plan.fks.at(edge).planned)}});
  }
  for (const auto& [rel, sc] : standalone) {
    const privacy::StandalonePlan& sp = plan.standalone.at(rel);
    comps.push_back({{"name", schema.relation(rel).name},
                     {"kind", "single"},
                     {"prefix", SinglePrefix(schema, rel) + "/"},
                     {"sensitivity", sc.sensitivity},
                     {"noise", privacy::SingleNoiseToJson(sp.noise)},
                     {"realized", SingleCountsToJson(sc.model.realized)},
                     {"planned", SingleCountsToJson(sp.planned)}});
  }
  j["components"] = std::move(comps);
  return j;
}

AuditReport AuditLedgerJson(const nlohmann::json& file) {
  AuditReport report;
  try {
    const privacy::PrivacyLedger ledger = privacy::PrivacyLedger::FromJson(file);
    report.epsilon = file.at("epsilon").get<double>();
    report.delta = file.at("delta").get<double>();
    report.gamma_max = file.at("gamma_max").get<double>();
    report.ledger_total = ledger.total();
    report.entries = static_cast<int64_t>(ledger.entries().size());
    for (const nlohmann::json& c : file.at("components")) {
      AuditComponent ac;
      ac.name = c.at("name").get<std::string>();
      ac.prefix = c.at("prefix").get<std::string>();
      ac.empirical = ledger.TotalWithPrefix(ac.prefix);
      if (c.at("kind") == "fk") {
        ac.closed_form = privacy::ConsumptionC2(C2ParamsFromJson(c.at("realized")));
      } else {
        ac.closed_form = privacy::ConsumptionSingle(c.at("sensitivity").get<double>(),
                                                    SingleNoiseFromJson(c.at("noise")),
                                                    SingleCountsFromJson(c.at("realized")));
      }
      if (file.value("noiseless", false)) ac.closed_form = 0.0;
      report.closed_form_total += ac.closed_form;
      report.components.push_back(std::move(ac));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("ledger audit: ") + e.what());
  }
  return report;
}

std::string FormatAudit(const AuditReport& r) {
  std::ostringstream out;
  char buf[256];
  out << "epsilon " << r.epsilon << "\n";
  out << "delta " << r.delta << "\n";
  std::snprintf(buf, sizeof buf, "gamma_max %.12g (bound %.12g)\n", r.gamma_max,
                r.gamma_max * r.gamma_max);
  out << buf;
  std::snprintf(buf, sizeof buf, "%-40s %18s %18s\n", "component", "closed form", "ledger");
  out << buf;
  for (const AuditComponent& c : r.components) {
    std::snprintf(buf, sizeof buf, "%-40s %18.12g %18.12g\n", c.name.c_str(), c.closed_form,
                  c.empirical);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-40s %18.12g %18.12g\n", "total", r.closed_form_total,
                r.ledger_total);
  out << buf;
  out << "entries " << r.entries << "\n";
  const double bound = r.gamma_max * r.gamma_max;
  out << "within bound " << (r.ledger_total <= bound * (1.0 + 1e-12) ? "yes" : "no") << "\n";
  return out.str();
}

nlohmann::json FkModelToJson(const LatentFkModel& m) {
  nlohmann::json j;
  j["edge"] = m.edge;
  j["k"] = m.k;
  j["tau"] = m.tau;
  j["n_tilde"] = m.n_tilde;
  j["p_z"] = m.p_z;
  j["p_size"] = m.p_size;
  j["model"] = ModelToJson(m.model);
  return j;
}

void SaveBundle(const ModelBundle& bundle, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir);
  const fs::path root(dir);
  WriteJson(root / "ledger.json", bundle.Audit());
  nlohmann::json manifest;
  manifest["schema"] = SchemaToJson(bundle.schema);
  nlohmann::json aug = nlohmann::json::array();
  for (int r = 0; r < bundle.schema.num_relations(); ++r) {
    nlohmann::json cols = nlohmann::json::array();
    for (const AttributeDef& a : bundle.augmented_attributes[r]) {
      cols.push_back({{"name", a.name}, {"domain_size", a.domain_size}});
    }
    aug.push_back({{"relation", bundle.schema.relation(r).name}, {"columns", std::move(cols)}});
  }
  manifest["augmented"] = std::move(aug);
  manifest["models"] = nlohmann::json::array();
  for (const auto& [edge, fk] : bundle.fks) {
    const std::string file = "fk_" + std::to_string(edge) + ".json";
    nlohmann::json j = FkModelToJson(fk.build.model);
    j["trace"] = fk.build.trace;
    WriteJson(root / file, j);
    manifest["models"].push_back({{"kind", "fk"}, {"name", bundle.schema.EdgeName(edge)},
                                  {"file", file}});
  }
  for (const auto& [rel, sc] : bundle.standalone) {
    const std::string file = "single_" + bundle.schema.relation(rel).name + ".json";
    nlohmann::json j;
    j["n_tilde"] = sc.model.n_tilde;
    j["model"] = ModelToJson(sc.model.model);
    j["trace"] = sc.model.trace;
    WriteJson(root / file, j);
    manifest["models"].push_back({{"kind", "single"}, {"name", bundle.schema.relation(rel).name},
                                  {"file", file}});
  }
  WriteJson(root / "manifest.json", manifest);
}

}  // namespace fksynth
