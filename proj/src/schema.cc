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

#include "fksynth/schema.h"

#include <fstream>
#include <functional>
#include <set>
#include <tuple>
#include <unordered_set>

#include "fksynth/error.h"

namespace fksynth {

const char* PrivacyClassName(PrivacyClass c) {
  switch (c) {
    case PrivacyClass::kPrimaryPrivate: return "primary_private";
    case PrivacyClass::kSecondaryPrivate: return "secondary_private";
    case PrivacyClass::kPublic: return "public";
  }
  return "public";
}

namespace {

void CheckRelationShape(const RelationSchema& r) {
  if (r.name.empty()) Fail(ErrorCode::kInvalidSchema, "relation without name");
  if (r.primary_key.empty()) {
    Fail(ErrorCode::kInvalidSchema, r.name + ": missing primary key column");
  }
  std::unordered_set<std::string> columns = {r.primary_key};
  for (const AttributeDef& a : r.attributes) {
    if (a.domain_size < 1) {
      Fail(ErrorCode::kInvalidSchema, r.name + "." + a.name + ": domain_size < 1");
    }
    if (!a.value_labels.empty()) {
      if (static_cast<int>(a.value_labels.size()) != a.domain_size) {
        Fail(ErrorCode::kInvalidSchema,
             r.name + "." + a.name + ": label count differs from domain_size");
      }
      std::unordered_set<std::string> seen(a.value_labels.begin(),
                                           a.value_labels.end());
      if (seen.size() != a.value_labels.size()) {
        Fail(ErrorCode::kInvalidSchema, r.name + "." + a.name + ": duplicate labels");
      }
    }
    if (!columns.insert(a.name).second) {
      Fail(ErrorCode::kInvalidSchema, r.name + ": duplicate column " + a.name);
    }
  }
  for (const ForeignKeyDef& fk : r.foreign_keys) {
    if (fk.max_multiplicity < 1) {
      Fail(ErrorCode::kInvalidSchema, r.name + "." + fk.column + ": tau < 1");
    }
    if (fk.parent_relation == r.name) {
      Fail(ErrorCode::kInvalidSchema, r.name + ": foreign key refers to itself");
    }
    if (!columns.insert(fk.column).second) {
      Fail(ErrorCode::kInvalidSchema,
           r.name + ": foreign key column collides with " + fk.column);
    }
  }
}

}  // namespace

DatabaseSchema DatabaseSchema::Validate(std::vector<RelationSchema> relations) {
  DatabaseSchema s;
  s.relations_ = std::move(relations);
  const int n = s.num_relations();

  std::unordered_set<std::string> names;
  for (const RelationSchema& r : s.relations_) {
    CheckRelationShape(r);
    if (!names.insert(r.name).second) {
      Fail(ErrorCode::kInvalidSchema, "duplicate relation " + r.name);
    }
  }
  for (int i = 0; i < n; ++i) {
    if (s.relations_[i].privacy_class != PrivacyClass::kPrimaryPrivate) continue;
    if (s.primary_ != -1) {
      Fail(ErrorCode::kMultiplePrimaryPrivate,
           "both " + s.relations_[s.primary_].name + " and " +
               s.relations_[i].name + " are primary_private");
    }
    s.primary_ = i;
  }
  if (s.primary_ == -1) {
    Fail(ErrorCode::kInvalidSchema, "no primary_private relation");
  }

  for (int c = 0; c < n; ++c) {
    const RelationSchema& r = s.relations_[c];
    for (int slot = 0; slot < static_cast<int>(r.foreign_keys.size()); ++slot) {
      const ForeignKeyDef& fk = r.foreign_keys[slot];
      const int p = s.RelationIndex(fk.parent_relation);
      if (p < 0) {
        Fail(ErrorCode::kDanglingFKTarget,
             r.name + "." + fk.column + " refers to unknown relation " +
                 fk.parent_relation);
      }
      s.edges_.push_back({c, p, slot, fk.max_multiplicity, r.is_private()});
    }
  }

  // Relation-level cycle check, iterative three-colour DFS.
  std::vector<std::vector<int>> out(n);
  for (const FkEdge& e : s.edges_) out[e.child].push_back(e.parent);
  std::vector<int> colour(n, 0);
  std::vector<int> topo;  // parents after children reversed below
  std::function<void(int)> visit = [&](int u) {
    colour[u] = 1;
    for (int v : out[u]) {
      if (colour[v] == 1) {
        Fail(ErrorCode::kCyclicForeignKeys,
             "foreign keys form a cycle through " + s.relations_[v].name);
      }
      if (colour[v] == 0) visit(v);
    }
    colour[u] = 2;
    topo.push_back(u);  // post-order: parents before children
  };
  for (int i = 0; i < n; ++i) {
    if (colour[i] == 0) visit(i);
  }

  // Which relations depend on the primary relation.
  std::vector<bool> depends(n, false);
  for (int u : topo) {
    for (int v : out[u]) {
      if (v == s.primary_ || depends[v]) depends[u] = true;
    }
  }
  for (int i = 0; i < n; ++i) {
    const RelationSchema& r = s.relations_[i];
    if (i == s.primary_) continue;
    if (depends[i] && r.privacy_class == PrivacyClass::kPublic) {
      Fail(ErrorCode::kPublicRefersToPrivate,
           "public relation " + r.name + " depends on the primary relation");
    }
    if (!depends[i] && r.privacy_class == PrivacyClass::kSecondaryPrivate) {
      Fail(ErrorCode::kInconsistentPrivacyClass,
           r.name + " is secondary_private but does not depend on " +
               s.relations_[s.primary_].name);
    }
  }

  // Tuple multipliers: sum over FK paths to the primary relation of the
  // product of multiplicity bounds.
  s.tuple_mult_.assign(n, 0);
  s.tuple_mult_[s.primary_] = 1;
  for (int u : topo) {
    if (u == s.primary_ || !s.relations_[u].is_private()) continue;
    int64_t m = 0;
    for (const FkEdge& e : s.edges_) {
      if (e.child == u && s.relations_[e.parent].is_private()) {
        m += static_cast<int64_t>(e.tau) * s.tuple_mult_[e.parent];
      }
    }
    s.tuple_mult_[u] = m;
  }

  // Private-FK order: Kahn's algorithm on edges, FK(R,R') before FK(R',R'').
  const int m = static_cast<int>(s.edges_.size());
  auto key = [&](int e) {
    const FkEdge& fe = s.edges_[e];
    return std::make_tuple(s.relations_[fe.child].name,
                           s.relations_[fe.parent].name,
                           s.relations_[fe.child].foreign_keys[fe.fk_slot].column);
  };
  auto cmp = [&](int a, int b) { return key(a) < key(b); };
  std::vector<int> indegree(m, 0);
  for (int a = 0; a < m; ++a) {
    if (!s.edges_[a].is_private) continue;
    for (int b = 0; b < m; ++b) {
      if (s.edges_[b].is_private && s.edges_[a].parent == s.edges_[b].child) {
        ++indegree[b];
      }
    }
  }
  std::set<int, decltype(cmp)> ready(cmp);
  for (int e = 0; e < m; ++e) {
    if (s.edges_[e].is_private && indegree[e] == 0) ready.insert(e);
  }
  while (!ready.empty()) {
    const int a = *ready.begin();
    ready.erase(ready.begin());
    s.order_.push_back(a);
    for (int b = 0; b < m; ++b) {
      if (s.edges_[b].is_private && s.edges_[a].parent == s.edges_[b].child &&
          --indegree[b] == 0) {
        ready.insert(b);
      }
    }
  }
  s.order_pos_.assign(m, -1);
  for (int i = 0; i < static_cast<int>(s.order_.size()); ++i) {
    s.order_pos_[s.order_[i]] = i;
  }
  return s;
}

int DatabaseSchema::RelationIndex(std::string_view name) const {
  for (int i = 0; i < num_relations(); ++i) {
    if (relations_[i].name == name) return i;
  }
  return -1;
}

int DatabaseSchema::EdgeIndex(int child, int fk_slot) const {
  for (int e = 0; e < static_cast<int>(edges_.size()); ++e) {
    if (edges_[e].child == child && edges_[e].fk_slot == fk_slot) return e;
  }
  return -1;
}

int DatabaseSchema::OrderPosition(int edge) const { return order_pos_[edge]; }

int64_t DatabaseSchema::GroupMultiplier(int edge) const {
  const FkEdge& e = edges_[edge];
  if (relations_[e.parent].is_private()) return tuple_mult_[e.parent];
  return tuple_mult_[e.child];
}

std::vector<int> DatabaseSchema::StandaloneModelRelations() const {
  std::vector<int> result;
  for (int r = 0; r < num_relations(); ++r) {
    bool has_private_fk = false;
    bool referenced_by_private = false;
    for (const FkEdge& e : edges_) {
      if (e.child == r && e.is_private) has_private_fk = true;
      if (e.parent == r && e.is_private) referenced_by_private = true;
    }
    // The primary relation always needs a model to seed synthesis.
    if (!has_private_fk && (referenced_by_private || r == primary_)) {
      result.push_back(r);
    }
  }
  return result;
}

std::string DatabaseSchema::EdgeName(int edge) const {
  const FkEdge& e = edges_[edge];
  return relations_[e.child].name + "." +
         relations_[e.child].foreign_keys[e.fk_slot].column + "->" +
         relations_[e.parent].name;
}

namespace {

PrivacyClass ParsePrivacyClass(const std::string& s) {
  if (s == "primary_private") return PrivacyClass::kPrimaryPrivate;
  if (s == "secondary_private") return PrivacyClass::kSecondaryPrivate;
  if (s == "public") return PrivacyClass::kPublic;
  Fail(ErrorCode::kParse, "unknown privacy class '" + s + "'");
}

}  // namespace

DatabaseSchema SchemaFromJson(const nlohmann::json& j) {
  std::vector<RelationSchema> relations;
  try {
    for (const auto& jr : j.at("relations")) {
      RelationSchema r;
      r.name = jr.at("name").get<std::string>();
      r.privacy_class = ParsePrivacyClass(jr.at("privacy").get<std::string>());
      r.primary_key = jr.at("primary_key").get<std::string>();
      for (const auto& ja : jr.value("attributes", nlohmann::json::array())) {
        AttributeDef a;
        a.name = ja.at("name").get<std::string>();
        if (ja.contains("labels")) {
          a.value_labels = ja.at("labels").get<std::vector<std::string>>();
          a.domain_size = ja.value("domain_size",
                                   static_cast<int>(a.value_labels.size()));
        } else {
          a.domain_size = ja.at("domain_size").get<int>();
        }
        r.attributes.push_back(std::move(a));
      }
      for (const auto& jf : jr.value("foreign_keys", nlohmann::json::array())) {
        ForeignKeyDef fk;
        fk.column = jf.at("column").get<std::string>();
        fk.parent_relation = jf.at("references").get<std::string>();
        fk.max_multiplicity = jf.at("max_multiplicity").get<int>();
        r.foreign_keys.push_back(std::move(fk));
      }
      relations.push_back(std::move(r));
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("schema: ") + e.what());
  }
  return DatabaseSchema::Validate(std::move(relations));
}

nlohmann::json RelationToJson(const RelationSchema& r) {
  nlohmann::json jr;
  jr["name"] = r.name;
  jr["privacy"] = PrivacyClassName(r.privacy_class);
  jr["primary_key"] = r.primary_key;
  jr["attributes"] = nlohmann::json::array();
  for (const AttributeDef& a : r.attributes) {
    nlohmann::json ja = {{"name", a.name}, {"domain_size", a.domain_size}};
    if (!a.value_labels.empty()) ja["labels"] = a.value_labels;
    jr["attributes"].push_back(std::move(ja));
  }
  jr["foreign_keys"] = nlohmann::json::array();
  for (const ForeignKeyDef& fk : r.foreign_keys) {
    jr["foreign_keys"].push_back({{"column", fk.column},
                                  {"references", fk.parent_relation},
                                  {"max_multiplicity", fk.max_multiplicity}});
  }
  return jr;
}

nlohmann::json SchemaToJson(const DatabaseSchema& schema) {
  nlohmann::json j;
  j["relations"] = nlohmann::json::array();
  for (const RelationSchema& r : schema.relations()) {
    j["relations"].push_back(RelationToJson(r));
  }
  return j;
}

DatabaseSchema LoadSchemaFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open schema file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, path + ": " + e.what());
  }
  return SchemaFromJson(j);
}

}  // namespace fksynth
