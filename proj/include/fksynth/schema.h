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

#ifndef FKSYNTH_SCHEMA_H_
#define FKSYNTH_SCHEMA_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace fksynth {

enum class PrivacyClass { kPrimaryPrivate, kSecondaryPrivate, kPublic };

const char* PrivacyClassName(PrivacyClass c);

struct AttributeDef {
  std::string name;
  int domain_size = 1;
  // Empty, or exactly domain_size unique labels. Without labels, values are
  // the integers 0..domain_size-1.
  std::vector<std::string> value_labels;
};

struct ForeignKeyDef {
  std::string column;
  std::string parent_relation;
  int max_multiplicity = 1;
};

struct RelationSchema {
  std::string name;
  PrivacyClass privacy_class = PrivacyClass::kPublic;
  std::string primary_key;
  std::vector<AttributeDef> attributes;
  std::vector<ForeignKeyDef> foreign_keys;

  bool is_private() const { return privacy_class != PrivacyClass::kPublic; }
};

// One foreign-key reference between two relations of a validated schema.
struct FkEdge {
  int child = -1;
  int parent = -1;
  int fk_slot = -1;  // index into the child's foreign_keys
  int tau = 1;
  bool is_private = false;  // child is private
};

// A validated database schema. Construction verifies the reference graph is
// acyclic and the privacy classes are closed, then derives the private-FK
// order and the tuple/group multipliers. Immutable afterwards.
class DatabaseSchema {
 public:
  static DatabaseSchema Validate(std::vector<RelationSchema> relations);

  const std::vector<RelationSchema>& relations() const { return relations_; }
  const RelationSchema& relation(int index) const { return relations_[index]; }
  int num_relations() const { return static_cast<int>(relations_.size()); }
  // -1 when absent.
  int RelationIndex(std::string_view name) const;
  int primary_relation() const { return primary_; }

  const std::vector<FkEdge>& edges() const { return edges_; }
  const FkEdge& edge(int index) const { return edges_[index]; }
  // Edge index for (child, fk_slot); -1 when absent.
  int EdgeIndex(int child, int fk_slot) const;

  // Private foreign keys in ascending order: for any FK(R,R') and FK(R',R'')
  // the former comes first.
  const std::vector<int>& private_fk_order() const { return order_; }
  // Position of an edge in private_fk_order(), -1 for non-private edges.
  int OrderPosition(int edge) const;

  // Maximum number of tuples of the relation that change between neighboring
  // databases; 0 for public relations.
  int64_t TupleMultiplier(int relation) const { return tuple_mult_[relation]; }
  // Maximum number of tuple groups induced by a private FK that change.
  int64_t GroupMultiplier(int edge) const;

  // Relations with no private FK that are referred to by at least one
  // private relation; these receive standalone single-relation models.
  std::vector<int> StandaloneModelRelations() const;

  std::string EdgeName(int edge) const;

 private:
  std::vector<RelationSchema> relations_;
  std::vector<FkEdge> edges_;
  std::vector<int> order_;
  std::vector<int> order_pos_;
  std::vector<int64_t> tuple_mult_;
  int primary_ = -1;
};

DatabaseSchema SchemaFromJson(const nlohmann::json& j);
nlohmann::json SchemaToJson(const DatabaseSchema& schema);
nlohmann::json RelationToJson(const RelationSchema& relation);
DatabaseSchema LoadSchemaFile(const std::string& path);

}  // namespace fksynth

#endif  // FKSYNTH_SCHEMA_H_
