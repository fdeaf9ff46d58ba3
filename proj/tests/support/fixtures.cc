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

#include "support/fixtures.h"

namespace fksynth::testing {

CsvTable MakeCsv(std::vector<std::string> header,
                 std::vector<std::vector<std::string>> rows) {
  return {std::move(header), std::move(rows)};
}

DatabaseSchema TwoGroupSchema() {
  RelationSchema r0;
  r0.name = "R0";
  r0.privacy_class = PrivacyClass::kPrimaryPrivate;
  r0.primary_key = "id";
  r0.attributes = {{"B", 2, {}}};
  RelationSchema r1;
  r1.name = "R1";
  r1.privacy_class = PrivacyClass::kSecondaryPrivate;
  r1.primary_key = "A_ID";
  r1.attributes = {{"A1", 2, {}}, {"A2", 2, {}}, {"A3", 2, {}}};
  r1.foreign_keys = {{"A_FK", "R0", 3}};
  return DatabaseSchema::Validate({r0, r1});
}

Database TwoGroupDatabase() {
  Database db{TwoGroupSchema(), {}};
  db.relations.push_back(
      LoadRelation(db.schema, 0, MakeCsv({"id", "B"}, {{"1", "0"}, {"2", "1"}})));
  db.relations.push_back(LoadRelation(
      db.schema, 1,
      MakeCsv({"A_ID", "A1", "A2", "A3", "A_FK"}, {{"1", "0", "0", "1", "1"},
                                                   {"2", "1", "0", "0", "1"},
                                                   {"3", "0", "1", "1", "2"},
                                                   {"4", "1", "0", "1", "2"},
                                                   {"5", "1", "1", "0", "2"}})));
  LinkForeignKeys(db);
  return db;
}

Database RandomDatabase(const DatabaseSchema& schema, const std::vector<int>& rows,
                        RngStream rng) {
  Database db{schema, {}};
  for (int r = 0; r < schema.num_relations(); ++r) {
    const RelationSchema& rel = schema.relation(r);
    CsvTable t;
    t.header.push_back(rel.primary_key);
    for (const AttributeDef& a : rel.attributes) t.header.push_back(a.name);
    for (const ForeignKeyDef& fk : rel.foreign_keys) t.header.push_back(fk.column);
    for (int i = 0; i < rows[r]; ++i) {
      std::vector<std::string> row = {std::to_string(i)};
      for (const AttributeDef& a : rel.attributes) {
        row.push_back(std::to_string(rng.UniformInt(a.domain_size)));
      }
      for (const ForeignKeyDef& fk : rel.foreign_keys) {
        const int parent = schema.RelationIndex(fk.parent_relation);
        row.push_back(std::to_string(rng.UniformInt(rows[parent])));
      }
      t.rows.push_back(std::move(row));
    }
    db.relations.push_back(LoadRelation(schema, r, t));
  }
  LinkForeignKeys(db);
  Truncate(db);
  return db;
}

}  // namespace fksynth::testing
