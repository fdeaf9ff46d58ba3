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

#ifndef FKSYNTH_DATASTORE_H_
#define FKSYNTH_DATASTORE_H_

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fksynth/schema.h"

namespace fksynth {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable ParseCsv(std::istream& in);
CsvTable ReadCsvFile(const std::string& path);
void WriteCsv(std::ostream& out, const CsvTable& table);
void WriteCsvFile(const std::string& path, const CsvTable& table);

// Integer-coded rows of one relation. The attribute list starts as the
// schema's and may grow when latent columns are attached.
struct EncodedRelation {
  int relation = -1;
  std::vector<AttributeDef> attributes;
  std::vector<std::string> keys;
  std::vector<int32_t> codes;  // row-major, num_rows() x num_attrs()
  // Per foreign-key slot: the referenced key and the resolved parent row
  // (-1 when the key does not resolve).
  std::vector<std::vector<std::string>> fk_keys;
  std::vector<std::vector<int>> fk_rows;

  size_t num_rows() const { return keys.size(); }
  int num_attrs() const { return static_cast<int>(attributes.size()); }
  std::span<const int32_t> row(size_t r) const {
    return {codes.data() + r * attributes.size(), attributes.size()};
  }
  int32_t at(size_t r, int a) const { return codes[r * attributes.size() + a]; }
  std::vector<int> DomainSizes() const;
};

struct Database {
  DatabaseSchema schema;
  std::vector<EncodedRelation> relations;  // indexed like schema.relations()
};

// Encodes CSV rows against the schema. Columns may appear in any order;
// extra columns are ignored.
EncodedRelation LoadRelation(const DatabaseSchema& schema, int relation,
                             const CsvTable& table);

// Reads <dir>/<relation>.csv for every relation and resolves foreign keys.
Database LoadDatabase(const DatabaseSchema& schema, const std::string& dir);

// Resolves fk_keys into fk_rows for every relation.
void LinkForeignKeys(Database& db);

struct TruncationReport {
  std::vector<size_t> removed;  // per relation
  int passes = 0;
  size_t total() const;
};

// Removes every tuple referred to by more than tau tuples through any foreign
// key, together with everything that depends on it; tuples whose reference
// does not resolve are removed the same way. Repeats until no bound is
// violated. Surviving row order is preserved.
TruncationReport Truncate(Database& db);

struct TupleGroup {
  int parent_row = -1;
  std::vector<int> members;  // child rows, ascending
};

struct GroupIndex {
  std::vector<TupleGroup> groups;  // ascending parent row
  std::vector<int> dangling;       // child rows without a live parent
  std::vector<int> row_group;      // per child row: group index or -1
  size_t num_members() const;
};

GroupIndex BuildGroups(const Database& db, int edge);

// CSV rendering of a relation: primary key, schema attributes decoded to
// labels, then foreign-key columns. Attached latent columns are omitted.
CsvTable EncodeToCsv(const DatabaseSchema& schema, const EncodedRelation& rel);

}  // namespace fksynth

#endif  // FKSYNTH_DATASTORE_H_
