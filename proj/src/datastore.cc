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

#include "fksynth/datastore.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "fksynth/error.h"

namespace fksynth {
namespace {

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) Fail(ErrorCode::kParse, "unterminated quote in CSV line");
  fields.push_back(std::move(field));
  return fields;
}

std::string QuoteCsv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

int ColumnIndex(const std::vector<std::string>& header, const std::string& name,
                const std::string& relation) {
  for (size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  Fail(ErrorCode::kMissingColumn, relation + ": missing column " + name);
}

}  // namespace

CsvTable ParseCsv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (first) {
      if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) {
        line.erase(0, 3);
      }
      table.header = SplitCsvLine(line);
      first = false;
      continue;
    }
    if (line.empty()) continue;
    table.rows.push_back(SplitCsvLine(line));
    if (table.rows.back().size() != table.header.size()) {
      Fail(ErrorCode::kParse, "CSV row " + std::to_string(table.rows.size()) +
                                  " has " +
                                  std::to_string(table.rows.back().size()) +
                                  " fields, header has " +
                                  std::to_string(table.header.size()));
    }
  }
  if (first) Fail(ErrorCode::kParse, "CSV input has no header");
  return table;
}

CsvTable ReadCsvFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  return ParseCsv(in);
}

void WriteCsv(std::ostream& out, const CsvTable& table) {
  auto write_row = [&](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << QuoteCsv(row[i]);
    }
    out << '\n';
  };
  write_row(table.header);
  for (const auto& row : table.rows) write_row(row);
}

void WriteCsvFile(const std::string& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path);
  WriteCsv(out, table);
}

std::vector<int> EncodedRelation::DomainSizes() const {
  std::vector<int> sizes;
  sizes.reserve(attributes.size());
  for (const AttributeDef& a : attributes) sizes.push_back(a.domain_size);
  return sizes;
}

size_t TruncationReport::total() const {
  size_t t = 0;
  for (size_t r : removed) t += r;
  return t;
}

size_t GroupIndex::num_members() const {
  size_t n = 0;
  for (const TupleGroup& g : groups) n += g.members.size();
  return n;
}

EncodedRelation LoadRelation(const DatabaseSchema& schema, int relation,
                             const CsvTable& table) {
  const RelationSchema& rs = schema.relation(relation);
  EncodedRelation rel;
  rel.relation = relation;
  rel.attributes = rs.attributes;
  const int pk_col = ColumnIndex(table.header, rs.primary_key, rs.name);
  std::vector<int> attr_cols;
  std::vector<std::unordered_map<std::string, int32_t>> label_maps;
  for (const AttributeDef& a : rs.attributes) {
    attr_cols.push_back(ColumnIndex(table.header, a.name, rs.name));
    std::unordered_map<std::string, int32_t> labels;
    for (size_t v = 0; v < a.value_labels.size(); ++v) {
      labels.emplace(a.value_labels[v], static_cast<int32_t>(v));
    }
    label_maps.push_back(std::move(labels));
  }
  std::vector<int> fk_cols;
  for (const ForeignKeyDef& fk : rs.foreign_keys) {
    fk_cols.push_back(ColumnIndex(table.header, fk.column, rs.name));
  }

  const size_t n = table.rows.size();
  const size_t d = rs.attributes.size();
  rel.keys.reserve(n);
  rel.codes.resize(n * d);
  rel.fk_keys.assign(fk_cols.size(), {});
  std::unordered_set<std::string> seen_keys;
  for (size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    if (!seen_keys.insert(row[pk_col]).second) {
      Fail(ErrorCode::kDuplicatePrimaryKey,
           rs.name + ": duplicate primary key " + row[pk_col]);
    }
    rel.keys.push_back(row[pk_col]);
    for (size_t a = 0; a < d; ++a) {
      const std::string& cell = row[attr_cols[a]];
      const AttributeDef& def = rs.attributes[a];
      int32_t code = -1;
      if (!def.value_labels.empty()) {
        auto it = label_maps[a].find(cell);
        if (it != label_maps[a].end()) code = it->second;
      } else {
        int32_t v = 0;
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec == std::errc() && ptr == cell.data() + cell.size() && v >= 0 &&
            v < def.domain_size) {
          code = v;
        }
      }
      if (code < 0) {
        Fail(ErrorCode::kUnknownValue,
             rs.name + "." + def.name + ": unknown value '" + cell + "'");
      }
      rel.codes[r * d + a] = code;
    }
    for (size_t f = 0; f < fk_cols.size(); ++f) {
      rel.fk_keys[f].push_back(row[fk_cols[f]]);
    }
  }
  rel.fk_rows.assign(fk_cols.size(), std::vector<int>(n, -1));
  return rel;
}

void LinkForeignKeys(Database& db) {
  std::vector<std::unordered_map<std::string, int>> key_index(db.relations.size());
  for (size_t r = 0; r < db.relations.size(); ++r) {
    const auto& keys = db.relations[r].keys;
    key_index[r].reserve(keys.size());
    for (size_t i = 0; i < keys.size(); ++i) {
      key_index[r].emplace(keys[i], static_cast<int>(i));
    }
  }
  for (const FkEdge& e : db.schema.edges()) {
    EncodedRelation& child = db.relations[e.child];
    child.fk_keys.resize(db.schema.relation(e.child).foreign_keys.size());
    child.fk_rows.resize(child.fk_keys.size());
    const auto& index = key_index[e.parent];
    auto& rows = child.fk_rows[e.fk_slot];
    const auto& keys = child.fk_keys[e.fk_slot];
    rows.assign(keys.size(), -1);
    for (size_t i = 0; i < keys.size(); ++i) {
      auto it = index.find(keys[i]);
      if (it != index.end()) rows[i] = it->second;
    }
  }
}

Database LoadDatabase(const DatabaseSchema& schema, const std::string& dir) {
  Database db{schema, {}};
  for (int r = 0; r < schema.num_relations(); ++r) {
    const std::string path =
        (std::filesystem::path(dir) / (schema.relation(r).name + ".csv")).string();
    db.relations.push_back(LoadRelation(schema, r, ReadCsvFile(path)));
  }
  LinkForeignKeys(db);
  return db;
}

namespace {

void Compact(EncodedRelation& rel, const std::vector<bool>& alive) {
  const size_t d = rel.attributes.size();
  size_t out = 0;
  for (size_t r = 0; r < rel.num_rows(); ++r) {
    if (!alive[r]) continue;
    if (out != r) {
      rel.keys[out] = std::move(rel.keys[r]);
      std::copy_n(rel.codes.begin() + r * d, d, rel.codes.begin() + out * d);
      for (auto& col : rel.fk_keys) col[out] = std::move(col[r]);
    }
    ++out;
  }
  rel.keys.resize(out);
  rel.codes.resize(out * d);
  for (auto& col : rel.fk_keys) col.resize(out);
  for (auto& col : rel.fk_rows) col.assign(out, -1);
}

}  // namespace

TruncationReport Truncate(Database& db) {
  const auto& edges = db.schema.edges();
  const size_t nrel = db.relations.size();
  TruncationReport report;
  report.removed.assign(nrel, 0);
  std::vector<std::vector<bool>> alive(nrel);
  for (size_t r = 0; r < nrel; ++r) alive[r].assign(db.relations[r].num_rows(), true);

  bool changed = true;
  while (changed) {
    changed = false;
    ++report.passes;
    // Over-referenced parents.
    for (const FkEdge& e : edges) {
      const auto& fk = db.relations[e.child].fk_rows[e.fk_slot];
      std::vector<int> refs(db.relations[e.parent].num_rows(), 0);
      for (size_t i = 0; i < fk.size(); ++i) {
        if (alive[e.child][i] && fk[i] >= 0) ++refs[fk[i]];
      }
      for (size_t p = 0; p < refs.size(); ++p) {
        if (alive[e.parent][p] && refs[p] > e.tau) {
          alive[e.parent][p] = false;
          changed = true;
        }
      }
    }
    // Cascade to dependents until stable.
    bool cascading = true;
    while (cascading) {
      cascading = false;
      for (const FkEdge& e : edges) {
        const auto& fk = db.relations[e.child].fk_rows[e.fk_slot];
        for (size_t i = 0; i < fk.size(); ++i) {
          if (alive[e.child][i] && (fk[i] < 0 || !alive[e.parent][fk[i]])) {
            alive[e.child][i] = false;
            cascading = true;
            changed = true;
          }
        }
      }
    }
  }
  for (size_t r = 0; r < nrel; ++r) {
    const size_t before = db.relations[r].num_rows();
    Compact(db.relations[r], alive[r]);
    report.removed[r] = before - db.relations[r].num_rows();
  }
  LinkForeignKeys(db);
  return report;
}

GroupIndex BuildGroups(const Database& db, int edge) {
  const FkEdge& e = db.schema.edge(edge);
  const EncodedRelation& child = db.relations[e.child];
  const auto& fk = child.fk_rows[e.fk_slot];
  const size_t nparent = db.relations[e.parent].num_rows();
  std::vector<int> group_of_parent(nparent, -1);
  GroupIndex index;
  index.row_group.assign(child.num_rows(), -1);
  // Groups in ascending parent-row order.
  std::vector<int> count(nparent, 0);
  for (size_t i = 0; i < fk.size(); ++i) {
    if (fk[i] >= 0) ++count[fk[i]];
  }
  for (size_t p = 0; p < nparent; ++p) {
    if (count[p] == 0) continue;
    group_of_parent[p] = static_cast<int>(index.groups.size());
    index.groups.push_back({static_cast<int>(p), {}});
    index.groups.back().members.reserve(count[p]);
  }
  for (size_t i = 0; i < fk.size(); ++i) {
    if (fk[i] < 0) {
      index.dangling.push_back(static_cast<int>(i));
      continue;
    }
    const int g = group_of_parent[fk[i]];
    index.groups[g].members.push_back(static_cast<int>(i));
    index.row_group[i] = g;
  }
  return index;
}

CsvTable EncodeToCsv(const DatabaseSchema& schema, const EncodedRelation& rel) {
  const RelationSchema& rs = schema.relation(rel.relation);
  CsvTable table;
  table.header.push_back(rs.primary_key);
  for (const AttributeDef& a : rs.attributes) table.header.push_back(a.name);
  for (const ForeignKeyDef& fk : rs.foreign_keys) table.header.push_back(fk.column);
  table.rows.reserve(rel.num_rows());
  for (size_t r = 0; r < rel.num_rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(table.header.size());
    row.push_back(rel.keys[r]);
    for (size_t a = 0; a < rs.attributes.size(); ++a) {
      const int32_t code = rel.at(r, static_cast<int>(a));
      const AttributeDef& def = rs.attributes[a];
      row.push_back(def.value_labels.empty() ? std::to_string(code)
                                             : def.value_labels[code]);
    }
    for (size_t f = 0; f < rs.foreign_keys.size(); ++f) {
      row.push_back(rel.fk_keys[f][r]);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

}  // namespace fksynth
