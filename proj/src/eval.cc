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

#include "fksynth/eval.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>

#include "fksynth/error.h"
#include "fksynth/graphical_model.h"

namespace fksynth {
namespace {

std::vector<std::vector<int>> ChildrenByParent(const Database& db, const TwoLevel& tl) {
  const EncodedRelation& child = db.relations[tl.child];
  const FkEdge& e = db.schema.edge(tl.edge);
  std::vector<std::vector<int>> kids(db.relations[tl.parent].num_rows());
  const auto& rows = child.fk_rows[e.fk_slot];
  for (size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= 0) kids[rows[r]].push_back(static_cast<int>(r));
  }
  return kids;
}

// Kuhn's augmenting paths: can every predicate get its own child?
bool TryAssign(int pred, const std::vector<std::vector<char>>& ok, std::vector<int>& owner,
               std::vector<char>& seen) {
  for (size_t c = 0; c < owner.size(); ++c) {
    if (!ok[pred][c] || seen[c]) continue;
    seen[c] = 1;
    if (owner[c] < 0 || TryAssign(owner[c], ok, owner, seen)) {
      owner[c] = pred;
      return true;
    }
  }
  return false;
}

bool DistinctMatch(const EncodedRelation& child, const std::vector<int>& members,
                   const std::vector<Predicate>& preds) {
  if (preds.size() > members.size()) return false;
  std::vector<std::vector<char>> ok(preds.size(), std::vector<char>(members.size()));
  for (size_t p = 0; p < preds.size(); ++p) {
    for (size_t c = 0; c < members.size(); ++c) ok[p][c] = preds[p].Matches(child.row(members[c]));
  }
  std::vector<int> owner(members.size(), -1);
  for (size_t p = 0; p < preds.size(); ++p) {
    std::vector<char> seen(members.size(), 0);
    if (!TryAssign(static_cast<int>(p), ok, owner, seen)) return false;
  }
  return true;
}

Predicate RandomPredicate(const RelationSchema& rel, int attrs, int total_conditions,
                          RngStream& rng) {
  const int na = static_cast<int>(rel.attributes.size());
  std::vector<int> order(na);
  for (int i = 0; i < na; ++i) order[i] = i;
  for (int i = 0; i < std::min(attrs, na); ++i) {
    std::swap(order[i], order[i + rng.UniformInt(na - i)]);
  }
  Predicate p;
  for (int i = 0; i < std::min(attrs, na); ++i) {
    const int a = order[i];
    const int dom = rel.attributes[a].domain_size;
    const int take = PredicateValueCount(dom, total_conditions);
    std::vector<int> vals(dom);
    for (int v = 0; v < dom; ++v) vals[v] = v;
    for (int j = 0; j < take; ++j) std::swap(vals[j], vals[j + rng.UniformInt(dom - j)]);
    vals.resize(take);
    std::sort(vals.begin(), vals.end());
    p.conditions.push_back({a, std::move(vals)});
  }
  std::sort(p.conditions.begin(), p.conditions.end(),
            [](const Predicate::Condition& x, const Predicate::Condition& y) { return x.attr < y.attr; });
  return p;
}

nlohmann::json PredicateJson(const RelationSchema& rel, const Predicate& p) {
  nlohmann::json j = nlohmann::json::array();
  for (const Predicate::Condition& c : p.conditions) {
    j.push_back({{"attribute", rel.attributes[c.attr].name}, {"values", c.values}});
  }
  return j;
}

// ---------------------------------------------------------------------------
// Benchmark construction.

struct RelBuf {
  std::vector<std::string> keys;
  std::vector<int32_t> codes;
  std::vector<std::vector<std::string>> fk_keys;
};

AttributeDef Attr(const std::string& name, int size) { return {name, size, {}}; }

int Draw(RngStream& rng, const std::vector<double>& p) { return static_cast<int>(rng.Categorical(p)); }

Database Assemble(std::vector<RelationSchema> schemas, std::vector<RelBuf> bufs) {
  Database db{DatabaseSchema::Validate(std::move(schemas)), {}};
  for (int r = 0; r < db.schema.num_relations(); ++r) {
    EncodedRelation rel;
    rel.relation = r;
    rel.attributes = db.schema.relation(r).attributes;
    rel.keys = std::move(bufs[r].keys);
    rel.codes = std::move(bufs[r].codes);
    rel.fk_keys = std::move(bufs[r].fk_keys);
    rel.fk_keys.resize(db.schema.relation(r).foreign_keys.size());
    db.relations.push_back(std::move(rel));
  }
  LinkForeignKeys(db);
  return db;
}

RelationSchema Relation(const std::string& name, PrivacyClass cls, const std::string& pk,
                        std::vector<AttributeDef> attrs, std::vector<ForeignKeyDef> fks) {
  return {name, cls, pk, std::move(attrs), std::move(fks)};
}

// Cluster labels with exactly half of each, in random order.
std::vector<int> BalancedClusters(int n, RngStream& rng) {
  std::vector<int> c(n);
  for (int i = 0; i < n; ++i) c[i] = i < n / 2 ? 0 : 1;
  for (int i = n - 1; i > 0; --i) std::swap(c[i], c[rng.UniformInt(i + 1)]);
  return c;
}

Benchmark TwoClusterHouseholds(int groups, RngStream& rng) {
  std::vector<RelationSchema> s;
  s.push_back(Relation("household", PrivacyClass::kPrimaryPrivate, "hid",
                       {Attr("htype", 3), Attr("hregion", 3)}, {}));
  s.push_back(Relation("person", PrivacyClass::kSecondaryPrivate, "pid",
                       {Attr("age", 5), Attr("sex", 2), Attr("edu", 4), Attr("work", 3)},
                       {{"hid", "household", 3}}));
  const std::vector<std::vector<double>> htype = {{0.75, 0.15, 0.10}, {0.10, 0.20, 0.70}};
  const std::vector<std::vector<double>> hregion = {{0.6, 0.3, 0.1}, {0.2, 0.3, 0.5}};
  const std::vector<std::vector<double>> age = {{0.05, 0.40, 0.35, 0.15, 0.05},
                                                {0.35, 0.30, 0.25, 0.08, 0.02}};
  const std::vector<double> sex = {0.5, 0.5};
  const std::vector<std::vector<double>> edu = {{0.1, 0.2, 0.4, 0.3}, {0.4, 0.3, 0.2, 0.1}};
  const std::vector<std::vector<double>> work = {{0.1, 0.8, 0.1}, {0.5, 0.3, 0.2}};
  const int sizes[2] = {2, 3};

  std::vector<RelBuf> b(2);
  b[1].fk_keys.resize(1);
  Benchmark bench;
  bench.parent_cluster = BalancedClusters(groups, rng);
  int pid = 0;
  for (int h = 0; h < groups; ++h) {
    const int c = bench.parent_cluster[h];
    const std::string hid = std::to_string(h + 1);
    b[0].keys.push_back(hid);
    b[0].codes.push_back(Draw(rng, htype[c]));
    b[0].codes.push_back(Draw(rng, hregion[c]));
    for (int m = 0; m < sizes[c]; ++m) {
      b[1].keys.push_back(std::to_string(++pid));
      b[1].codes.push_back(Draw(rng, age[c]));
      b[1].codes.push_back(Draw(rng, sex));
      b[1].codes.push_back(Draw(rng, edu[c]));
      b[1].codes.push_back(Draw(rng, work[c]));
      b[1].fk_keys[0].push_back(hid);
    }
  }
  bench.db = Assemble(std::move(s), std::move(b));
  bench.two_level = {0, 1, bench.db.schema.EdgeIndex(1, 0)};
  bench.planted = {{"profile", "two_cluster_households"},
                   {"p_z", {0.5, 0.5}},
                   {"sizes", {2, 3}},
                   {"htype", htype}, {"hregion", hregion},
                   {"age", age}, {"edu", edu}, {"work", work}};
  return bench;
}

Benchmark Chain3Level(int groups, RngStream& rng) {
  std::vector<RelationSchema> s;
  s.push_back(Relation("household", PrivacyClass::kPrimaryPrivate, "hid",
                       {Attr("htype", 3), Attr("hregion", 3)}, {}));
  s.push_back(Relation("person", PrivacyClass::kSecondaryPrivate, "pid",
                       {Attr("age", 5), Attr("work", 3)}, {{"hid", "household", 4}}));
  s.push_back(Relation("trip", PrivacyClass::kSecondaryPrivate, "tid",
                       {Attr("mode", 4), Attr("purpose", 3)},
                       {{"pid", "person", 3}, {"hid", "household", 12}}));
  const std::vector<std::vector<double>> htype = {{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}};
  const std::vector<std::vector<double>> hregion = {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}};
  const std::vector<std::vector<double>> persons = {{0.4, 0.6, 0.0, 0.0}, {0.0, 0.0, 0.5, 0.5}};
  const std::vector<std::vector<double>> age = {{0.05, 0.4, 0.35, 0.15, 0.05},
                                                {0.4, 0.3, 0.2, 0.08, 0.02}};
  const std::vector<std::vector<double>> work = {{0.1, 0.8, 0.1}, {0.5, 0.3, 0.2}};
  const std::vector<std::vector<double>> trips = {{0.1, 0.3, 0.4, 0.2}, {0.3, 0.4, 0.2, 0.1}};
  const std::vector<std::vector<double>> mode = {{0.7, 0.1, 0.1, 0.1}, {0.1, 0.5, 0.3, 0.1}};
  const std::vector<std::vector<double>> purpose = {{0.5, 0.3, 0.2}, {0.2, 0.3, 0.5}};

  std::vector<RelBuf> b(3);
  b[1].fk_keys.resize(1);
  b[2].fk_keys.resize(2);
  Benchmark bench;
  bench.parent_cluster = BalancedClusters(groups, rng);
  int pid = 0;
  int tid = 0;
  for (int h = 0; h < groups; ++h) {
    const int c = bench.parent_cluster[h];
    const std::string hid = std::to_string(h + 1);
    b[0].keys.push_back(hid);
    b[0].codes.push_back(Draw(rng, htype[c]));
    b[0].codes.push_back(Draw(rng, hregion[c]));
    const int np = 1 + Draw(rng, persons[c]);
    for (int m = 0; m < np; ++m) {
      const std::string p = std::to_string(++pid);
      b[1].keys.push_back(p);
      b[1].codes.push_back(Draw(rng, age[c]));
      b[1].codes.push_back(Draw(rng, work[c]));
      b[1].fk_keys[0].push_back(hid);
      const int nt = Draw(rng, trips[c]);
      for (int t = 0; t < nt; ++t) {
        b[2].keys.push_back(std::to_string(++tid));
        b[2].codes.push_back(Draw(rng, mode[c]));
        b[2].codes.push_back(Draw(rng, purpose[c]));
        b[2].fk_keys[0].push_back(p);
        b[2].fk_keys[1].push_back(hid);
      }
    }
  }
  bench.db = Assemble(std::move(s), std::move(b));
  bench.two_level = {0, 1, bench.db.schema.EdgeIndex(1, 0)};
  bench.planted = {{"profile", "chain_3level"}, {"p_z", {0.5, 0.5}}, {"persons", persons},
                   {"trips_per_person", trips}};
  return bench;
}

Benchmark PublicParent(int groups, RngStream& rng) {
  constexpr int kPerRegion = 40;
  std::vector<RelationSchema> s;
  s.push_back(Relation("region", PrivacyClass::kPublic, "rid",
                       {Attr("urban", 2), Attr("zone", 3)}, {}));
  s.push_back(Relation("household", PrivacyClass::kPrimaryPrivate, "hid", {Attr("htype", 3)},
                       {{"rid", "region", kPerRegion}}));
  s.push_back(Relation("person", PrivacyClass::kSecondaryPrivate, "pid",
                       {Attr("age", 5), Attr("work", 3)}, {{"hid", "household", 4}}));
  const std::vector<std::vector<double>> htype = {{0.7, 0.2, 0.1}, {0.1, 0.3, 0.6}};
  const std::vector<std::vector<double>> persons = {{0.5, 0.5, 0.0, 0.0}, {0.0, 0.1, 0.5, 0.4}};
  const std::vector<std::vector<double>> age = {{0.05, 0.4, 0.35, 0.15, 0.05},
                                                {0.4, 0.3, 0.2, 0.08, 0.02}};
  const std::vector<std::vector<double>> work = {{0.1, 0.8, 0.1}, {0.5, 0.3, 0.2}};
  // Urban regions hold mostly small households.
  const std::vector<double> cluster_given_urban[2] = {{0.3, 0.7}, {0.8, 0.2}};

  const int regions = std::max(4, (groups + kPerRegion / 2 - 1) / (kPerRegion / 2));
  std::vector<RelBuf> b(3);
  b[1].fk_keys.resize(1);
  b[2].fk_keys.resize(1);
  std::vector<int> urban(regions);
  for (int r = 0; r < regions; ++r) {
    b[0].keys.push_back("r" + std::to_string(r + 1));
    urban[r] = r % 2;
    b[0].codes.push_back(urban[r]);
    b[0].codes.push_back(Draw(rng, {0.4, 0.35, 0.25}));
  }
  std::vector<int> load(regions, 0);
  Benchmark bench;
  int pid = 0;
  for (int h = 0; h < groups; ++h) {
    int r = static_cast<int>(rng.UniformInt(regions));
    while (load[r] >= kPerRegion) r = (r + 1) % regions;
    ++load[r];
    const int c = Draw(rng, cluster_given_urban[urban[r]]);
    bench.parent_cluster.push_back(c);
    const std::string hid = std::to_string(h + 1);
    b[1].keys.push_back(hid);
    b[1].codes.push_back(Draw(rng, htype[c]));
    b[1].fk_keys[0].push_back(b[0].keys[r]);
    const int np = 1 + Draw(rng, persons[c]);
    for (int m = 0; m < np; ++m) {
      b[2].keys.push_back(std::to_string(++pid));
      b[2].codes.push_back(Draw(rng, age[c]));
      b[2].codes.push_back(Draw(rng, work[c]));
      b[2].fk_keys[0].push_back(hid);
    }
  }
  bench.db = Assemble(std::move(s), std::move(b));
  bench.two_level = {1, 2, bench.db.schema.EdgeIndex(2, 0)};
  bench.planted = {{"profile", "public_parent"}, {"regions", regions}, {"persons", persons}};
  return bench;
}

}  // namespace

TwoLevel DefaultTwoLevel(const DatabaseSchema& schema) {
  const auto& edges = schema.edges();
  if (edges.empty()) Fail(ErrorCode::kInvalidArgument, "schema has no foreign keys");
  for (int e = 0; e < static_cast<int>(edges.size()); ++e) {
    if (edges[e].parent == schema.primary_relation()) return {edges[e].parent, edges[e].child, e};
  }
  return {edges[0].parent, edges[0].child, 0};
}

bool Predicate::Matches(std::span<const int32_t> row) const {
  for (const Condition& c : conditions) {
    if (!std::binary_search(c.values.begin(), c.values.end(), row[c.attr])) return false;
  }
  return true;
}

int PredicateValueCount(int domain_size, int total_conditions) {
  const double share = std::pow(0.2, 1.0 / std::max(total_conditions, 1));
  const long v = std::lround(share * domain_size);
  return static_cast<int>(std::clamp<long>(v, 1, domain_size));
}

std::vector<AggregateQuery> GenQueries(const DatabaseSchema& schema, const TwoLevel& tl, int count,
                                       int children, int attrs_per_predicate, RngStream rng) {
  const RelationSchema& parent = schema.relation(tl.parent);
  const RelationSchema& child = schema.relation(tl.child);
  const int tau = schema.edge(tl.edge).tau;
  const int pa = std::min<int>(attrs_per_predicate, parent.attributes.size());
  const int ca = std::min<int>(attrs_per_predicate, child.attributes.size());
  const int k = pa + children * ca;
  std::vector<AggregateQuery> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    AggregateQuery q;
    q.size = 1 + static_cast<int>(rng.UniformInt(tau));
    q.parent = RandomPredicate(parent, pa, k, rng);
    for (int c = 0; c < children; ++c) q.children.push_back(RandomPredicate(child, ca, k, rng));
    out.push_back(std::move(q));
  }
  return out;
}

int64_t EvalQuery(const Database& db, const TwoLevel& tl, const AggregateQuery& q) {
  const auto kids = ChildrenByParent(db, tl);
  const EncodedRelation& parent = db.relations[tl.parent];
  const EncodedRelation& child = db.relations[tl.child];
  int64_t n = 0;
  for (size_t p = 0; p < parent.num_rows(); ++p) {
    if (static_cast<int>(kids[p].size()) != q.size) continue;
    if (!q.parent.Matches(parent.row(p))) continue;
    if (DistinctMatch(child, kids[p], q.children)) ++n;
  }
  return n;
}

double RelativeError(double truth, double synthetic, double num_parents) {
  return std::abs(truth - synthetic) / std::max(truth, 0.01 * num_parents);
}

nlohmann::json QueryToJson(const DatabaseSchema& schema, const TwoLevel& tl,
                           const AggregateQuery& q) {
  nlohmann::json j;
  j["size"] = q.size;
  j["parent"] = PredicateJson(schema.relation(tl.parent), q.parent);
  j["children"] = nlohmann::json::array();
  for (const Predicate& p : q.children) j["children"].push_back(PredicateJson(schema.relation(tl.child), p));
  return j;
}

QueryReport CompareOnQueries(const Database& truth, const Database& synthetic, const TwoLevel& tl,
                             const std::vector<AggregateQuery>& queries) {
  QueryReport r;
  const double parents = static_cast<double>(truth.relations[tl.parent].num_rows());
  double sum = 0.0;
  for (const AggregateQuery& q : queries) {
    r.truth.push_back(EvalQuery(truth, tl, q));
    r.synthetic.push_back(EvalQuery(synthetic, tl, q));
    r.relative_error.push_back(RelativeError(r.truth.back(), r.synthetic.back(), parents));
    sum += r.relative_error.back();
  }
  r.mean_relative_error = queries.empty() ? 0.0 : sum / static_cast<double>(queries.size());
  return r;
}

std::vector<int> GroupSizes(const Database& db, const TwoLevel& tl) {
  std::vector<int> sizes(db.relations[tl.parent].num_rows(), 0);
  const auto& rows = db.relations[tl.child].fk_rows[db.schema.edge(tl.edge).fk_slot];
  for (int p : rows) {
    if (p >= 0) ++sizes[p];
  }
  return sizes;
}

double SizePatternTv(const Database& a, const Database& b, const TwoLevel& tl) {
  const int attrs = static_cast<int>(a.schema.relation(tl.parent).attributes.size());
  auto freq = [&](const Database& db) {
    std::map<std::vector<int>, double> f;
    const EncodedRelation& parent = db.relations[tl.parent];
    const std::vector<int> sizes = GroupSizes(db, tl);
    for (size_t p = 0; p < parent.num_rows(); ++p) {
      std::vector<int> key{sizes[p]};
      for (int i = 0; i < attrs; ++i) key.push_back(parent.at(p, i));
      f[key] += 1.0;
    }
    for (auto& [k, v] : f) v /= static_cast<double>(std::max<size_t>(parent.num_rows(), 1));
    return f;
  };
  const auto fa = freq(a);
  const auto fb = freq(b);
  double tv = 0.0;
  for (const auto& [k, v] : fa) {
    auto it = fb.find(k);
    tv += std::abs(v - (it == fb.end() ? 0.0 : it->second));
  }
  for (const auto& [k, v] : fb) {
    if (!fa.count(k)) tv += v;
  }
  return 0.5 * tv;
}

Database IndependentPairing(const ModelBundle& bundle, const TwoLevel& tl, RngStream rng) {
  const auto sit = bundle.standalone.find(tl.parent);
  if (sit == bundle.standalone.end()) {
    Fail(ErrorCode::kInvalidArgument, "baseline needs a standalone model for the parent");
  }
  const LatentFkModel& fk = bundle.fks.at(tl.edge).build.model;
  const SingleRelationModel& pm = sit->second.model;
  const DatabaseSchema& schema = bundle.schema;
  Database out{schema, {}};
  for (int r = 0; r < schema.num_relations(); ++r) {
    EncodedRelation rel;
    rel.relation = r;
    rel.attributes = bundle.augmented_attributes[r];
    rel.fk_keys.assign(schema.relation(r).foreign_keys.size(), {});
    rel.fk_rows.assign(schema.relation(r).foreign_keys.size(), {});
    out.relations.push_back(std::move(rel));
  }
  std::vector<double> size_mix(fk.tau, 0.0);
  for (int z = 0; z < fk.latent_span(); ++z) {
    for (int s = 1; s <= fk.tau; ++s) size_mix[s - 1] += fk.p_z[z] * fk.PSize(z, s);
  }
  EncodedRelation& parent = out.relations[tl.parent];
  EncodedRelation& child = out.relations[tl.child];
  const int slot = schema.edge(tl.edge).fk_slot;
  ConditionalSampler ps(pm.model, pm.model.theta());
  ConditionalSampler cs(fk.model, fk.model.theta());
  RngStream prng = rng.Derive("parents");
  RngStream crng = rng.Derive("children");
  std::vector<int> a;
  const size_t rows = static_cast<size_t>(std::llround(std::max(0.0, pm.n_tilde)));
  for (size_t p = 0; p < rows; ++p) {
    ps.Sample(prng, a);
    parent.codes.insert(parent.codes.end(), a.begin(), a.begin() + parent.num_attrs());
    parent.keys.push_back(std::to_string(p + 1));
    const int s = 1 + static_cast<int>(crng.Categorical(size_mix));
    for (int i = 0; i < s; ++i) {
      cs.Sample(crng, a);
      child.codes.insert(child.codes.end(), a.begin(), a.begin() + child.num_attrs());
      child.keys.push_back(std::to_string(child.keys.size() + 1));
      for (size_t k = 0; k < child.fk_keys.size(); ++k) {
        child.fk_keys[k].push_back(k == static_cast<size_t>(slot) ? parent.keys.back() : "");
        child.fk_rows[k].push_back(k == static_cast<size_t>(slot) ? static_cast<int>(p) : -1);
      }
    }
  }
  return out;
}

std::vector<std::string> BenchmarkProfiles() {
  return {"two_cluster_households", "chain_3level", "public_parent"};
}

Benchmark GenBenchmark(const std::string& profile, const BenchmarkSizes& sizes, RngStream rng) {
  if (sizes.groups < 2) Fail(ErrorCode::kInvalidArgument, "benchmark needs at least 2 groups");
  if (profile == "two_cluster_households") return TwoClusterHouseholds(sizes.groups, rng);
  if (profile == "chain_3level") return Chain3Level(sizes.groups, rng);
  if (profile == "public_parent") return PublicParent(sizes.groups, rng);
  Fail(ErrorCode::kInvalidArgument, "unknown benchmark profile '" + profile + "'");
}

void WriteBenchmark(const Benchmark& bench, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir);
  {
    std::ofstream out(fs::path(dir) / "schema.json");
    if (!out) Fail(ErrorCode::kIo, "cannot write schema.json");
    out << SchemaToJson(bench.db.schema).dump(2) << "\n";
  }
  for (const EncodedRelation& rel : bench.db.relations) {
    WriteCsvFile((fs::path(dir) / (bench.db.schema.relation(rel.relation).name + ".csv")).string(),
                 EncodeToCsv(bench.db.schema, rel));
  }
  nlohmann::json planted = bench.planted;
  planted["parent_cluster"] = bench.parent_cluster;
  std::ofstream out(fs::path(dir) / "planted.json");
  if (!out) Fail(ErrorCode::kIo, "cannot write planted.json");
  out << planted.dump() << "\n";
}

double ClusterPurity(const std::vector<int>& planted, const std::vector<int>& recovered) {
  if (planted.size() != recovered.size()) {
    Fail(ErrorCode::kDimensionMismatch, "label vectors differ in length");
  }
  std::map<int, std::map<int, int64_t>> table;
  for (size_t i = 0; i < planted.size(); ++i) ++table[recovered[i]][planted[i]];
  int64_t agree = 0;
  for (const auto& [label, counts] : table) {
    int64_t best = 0;
    for (const auto& [c, n] : counts) best = std::max(best, n);
    agree += best;
  }
  return planted.empty() ? 1.0 : static_cast<double>(agree) / static_cast<double>(planted.size());
}

double AdjustedRandIndex(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) Fail(ErrorCode::kDimensionMismatch, "label vectors differ in length");
  auto c2 = [](double n) { return n * (n - 1.0) / 2.0; };
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra;
  std::map<int, double> rb;
  for (size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0;
  for (const auto& [k, n] : joint) index += c2(n);
  double sa = 0.0;
  double sb = 0.0;
  for (const auto& [k, n] : ra) sa += c2(n);
  for (const auto& [k, n] : rb) sb += c2(n);
  const double total = c2(static_cast<double>(a.size()));
  const double expected = total > 0.0 ? sa * sb / total : 0.0;
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;
  return (index - expected) / (max_index - expected);
}

}  // namespace fksynth
