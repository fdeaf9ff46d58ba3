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

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "fksynth/error.h"
#include "fksynth/schema.h"

namespace fksynth {
namespace {

RelationSchema Rel(std::string name, PrivacyClass pc,
                   std::vector<ForeignKeyDef> fks = {}) {
  RelationSchema r;
  r.name = std::move(name);
  r.privacy_class = pc;
  r.primary_key = "id";
  r.attributes = {{"a", 2, {}}};
  r.foreign_keys = std::move(fks);
  return r;
}

constexpr auto kPrimary = PrivacyClass::kPrimaryPrivate;
constexpr auto kSecondary = PrivacyClass::kSecondaryPrivate;
constexpr auto kPublic = PrivacyClass::kPublic;

ErrorCode CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::kInvalidArgument;
}

// A concrete instance: tuples per relation, each tuple listing its parent
// tuples as (relation, tuple) pairs.
struct Instance {
  std::vector<std::vector<std::vector<std::pair<int, int>>>> tuples;
};

// Deletes one tuple and everything that transitively refers to it; returns
// the number of deleted tuples per relation.
std::vector<int> CascadeDelete(const Instance& inst, int rel, int tuple) {
  std::vector<std::vector<bool>> dead(inst.tuples.size());
  for (size_t r = 0; r < inst.tuples.size(); ++r) dead[r].assign(inst.tuples[r].size(), false);
  dead[rel][tuple] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (size_t r = 0; r < inst.tuples.size(); ++r) {
      for (size_t t = 0; t < inst.tuples[r].size(); ++t) {
        if (dead[r][t]) continue;
        for (auto [pr, pt] : inst.tuples[r][t]) {
          if (dead[pr][pt]) {
            dead[r][t] = true;
            changed = true;
            break;
          }
        }
      }
    }
  }
  std::vector<int> out;
  for (const auto& d : dead) out.push_back(static_cast<int>(std::count(d.begin(), d.end(), true)));
  return out;
}

int MaxCascade(const Instance& inst, int primary, int rel) {
  int best = 0;
  for (size_t t = 0; t < inst.tuples[primary].size(); ++t) {
    best = std::max(best, CascadeDelete(inst, primary, static_cast<int>(t))[rel]);
  }
  return best;
}

TEST(SchemaTest, TwoRelationCensus) {
  auto s = DatabaseSchema::Validate(
      {Rel("household", kPrimary), Rel("person", kSecondary, {{"hid", "household", 5}})});
  ASSERT_EQ(s.private_fk_order().size(), 1u);
  EXPECT_EQ(s.EdgeName(s.private_fk_order()[0]), "person.hid->household");
  EXPECT_EQ(s.TupleMultiplier(s.RelationIndex("person")), 5);
  EXPECT_EQ(s.TupleMultiplier(s.RelationIndex("household")), 1);
  EXPECT_EQ(s.GroupMultiplier(0), 1);
}

TEST(SchemaTest, ChainMultipliersMatchCascadeOracle) {
  auto s = DatabaseSchema::Validate({Rel("R0", kPrimary),
                                     Rel("R1", kSecondary, {{"r0", "R0", 3}}),
                                     Rel("R2", kSecondary, {{"r1", "R1", 4}})});
  EXPECT_EQ(s.TupleMultiplier(2), 12);
  const int e21 = s.EdgeIndex(2, 0);
  EXPECT_EQ(s.GroupMultiplier(e21), 3);
  // Saturated instance: one R0 tuple, 3 R1 children, 4 R2 children each.
  Instance inst;
  inst.tuples.resize(3);
  inst.tuples[0].push_back({});
  for (int i = 0; i < 3; ++i) {
    inst.tuples[1].push_back({{0, 0}});
    for (int j = 0; j < 4; ++j) inst.tuples[2].push_back({{1, i}});
  }
  EXPECT_EQ(MaxCascade(inst, 0, 2), 12);
  EXPECT_EQ(MaxCascade(inst, 0, 1), 3);  // groups of FK(R2,R1) touched
}

TEST(SchemaTest, DiamondMultiplierMatchesCascadeOracle) {
  auto s = DatabaseSchema::Validate(
      {Rel("R0", kPrimary), Rel("R1", kSecondary, {{"r0", "R0", 2}}),
       Rel("R2", kSecondary, {{"r0", "R0", 2}}),
       Rel("R3", kSecondary, {{"r1", "R1", 2}, {"r2", "R2", 2}})});
  EXPECT_EQ(s.TupleMultiplier(3), 8);
  // Saturated instance with three R0 tuples a, b, c; the R3 tuples under
  // a's R1 children point at b's R2 children and so on around the cycle, so
  // deleting one R0 tuple reaches 4 R3 tuples along each path.
  Instance inst;
  inst.tuples.resize(4);
  for (int r0 = 0; r0 < 3; ++r0) {
    inst.tuples[0].push_back({});
    for (int c = 0; c < 2; ++c) {
      inst.tuples[1].push_back({{0, r0}});
      inst.tuples[2].push_back({{0, r0}});
    }
  }
  for (int r0 = 0; r0 < 3; ++r0) {
    const int other = (r0 + 1) % 3;
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        inst.tuples[3].push_back({{1, 2 * r0 + i}, {2, 2 * other + j}});
      }
    }
  }
  // Bounds are saturated, never exceeded.
  std::map<std::pair<int, int>, int> refs;
  for (const auto& t : inst.tuples[3]) {
    for (auto p : t) ++refs[p];
  }
  for (const auto& [p, c] : refs) EXPECT_EQ(c, 2);
  EXPECT_EQ(MaxCascade(inst, 0, 3), 8);
}

TEST(SchemaTest, MixedTopologyOrder) {
  auto s = DatabaseSchema::Validate(
      {Rel("P1", kPublic), Rel("P2", kPublic),
       Rel("R0", kPrimary, {{"p2", "P2", 3}}),
       Rel("R1", kSecondary, {{"r0", "R0", 2}}),
       Rel("R2", kSecondary, {{"r0", "R0", 2}, {"p1", "P1", 4}}),
       Rel("R3", kSecondary, {{"r2", "R2", 2}, {"r1", "R1", 2}})});
  const auto& order = s.private_fk_order();
  ASSERT_EQ(order.size(), 6u);
  auto pos = [&](const std::string& name) {
    for (size_t i = 0; i < order.size(); ++i) {
      if (s.EdgeName(order[i]) == name) return static_cast<int>(i);
    }
    return -1;
  };
  EXPECT_LT(pos("R3.r2->R2"), pos("R2.r0->R0"));
  EXPECT_LT(pos("R3.r1->R1"), pos("R1.r0->R0"));
  EXPECT_LT(pos("R2.r0->R0"), pos("R0.p2->P2"));
  EXPECT_LT(pos("R1.r0->R0"), pos("R0.p2->P2"));
  EXPECT_LT(pos("R3.r2->R2"), pos("R2.p1->P1"));
  // Total-order property for every chained pair.
  for (int a : order) {
    for (int b : order) {
      if (s.edge(a).parent == s.edge(b).child) EXPECT_LT(s.OrderPosition(a), s.OrderPosition(b));
    }
  }
  EXPECT_EQ(s.TupleMultiplier(s.RelationIndex("P1")), 0);
  const int e0p2 = s.EdgeIndex(s.RelationIndex("R0"), 0);
  EXPECT_EQ(s.GroupMultiplier(e0p2), 1);
  // Standalone models: the public parents only (R0 has a private FK).
  std::vector<std::string> names;
  for (int r : s.StandaloneModelRelations()) names.push_back(s.relation(r).name);
  EXPECT_EQ(names, (std::vector<std::string>{"P1", "P2"}));
}

TEST(SchemaTest, ValidationErrors) {
  EXPECT_EQ(CodeOf([] {
              DatabaseSchema::Validate({Rel("R0", kPrimary, {{"r1", "R1", 2}}),
                                        Rel("R1", kSecondary, {{"r0", "R0", 2}})});
            }),
            ErrorCode::kCyclicForeignKeys);
  EXPECT_EQ(CodeOf([] {
              DatabaseSchema::Validate(
                  {Rel("R0", kPrimary), Rel("P", kPublic, {{"r0", "R0", 2}})});
            }),
            ErrorCode::kPublicRefersToPrivate);
  EXPECT_EQ(CodeOf([] { DatabaseSchema::Validate({Rel("A", kPrimary), Rel("B", kPrimary)}); }),
            ErrorCode::kMultiplePrimaryPrivate);
  EXPECT_EQ(CodeOf([] {
              DatabaseSchema::Validate({Rel("R0", kPrimary, {{"x", "Nowhere", 2}})});
            }),
            ErrorCode::kDanglingFKTarget);
}

TEST(SchemaTest, MultiplierMonotoneInTau) {
  for (int tau = 1; tau < 6; ++tau) {
    auto a = DatabaseSchema::Validate({Rel("R0", kPrimary),
                                       Rel("R1", kSecondary, {{"r0", "R0", tau}}),
                                       Rel("R2", kSecondary, {{"r1", "R1", 2}})});
    auto b = DatabaseSchema::Validate({Rel("R0", kPrimary),
                                       Rel("R1", kSecondary, {{"r0", "R0", tau + 1}}),
                                       Rel("R2", kSecondary, {{"r1", "R1", 2}})});
    EXPECT_LE(a.TupleMultiplier(2), b.TupleMultiplier(2));
    EXPECT_EQ(a.TupleMultiplier(0), 1);
  }
}

TEST(SchemaTest, JsonRoundTrip) {
  const char* text = R"({"relations":[
    {"name":"household","privacy":"primary_private","primary_key":"hid",
     "attributes":[{"name":"tenure","domain_size":2,"labels":["own","rent"]}]},
    {"name":"person","privacy":"secondary_private","primary_key":"pid",
     "attributes":[{"name":"age","domain_size":4}],
     "foreign_keys":[{"column":"hid","references":"household","max_multiplicity":3}]}]})";
  DatabaseSchema s = SchemaFromJson(nlohmann::json::parse(text));
  DatabaseSchema back = SchemaFromJson(SchemaToJson(s));
  EXPECT_EQ(SchemaToJson(back), SchemaToJson(s));
  EXPECT_EQ(back.relation(0).attributes[0].value_labels[1], "rent");
  EXPECT_EQ(back.TupleMultiplier(1), 3);
}

}  // namespace
}  // namespace fksynth
