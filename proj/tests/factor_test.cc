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

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "fksynth/error.h"
#include "fksynth/factor.h"
#include "fksynth/junction_tree.h"
#include "support/oracles.h"

namespace fksynth {
namespace {

using testing::ForEachAssignment;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Value of a factor at a full assignment over domain variables.
double At(const Factor& f, const std::vector<int>& x) {
  size_t idx = 0;
  for (size_t i = 0; i < f.vars.size(); ++i) idx = idx * f.card[i] + x[f.vars[i]];
  return f.values[idx];
}

Factor RandomFactor(RngStream& rng, std::vector<int> vars, const std::vector<int>& card) {
  Factor f(vars, CardsOf(vars, card));
  for (double& v : f.values) v = rng.Normal(2.0);
  return f;
}

TEST(FactorTest, AddIntoBroadcastsEverySubset) {
  RngStream rng(1, "factor");
  const std::vector<int> card = {2, 3, 2, 4};
  const std::vector<std::vector<int>> subsets = {
      {}, {0}, {1}, {3}, {0, 1}, {0, 3}, {1, 2}, {2, 3}, {0, 2, 3}, {0, 1, 2, 3}};
  for (const auto& sub : subsets) {
    Factor t = RandomFactor(rng, {0, 1, 2, 3}, card);
    const Factor orig = t;
    Factor s = RandomFactor(rng, sub, card);
    AddInto(t, s);
    ForEachAssignment(card, [&](const std::vector<int>& x) {
      EXPECT_DOUBLE_EQ(At(t, x), At(orig, x) + At(s, x));
    });
  }
}

TEST(FactorTest, MarginalizeMatchesEnumeration) {
  RngStream rng(2, "factor");
  const std::vector<int> card = {3, 2, 4, 2};
  const std::vector<std::vector<int>> keeps = {
      {}, {0}, {1}, {3}, {0, 1}, {1, 3}, {0, 2}, {2, 3}, {0, 1, 3}, {0, 1, 2, 3}};
  for (const auto& keep : keeps) {
    Factor f = RandomFactor(rng, {0, 1, 2, 3}, card);
    f.values[3] = kNegInf;
    f.values[7] = kNegInf;
    Factor m = Marginalize(f, keep);
    Factor expect(keep, CardsOf(keep, card), 0.0);
    std::vector<double> acc(expect.size(), 0.0);
    ForEachAssignment(card, [&](const std::vector<int>& x) {
      size_t idx = 0;
      for (int v : keep) idx = idx * card[v] + x[v];
      acc[idx] += std::exp(At(f, x));
    });
    for (size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) {
        EXPECT_EQ(m.values[i], kNegInf);
      } else {
        EXPECT_NEAR(m.values[i], std::log(acc[i]), 1e-12);
      }
    }
  }
}

TEST(FactorTest, MarginalizeAllNegInfRowsStayNegInf) {
  Factor f({0, 1}, {2, 2}, kNegInf);
  f.values[0] = 1.0;
  Factor m0 = Marginalize(f, std::vector<int>{0});
  EXPECT_DOUBLE_EQ(m0.values[0], 1.0);
  EXPECT_EQ(m0.values[1], kNegInf);
  Factor m1 = Marginalize(f, std::vector<int>{1});
  EXPECT_DOUBLE_EQ(m1.values[0], 1.0);
  EXPECT_EQ(m1.values[1], kNegInf);
}

TEST(FactorTest, SubtractTreatsNegInfDifferenceAsNegInf) {
  Factor t({0}, {2}, kNegInf);
  t.values[1] = 3.0;
  Factor s({0}, {2}, kNegInf);
  s.values[1] = 1.0;
  SubtractInto(t, s);
  EXPECT_EQ(t.values[0], kNegInf);
  EXPECT_DOUBLE_EQ(t.values[1], 2.0);
}

TEST(FactorTest, EvidenceMasksOtherValues) {
  Factor f({0, 1}, {2, 3}, 0.0);
  ApplyEvidence(f, 1, 2);
  for (int a = 0; a < 2; ++a) {
    for (int b = 0; b < 3; ++b) {
      EXPECT_EQ(f.values[a * 3 + b], b == 2 ? 0.0 : kNegInf);
    }
  }
  EXPECT_DOUBLE_EQ(LogSumExp(f.values), std::log(2.0));
}

TEST(JunctionTreeTest, ChainOfTwoSpecs) {
  Domain d{{2, 2, 2}, 3};
  JunctionTree jt = BuildJunctionTree(d, {MarginalSpec({0, 1}), MarginalSpec({1, 2})});
  ASSERT_EQ(jt.num_cliques(), 2);
  const int child = jt.preorder[1];
  EXPECT_EQ(jt.separator[child], std::vector<int>{1});
  EXPECT_TRUE(jt.HasRunningIntersection());
}

TEST(JunctionTreeTest, SingleSpecSingleClique) {
  Domain d{{3, 2}, 2};
  JunctionTree jt = BuildJunctionTree(d, {MarginalSpec({0, 1})});
  ASSERT_EQ(jt.num_cliques(), 1);
  EXPECT_EQ(jt.cliques[0], (std::vector<int>{0, 1}));
}

TEST(JunctionTreeTest, FourCycleGetsOneFillEdge) {
  Domain d{{2, 2, 2, 2}, 4};
  JunctionTree jt = BuildJunctionTree(
      d, {MarginalSpec({0, 1}), MarginalSpec({1, 2}), MarginalSpec({2, 3}),
          MarginalSpec({0, 3})});
  ASSERT_EQ(jt.num_cliques(), 2);
  for (const auto& c : jt.cliques) EXPECT_EQ(c.size(), 3u);
  // The fill edge is the chord shared by both cliques.
  const auto sep = IntersectVars(jt.cliques[0], jt.cliques[1]);
  EXPECT_EQ(sep.size(), 2u);
  EXPECT_TRUE(jt.HasRunningIntersection());
}

TEST(JunctionTreeTest, RandomSpecsSatisfyInvariants) {
  RngStream rng(3, "jt");
  for (int trial = 0; trial < 200; ++trial) {
    auto m = testing::MakeRandomModel(rng, 6, 3, 2, 2);
    JunctionTree jt = BuildJunctionTree(m.domain, m.specs);
    EXPECT_TRUE(jt.HasRunningIntersection());
    for (size_t s = 0; s < m.specs.size(); ++s) EXPECT_GE(jt.spec_clique[s], 0);
    std::vector<bool> covered(m.domain.num_vars(), false);
    for (const auto& c : jt.cliques) {
      for (int v : c) covered[v] = true;
    }
    for (bool c : covered) EXPECT_TRUE(c);
  }
}

TEST(JunctionTreeTest, DeterministicForSameInput) {
  RngStream rng(4, "jt");
  auto m = testing::MakeRandomModel(rng, 5, 3, 2, 2);
  JunctionTree a = BuildJunctionTree(m.domain, m.specs);
  JunctionTree b = BuildJunctionTree(m.domain, m.specs);
  EXPECT_EQ(a.cliques, b.cliques);
  EXPECT_EQ(a.parent, b.parent);
}

TEST(JunctionTreeTest, CliqueCapRejects) {
  Domain d{{100, 100, 200}, 3};
  try {
    BuildJunctionTree(d, {MarginalSpec({0, 1, 2})});
    FAIL() << "expected CliqueTooLarge";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kCliqueTooLarge);
  }
  EXPECT_EQ(MaxCliqueSpan(d, {MarginalSpec({0, 1, 2})}), 2'000'000);
}

}  // namespace
}  // namespace fksynth
