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

#include <gtest/gtest.h>

#include "fksynth/error.h"
#include "fksynth/marginal.h"
#include "support/fixtures.h"

namespace fksynth {
namespace {

using testing::TwoGroupDatabase;

TEST(MarginalTest, TwoGroupPairCounts) {
  Database db = TwoGroupDatabase();
  Domain d = Domain::ForRelation(db.relations[1], 0, 1);
  MarginalTable t = ComputeObserved(db.relations[1], d, MarginalSpec({0, 1}));
  EXPECT_EQ(t.counts, (std::vector<double>{1, 1, 2, 1}));
}

TEST(MarginalTest, SingleAttributesSumToRows) {
  Database db = TwoGroupDatabase();
  Domain d = Domain::ForRelation(db.relations[1], 0, 1);
  for (int a = 0; a < 3; ++a) {
    EXPECT_DOUBLE_EQ(ComputeObserved(db.relations[1], d, MarginalSpec({a})).Total(), 5.0);
  }
}

TEST(MarginalTest, ThreeWayMatchesRowEnumeration) {
  Database db = TwoGroupDatabase();
  Domain d = Domain::ForRelation(db.relations[1], 0, 1);
  MarginalTable t = ComputeObserved(db.relations[1], d, MarginalSpec({0, 1, 2}));
  // Rows (A1,A2,A3): 001, 100, 011, 101, 110.
  std::vector<double> want(8, 0.0);
  want[0b001] = 1;
  want[0b100] = 1;
  want[0b011] = 1;
  want[0b101] = 1;
  want[0b110] = 1;
  EXPECT_EQ(t.counts, want);
}

TEST(MarginalTest, LatentAttributeRejectedForObservedCounts) {
  Database db = TwoGroupDatabase();
  Domain d = Domain::ForRelation(db.relations[1], 1, 2);
  EXPECT_THROW(ComputeObserved(db.relations[1], d, MarginalSpec({0, 3})), Error);
}

TEST(MarginalTest, LatentExpectedCounts) {
  Database db = TwoGroupDatabase();
  GroupIndex groups = BuildGroups(db, 0);
  Domain d = Domain::ForRelation(db.relations[1], 1, 2);
  const MarginalSpec spec({0, 3});
  // Point mass on z = 1.
  MarginalTable point = ComputeLatentExpected(db.relations[1], groups, d, spec,
                                              std::vector<double>{0, 1, 0, 1});
  MarginalTable obs = ComputeObserved(db.relations[1], d, MarginalSpec({0}));
  EXPECT_EQ(point.counts, (std::vector<double>{0, obs.counts[0], 0, obs.counts[1]}));
  // Uniform responsibilities halve each slice.
  MarginalTable uni = ComputeLatentExpected(db.relations[1], groups, d, spec,
                                            std::vector<double>{0.5, 0.5, 0.5, 0.5});
  EXPECT_EQ(uni.counts, (std::vector<double>{1, 1, 1.5, 1.5}));
  // Hand summation: group 1 = {t1 (A1=0), t2 (A1=1)} with (0.3, 0.7);
  // group 2 = {t3 (0), t4 (1), t5 (1)} with (0.6, 0.4).
  MarginalTable mixed = ComputeLatentExpected(db.relations[1], groups, d, spec,
                                              std::vector<double>{0.3, 0.7, 0.6, 0.4});
  const std::vector<double> want = {0.3 + 0.6, 0.7 + 0.4, 0.3 + 1.2, 0.7 + 0.8};
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(mixed.counts[i], want[i], 1e-12);
  EXPECT_NEAR(mixed.Total(), 5.0, 1e-9);
  EXPECT_THROW(ComputeLatentExpected(db.relations[1], groups, d, spec,
                                     std::vector<double>{1.0}),
               Error);
}

TEST(MarginalTest, TwoLatentCollapseMatchesObserved) {
  Database db = TwoGroupDatabase();
  GroupIndex groups = BuildGroups(db, 0);
  Domain d = Domain::ForRelation(db.relations[1], 2, 2);
  // Joint over (Z1, Z2) per group.
  const std::vector<double> resp = {0.1, 0.2, 0.3, 0.4, 0.25, 0.25, 0.4, 0.1};
  MarginalTable z1 = ComputeLatentExpected(db.relations[1], groups, d, MarginalSpec({1, 3}), resp);
  MarginalTable z12 =
      ComputeLatentExpected(db.relations[1], groups, d, MarginalSpec({1, 3, 4}), resp);
  MarginalTable obs = ComputeObserved(db.relations[1], d, MarginalSpec({1}));
  for (int a = 0; a < 2; ++a) {
    EXPECT_NEAR(z1.counts[a * 2] + z1.counts[a * 2 + 1], obs.counts[a], 1e-12);
    double s = 0.0;
    for (int z = 0; z < 4; ++z) s += z12.counts[a * 4 + z];
    EXPECT_NEAR(s, obs.counts[a], 1e-12);
    // Z1-only spec equals the joint collapsed over Z2.
    EXPECT_NEAR(z1.counts[a * 2], z12.counts[a * 4] + z12.counts[a * 4 + 1], 1e-12);
  }
}

TEST(MarginalTest, NoiseZeroSigmaAndDeterminism) {
  MarginalTable t{MarginalSpec({0}), {1, 2, 3}, 0.0, false};
  privacy::PrivacyLedger ledger;
  privacy::Mechanism mech(&ledger, RngStream(5, "noise"));
  MarginalTable z = t;
  AddGaussianNoise(z, 1.0, 0.0, mech, "zero");
  EXPECT_EQ(z.counts, t.counts);
  EXPECT_EQ(ledger.entries().size(), 0u);
  MarginalTable a = t, b = t;
  privacy::PrivacyLedger l1, l2;
  privacy::Mechanism m1(&l1, RngStream(5, "noise")), m2(&l2, RngStream(5, "noise"));
  AddGaussianNoise(a, 1.0, 2.0, m1, "m");
  AddGaussianNoise(b, 1.0, 2.0, m2, "m");
  EXPECT_EQ(a.counts, b.counts);
  EXPECT_TRUE(a.noisy);
  EXPECT_EQ(l1.entries().size(), 1u);
  EXPECT_DOUBLE_EQ(l1.total(), 0.25);
}

TEST(MarginalTest, NoiseIsUnbiased) {
  privacy::PrivacyLedger ledger;
  privacy::Mechanism mech(&ledger, RngStream(6, "noise"));
  const int trials = 10000;
  const double sigma = 3.0;
  std::vector<double> sum(4, 0.0);
  for (int i = 0; i < trials; ++i) {
    MarginalTable t{MarginalSpec({0}), {5, 6, 7, 8}, 0.0, false};
    AddGaussianNoise(t, 1.0, sigma, mech, "trial");
    for (int c = 0; c < 4; ++c) sum[c] += t.counts[c] - (5 + c);
  }
  for (double s : sum) EXPECT_LE(std::fabs(s / trials), 4 * sigma / std::sqrt(trials));
  EXPECT_EQ(ledger.entries().size(), static_cast<size_t>(trials));
  EXPECT_EQ(mech.draws(), 4 * trials);
}

TEST(MarginalTest, LambdaUsefulness) {
  EXPECT_TRUE(LambdaUseful(4, 1000, 5, 20));
  EXPECT_FALSE(LambdaUseful(100, 100, 5, 20));
  EXPECT_TRUE(LambdaUseful(1000000, 1, 0, 20));
  // Threshold arithmetic: 20 * sqrt(2/pi) * 5 = 79.788...
  EXPECT_TRUE(LambdaUseful(1, 79.79, 5, 20));
  EXPECT_FALSE(LambdaUseful(1, 79.78, 5, 20));
  // Monotone in n and sigma.
  for (double n = 1; n < 2000; n *= 1.7) {
    if (LambdaUseful(10, n, 3, 20)) {
      EXPECT_TRUE(LambdaUseful(10, n * 1.1, 3, 20));
      EXPECT_TRUE(LambdaUseful(10, n, 2.9, 20));
    }
  }
}

TEST(MarginalTest, L1Distance) {
  MarginalTable a{MarginalSpec({0, 1}), {1, 1, 2, 1}, 0, false};
  MarginalTable z{MarginalSpec({0, 1}), {0, 0, 0, 0}, 0, false};
  EXPECT_DOUBLE_EQ(L1Distance(a, a), 0.0);
  EXPECT_DOUBLE_EQ(L1Distance(a, z), 5.0);
  EXPECT_DOUBLE_EQ(L1Distance(z, a), 5.0);
  MarginalTable other{MarginalSpec({0}), {0, 0}, 0, false};
  EXPECT_THROW(L1Distance(a, other), Error);
}

}  // namespace
}  // namespace fksynth
