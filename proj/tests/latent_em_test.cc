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
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "fksynth/error.h"
#include "fksynth/eval.h"
#include "fksynth/latent_em.h"
#include "support/fixtures.h"
#include "support/oracles.h"

namespace fksynth {
namespace {

using testing::BruteJoint;
using testing::ForEachAssignment;

struct Instance {
  EncodedRelation child;
  GroupIndex groups;
};

// Builds a child relation whose rows are grouped consecutively by `sizes`.
Instance MakeInstance(std::vector<int> cards, const std::vector<std::vector<int>>& rows,
                      const std::vector<int>& sizes) {
  Instance in;
  for (size_t a = 0; a < cards.size(); ++a) {
    in.child.attributes.push_back({"x" + std::to_string(a), cards[a], {}});
  }
  for (size_t r = 0; r < rows.size(); ++r) {
    in.child.keys.push_back(std::to_string(r));
    for (int v : rows[r]) in.child.codes.push_back(v);
  }
  int next = 0;
  for (size_t g = 0; g < sizes.size(); ++g) {
    TupleGroup tg;
    tg.parent_row = static_cast<int>(g);
    for (int i = 0; i < sizes[g]; ++i) {
      tg.members.push_back(next);
      in.groups.row_group.push_back(static_cast<int>(g));
      ++next;
    }
    in.groups.groups.push_back(tg);
  }
  return in;
}

std::vector<MarginalTable> EmptyTables(const std::vector<std::vector<int>>& specs) {
  std::vector<MarginalTable> t;
  for (const auto& v : specs) t.push_back({MarginalSpec(v), {}, 0.0, false});
  return t;
}

// p(z | group) by enumeration of the full joint.
std::vector<double> OraclePosterior(const LatentFkModel& m, const EncodedRelation& child,
                                    const TupleGroup& g) {
  const Domain& dom = m.model.domain();
  const std::vector<double> joint = BruteJoint(dom, m.model.specs(), m.model.theta());
  const int span = m.latent_span();
  const int no = dom.num_observed;
  // Flat index: observed vars first, then z1, z2, row-major.
  auto index = [&](std::span<const int32_t> obs, int z) {
    size_t idx = 0;
    for (int a = 0; a < no; ++a) idx = idx * dom.card[a] + obs[a];
    return idx * span + z;
  };
  std::vector<double> pz(span, 0.0);
  ForEachAssignment(dom.card, [&, i = size_t{0}](const std::vector<int>& x) mutable {
    pz[x[no] * m.k + x[no + 1]] += joint[i++];
  });
  std::vector<double> post(span);
  for (int z = 0; z < span; ++z) {
    double lp = std::log(m.p_z[z]) + std::log(m.PSize(z, static_cast<int>(g.members.size())));
    for (int r : g.members) lp += std::log(joint[index(child.row(r), z)] / pz[z]);
    post[z] = lp;
  }
  const double mx = *std::max_element(post.begin(), post.end());
  double total = 0.0;
  for (double& p : post) total += (p = std::exp(p - mx));
  for (double& p : post) p /= total;
  return post;
}

TEST(LatentEmTest, EStepMatchesEnumeration) {
  const Database db = testing::TwoGroupDatabase();
  const GroupIndex groups = BuildGroups(db, 0);
  const EncodedRelation& child = db.relations[1];
  RngStream rng(3, "estep");
  for (int trial = 0; trial < 10; ++trial) {
    LatentFkModel m = InitializeLatentModel(
        child, 0, 2, 3, EmptyTables({{0}, {0, 1}, {1, 3}, {2, 4}, {3, 4}}), 5.0, 0.0,
        rng.Derive("init", trial));
    for (double& t : m.model.theta()) t = rng.Normal(1.0);
    double total = 0.0;
    for (double& p : m.p_z) total += (p = 0.1 + rng.Uniform());
    for (double& p : m.p_z) p /= total;
    for (int z = 0; z < m.latent_span(); ++z) {
      double s = 0.0;
      for (int i = 0; i < 3; ++i) s += (m.p_size[z * 3 + i] = 0.1 + rng.Uniform());
      for (int i = 0; i < 3; ++i) m.p_size[z * 3 + i] /= s;
    }
    const Responsibilities resp = EStep(m, child, groups, trial % 2 + 1);
    ASSERT_EQ(resp.num_groups(), 2u);
    for (size_t g = 0; g < groups.groups.size(); ++g) {
      const std::vector<double> oracle = OraclePosterior(m, child, groups.groups[g]);
      for (int z = 0; z < m.latent_span(); ++z) {
        EXPECT_NEAR(resp.row(g)[z], oracle[z], 1e-10);
      }
      const int argmax =
          static_cast<int>(std::max_element(oracle.begin(), oracle.end()) - oracle.begin());
      EXPECT_EQ(resp.hard[g], argmax);
    }
  }
}

TEST(LatentEmTest, SingleLatentValueIsCertain) {
  const Database db = testing::TwoGroupDatabase();
  const GroupIndex groups = BuildGroups(db, 0);
  LatentFkModel m = InitializeLatentModel(db.relations[1], 0, 1, 3,
                                          EmptyTables({{0, 3}, {1}}), 5.0, 0.5,
                                          RngStream(1, "k1"));
  const Responsibilities resp = EStep(m, db.relations[1], groups);
  for (double p : resp.prob) EXPECT_DOUBLE_EQ(p, 1.0);
}

TEST(LatentEmTest, ZeroThetaGivesUniformPosterior) {
  const Database db = testing::TwoGroupDatabase();
  const GroupIndex groups = BuildGroups(db, 0);
  LatentFkModel m = InitializeLatentModel(db.relations[1], 0, 3, 3,
                                          EmptyTables({{0, 3}, {1, 2, 4}}), 5.0, 0.0,
                                          RngStream(1, "zero"));
  const Responsibilities resp = EStep(m, db.relations[1], groups);
  for (double p : resp.prob) EXPECT_NEAR(p, 1.0 / 9.0, 1e-14);
  for (int h : resp.hard) EXPECT_EQ(h, 0);
}

TEST(LatentEmTest, ImpossibleGroupFallsBackToUniform) {
  const Database db = testing::TwoGroupDatabase();
  const GroupIndex groups = BuildGroups(db, 0);
  LatentFkModel m = InitializeLatentModel(db.relations[1], 0, 2, 3,
                                          EmptyTables({{0, 3}}), 5.0, 0.0,
                                          RngStream(1, "fallback"));
  // No latent value allows a group of size 3.
  for (int z = 0; z < 4; ++z) {
    m.p_size[z * 3 + 0] = 0.5;
    m.p_size[z * 3 + 1] = 0.5;
    m.p_size[z * 3 + 2] = 0.0;
  }
  const Responsibilities resp = EStep(m, db.relations[1], groups);
  EXPECT_EQ(resp.uniform_fallbacks, 1);
  for (double p : resp.row(1)) EXPECT_DOUBLE_EQ(p, 0.25);
}

Responsibilities HardResponsibilities(int span, const std::vector<int>& hard) {
  Responsibilities r;
  r.span = span;
  r.hard = hard;
  r.prob.assign(hard.size() * span, 0.0);
  for (size_t g = 0; g < hard.size(); ++g) r.prob[g * span + hard[g]] = 1.0;
  return r;
}

TEST(LatentEmTest, UpdatePzHandExample) {
  std::vector<int> hard(40, 1);
  std::fill(hard.begin(), hard.begin() + 10, 0);
  const Responsibilities resp = HardResponsibilities(2, hard);
  privacy::Mechanism mech = privacy::Mechanism::Noiseless();
  for (EmMode mode : {EmMode::kSoft, EmMode::kHard}) {
    const std::vector<double> pz = UpdatePZ(resp, mode, 0.0, 1.0, mech, "p_z");
    EXPECT_DOUBLE_EQ(pz[0], 0.25);
    EXPECT_DOUBLE_EQ(pz[1], 0.75);
  }
}

TEST(LatentEmTest, UpdatePSizeHandExample) {
  const Instance in = MakeInstance({2}, std::vector<std::vector<int>>(7, {0}), {2, 2, 3});
  const Responsibilities resp = HardResponsibilities(2, {0, 0, 0});
  privacy::Mechanism mech = privacy::Mechanism::Noiseless();
  const std::vector<double> ps = UpdatePSize(resp, in.groups, 3, EmMode::kSoft, 0.0, 1.0,
                                             mech, "p_size");
  EXPECT_DOUBLE_EQ(ps[0], 0.0);
  EXPECT_DOUBLE_EQ(ps[1], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(ps[2], 1.0 / 3.0);
  // A latent value with no mass gets a uniform size distribution.
  for (int s = 0; s < 3; ++s) EXPECT_DOUBLE_EQ(ps[3 + s], 1.0 / 3.0);
}

TEST(LatentEmTest, SoftUpdatesSplitMassEvenly) {
  Responsibilities r;
  r.span = 2;
  r.hard = {0, 0};
  r.prob = {0.5, 0.5, 0.5, 0.5};
  const Instance in = MakeInstance({2}, std::vector<std::vector<int>>(3, {0}), {1, 2});
  privacy::Mechanism mech = privacy::Mechanism::Noiseless();
  const std::vector<double> pz = UpdatePZ(r, EmMode::kSoft, 0.0, 1.0, mech, "p_z");
  EXPECT_DOUBLE_EQ(pz[0], pz[1]);
  const std::vector<double> ps = UpdatePSize(r, in.groups, 2, EmMode::kSoft, 0.0, 1.0, mech, "s");
  EXPECT_EQ(ps, (std::vector<double>{0.5, 0.5, 0.5, 0.5}));
  // Hard mode sends both groups to the first latent value.
  const std::vector<double> ph = UpdatePZ(r, EmMode::kHard, 0.0, 1.0, mech, "p_z");
  EXPECT_EQ(ph, (std::vector<double>{1.0, 0.0}));
}

TEST(LatentEmTest, PrivateRunRequiresPositiveNoise) {
  const Responsibilities resp = HardResponsibilities(2, {0, 1});
  privacy::PrivacyLedger ledger;
  privacy::Mechanism mech(&ledger, RngStream(1, "n"));
  EXPECT_THROW(UpdatePZ(resp, EmMode::kSoft, 0.0, 1.0, mech, "p_z"), Error);
  EXPECT_TRUE(ledger.entries().empty());
}

TEST(LatentEmTest, ZeroIterationsLeaveModelUnchanged) {
  const Database db = testing::TwoGroupDatabase();
  const GroupIndex groups = BuildGroups(db, 0);
  LatentFkModel m = InitializeLatentModel(db.relations[1], 0, 2, 3,
                                          EmptyTables({{0, 3}, {1, 4}}), 5.0, 0.5,
                                          RngStream(2, "t0"));
  const std::vector<double> theta = m.model.theta();
  const std::vector<double> pz = m.p_z;
  const std::vector<double> ps = m.p_size;
  privacy::PrivacyLedger ledger;
  privacy::Mechanism mech(&ledger, RngStream(1, "n"));
  privacy::FkNoise noise;
  noise.sigma_latent = noise.sigma_size = noise.sigma_z = 1.0;
  RunEm(m, db.relations[1], groups, 0, noise, {}, mech);
  EXPECT_EQ(m.model.theta(), theta);
  EXPECT_EQ(m.p_z, pz);
  EXPECT_EQ(m.p_size, ps);
  EXPECT_TRUE(ledger.entries().empty());
}

TEST(LatentEmTest, LedgerMatchesClosedForm) {
  const Database db = testing::TwoGroupDatabase();
  const GroupIndex groups = BuildGroups(db, 0);
  LatentFkModel m = InitializeLatentModel(
      db.relations[1], 0, 2, 3, EmptyTables({{0}, {1}, {0, 3}, {1, 4}, {2, 3, 4}}), 5.0, 0.5,
      RngStream(2, "ledger"));
  m.tables[0] = ComputeObserved(db.relations[1], m.model.domain(), MarginalSpec({0}));
  m.tables[1] = ComputeObserved(db.relations[1], m.model.domain(), MarginalSpec({1}));
  privacy::PrivacyLedger ledger;
  privacy::Mechanism mech(&ledger, RngStream(1, "n"));
  privacy::FkNoise noise;
  noise.sigma_latent = 7.0;
  noise.sigma_size = 3.0;
  noise.sigma_z = 2.0;
  EmSettings settings;
  settings.mu_g = 1.5;
  settings.fit.max_steps = 20;
  RunEm(m, db.relations[1], groups, 6, noise, settings, mech);
  const int latent = m.NumLatentSpecs();
  ASSERT_EQ(latent, 3);
  EXPECT_NEAR(ledger.total(), privacy::ConsumptionC1(6, latent, 1.5, 3, 7.0, 3.0, 2.0),
              1e-12);
  for (int it = 0; it < 6; ++it) {
    const std::string p = "em/iter" + std::to_string(it);
    EXPECT_EQ(ledger.CountWithPrefix(p + "/p_z"), 1);
    EXPECT_EQ(ledger.CountWithPrefix(p + "/p_size"), 1);
    EXPECT_EQ(ledger.CountWithPrefix(p + "/latent/"), latent);
  }
  EXPECT_EQ(static_cast<int>(ledger.entries().size()), 6 * (2 + latent));
}

// Two planted clusters: cluster 0 has groups of size 2 and mostly x = 0,
// cluster 1 has groups of size 3 and mostly x = 1.
Instance PlantedInstance(int num_groups, RngStream rng, std::vector<int>* truth) {
  std::vector<std::vector<int>> rows;
  std::vector<int> sizes;
  for (int g = 0; g < num_groups; ++g) {
    const int c = static_cast<int>(rng.UniformInt(2));
    truth->push_back(c);
    sizes.push_back(2 + c);
    for (int i = 0; i < 2 + c; ++i) {
      const bool agree = rng.Uniform() < 0.85;
      const int x = agree ? c : 1 - c;
      const int y = static_cast<int>(rng.UniformInt(3));
      rows.push_back({x, y});
    }
  }
  return MakeInstance({2, 3}, rows, sizes);
}

TEST(LatentEmTest, RecoversPlantedClustersNoiseless) {
  std::vector<int> truth;
  const Instance in = PlantedInstance(600, RngStream(8, "plant"), &truth);
  std::vector<MarginalTable> tables = EmptyTables({{0}, {1}, {0, 2}, {1, 2}, {2, 3}});
  const Domain dom = Domain::ForRelation(in.child, 2, 2);
  const double n = static_cast<double>(in.child.num_rows());
  tables[0] = ComputeObserved(in.child, dom, MarginalSpec({0}));
  tables[1] = ComputeObserved(in.child, dom, MarginalSpec({1}));
  LatentFkModel m = InitializeLatentModel(in.child, 0, 2, 3, std::move(tables), n, 0.5,
                                          RngStream(8, "init"));
  privacy::Mechanism mech = privacy::Mechanism::Noiseless();
  EmSettings settings;
  settings.trace_q = true;
  const EmResult res = RunEm(m, in.child, in.groups, 6, privacy::FkNoise{}, settings, mech);
  EXPECT_GE(ClusterPurity(truth, res.resp.hard), 0.95);
  for (const EmIterationTrace& t : res.iterations) {
    EXPECT_GE(t.q_after, t.q_before - 1e-8);
    for (size_t i = 1; i < t.fit.objective.size(); ++i) {
      EXPECT_GE(t.fit.objective[i], t.fit.objective[i - 1] - 1e-8);
    }
  }
  for (size_t g = 0; g < res.resp.num_groups(); ++g) {
    auto row = res.resp.row(g);
    EXPECT_NEAR(std::accumulate(row.begin(), row.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(LatentEmTest, ThreadCountDoesNotChangeResult) {
  std::vector<int> truth;
  const Instance in = PlantedInstance(300, RngStream(9, "plant"), &truth);
  auto run = [&](int threads) {
    LatentFkModel m = InitializeLatentModel(in.child, 0, 2, 3,
                                            EmptyTables({{0, 2}, {1, 3}}),
                                            static_cast<double>(in.child.num_rows()), 0.5,
                                            RngStream(9, "init"));
    privacy::Mechanism mech = privacy::Mechanism::Noiseless();
    EmSettings s;
    s.threads = threads;
    s.fit.max_steps = 30;
    return RunEm(m, in.child, in.groups, 2, privacy::FkNoise{}, s, mech).resp.prob;
  };
  EXPECT_EQ(run(1), run(4));
}

TEST(LatentEmTest, ParsesModes) {
  EXPECT_EQ(ParseEmMode("soft"), EmMode::kSoft);
  EXPECT_EQ(ParseEmMode("hard"), EmMode::kHard);
  EXPECT_STREQ(EmModeName(EmMode::kHard), "hard");
  EXPECT_THROW(ParseEmMode("medium"), Error);
}

}  // namespace
}  // namespace fksynth
