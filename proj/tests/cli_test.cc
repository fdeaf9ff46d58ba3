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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.h"
#include "support/files.h"

namespace fksynth::cli {
namespace {

namespace fs = std::filesystem;

SynthArgs SmallSynth(const fs::path& data, const fs::path& out) {
  SynthArgs a;
  a.schema = (data / "schema.json").string();
  a.data = data.string();
  a.out = out.string();
  a.epsilon = 2.0;
  a.seed = 99;
  a.threads = 2;
  a.budget.candidates = 20;
  a.max_latent_card = 3;
  return a;
}

TEST(CliTest, SynthRunsAreByteIdentical) {
  const fs::path root = testing::ScratchDir("cli_synth");
  std::ostringstream log;
  BenchArgs bench{"chain_3level", (root / "data").string(), 200, 5};
  ASSERT_EQ(RunBench(bench, log), 0);
  ASSERT_EQ(RunSynth(SmallSynth(root / "data", root / "a"), log), 0);
  ASSERT_EQ(RunSynth(SmallSynth(root / "data", root / "b"), log), 0);
  std::string what;
  EXPECT_TRUE(testing::SameTree(root / "a", root / "b", &what)) << what;
  EXPECT_TRUE(fs::exists(root / "a" / "ledger.json"));
  EXPECT_TRUE(fs::exists(root / "a" / "synthetic" / "trip.csv"));

  SynthArgs other = SmallSynth(root / "data", root / "c");
  other.seed = 100;
  ASSERT_EQ(RunSynth(other, log), 0);
  EXPECT_FALSE(testing::SameTree(root / "a", root / "c", &what));

  std::ostringstream audit;
  EXPECT_EQ(RunAudit((root / "a" / "ledger.json").string(), audit), 0);
  EXPECT_NE(audit.str().find("closed"), std::string::npos) << audit.str();

  EvalArgs ev;
  ev.schema = (root / "data" / "schema.json").string();
  ev.truth = (root / "data").string();
  ev.synthetic = (root / "a" / "synthetic").string();
  ev.out = (root / "eval.json").string();
  ev.queries = 30;
  std::ostringstream eval_out;
  EXPECT_EQ(RunEval(ev, eval_out), 0);
  EXPECT_TRUE(fs::exists(root / "eval.json"));
  fs::remove_all(root);
}

TEST(CliTest, EvalOfTruthAgainstItselfIsExact) {
  const fs::path root = testing::ScratchDir("cli_eval");
  std::ostringstream log;
  ASSERT_EQ(RunBench({"two_cluster_households", (root / "data").string(), 150, 1}, log), 0);
  EvalArgs ev;
  ev.schema = (root / "data" / "schema.json").string();
  ev.truth = ev.synthetic = (root / "data").string();
  ev.out = (root / "r.json").string();
  ev.queries = 25;
  std::ostringstream out;
  ASSERT_EQ(RunEval(ev, out), 0);
  std::ifstream in(root / "r.json");
  const nlohmann::json j = nlohmann::json::parse(in);
  EXPECT_EQ(j["mean_relative_error"].get<double>(), 0.0);
  fs::remove_all(root);
}

}  // namespace
}  // namespace fksynth::cli
