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

#ifndef FKSYNTH_TOOLS_COMMANDS_H_
#define FKSYNTH_TOOLS_COMMANDS_H_

#include <cstdint>
#include <iosfwd>
#include <string>

#include "fksynth/latent_em.h"
#include "fksynth/privacy.h"

namespace fksynth::cli {

struct SynthArgs {
  std::string schema;
  std::string data;
  std::string out;
  double epsilon = 1.0;
  double delta = 0.0;  // 0 selects 1/n
  uint64_t seed = 0;
  int threads = 1;
  EmMode mode = EmMode::kSoft;
  privacy::BudgetConfig budget;
  int max_latent_card = 10;
  double primary_rows = -1.0;
  bool noiseless = false;
};

struct EvalArgs {
  std::string schema;
  std::string truth;
  std::string synthetic;
  std::string out;  // optional report path
  int queries = 500;
  int children = 1;
  int attrs = 1;
  uint64_t seed = 0;
};

struct BenchArgs {
  std::string profile;
  std::string out;
  int groups = 1000;
  uint64_t seed = 0;
};

// Each returns the process exit status and reports progress on log.
int RunSynth(const SynthArgs& args, std::ostream& log);
int RunEval(const EvalArgs& args, std::ostream& out);
int RunAudit(const std::string& ledger_path, std::ostream& out);
int RunBench(const BenchArgs& args, std::ostream& out);

// 0 silent, 1 progress, 2 detail; read from FKSYNTH_LOG.
int LogLevel();

}  // namespace fksynth::cli

#endif  // FKSYNTH_TOOLS_COMMANDS_H_
