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

#include "commands.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "fksynth/datastore.h"
#include "fksynth/error.h"
#include "fksynth/eval.h"
#include "fksynth/pipeline.h"
#include "fksynth/schema.h"
#include "fksynth/synthesis.h"
#include "json.hpp"

namespace fksynth::cli {
namespace {

namespace fs = std::filesystem;

void WriteJsonFile(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) Fail(ErrorCode::kIo, "cannot write " + path.string());
  out << j.dump(2) << "\n";
}

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) Fail(ErrorCode::kIo, "cannot read " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, path + ": " + e.what());
  }
}

}  // namespace

int LogLevel() {
  const char* v = std::getenv("FKSYNTH_LOG");
  if (v == nullptr) return 1;
  return std::atoi(v);
}

int RunSynth(const SynthArgs& args, std::ostream& log) {
  const int level = LogLevel();
  const DatabaseSchema schema = LoadSchemaFile(args.schema);
  Database db = LoadDatabase(schema, args.data);
  const TruncationReport trunc = Truncate(db);
  if (level >= 1) log << "loaded " << schema.num_relations() << " relations, truncation removed " << trunc.total() << " tuples\n";

  ModelConfig config;
  config.epsilon = args.epsilon;
  config.delta = args.delta;
  config.seed = args.seed;
  config.noiseless = args.noiseless;
  config.selection.budget = args.budget;
  config.selection.mode = args.mode;
  config.selection.threads = args.threads;
  config.selection.max_latent_card = args.max_latent_card;
  const ModelBundle bundle = ModelDatabase(db, config);
  const double bound = bundle.plan.bound();
  if (bundle.ledger.total() > bound * (1.0 + 1e-12)) {
    Fail(ErrorCode::kInvalidArgument, "ledger total exceeds the privacy bound");
  }
  if (level >= 1) {
    log << "modeled " << bundle.fks.size() << " keys and " << bundle.standalone.size()
        << " standalone relations; consumption " << bundle.ledger.total() << " of " << bound << "\n";
  }
  if (level >= 2) {
    for (const auto& [edge, fk] : bundle.fks) log << fk.build.trace.dump() << "\n";
  }
  SaveBundle(bundle, args.out);

  SynthesisOptions options;
  options.primary_rows = args.primary_rows;
  SynthesisReport report;
  const Database syn = Synthesize(bundle, RngStream(args.seed, "synthesis"), options, &report);
  WriteDatabase(syn, (fs::path(args.out) / "synthetic").string());
  nlohmann::json rj;
  rj["truncated_tuples"] = trunc.removed;
  rj["rows"] = nlohmann::json::object();
  for (int r = 0; r < schema.num_relations(); ++r) rj["rows"][schema.relation(r).name] = report.rows[r];
  rj["warnings"] = report.warnings;
  WriteJsonFile(fs::path(args.out) / "synthesis.json", rj);
  for (const std::string& w : report.warnings) log << "warning: " << w << "\n";
  if (level >= 1) {
    log << "wrote synthetic database to " << (fs::path(args.out) / "synthetic").string() << "\n";
  }
  return 0;
}

int RunEval(const EvalArgs& args, std::ostream& out) {
  const DatabaseSchema schema = LoadSchemaFile(args.schema);
  const Database truth = LoadDatabase(schema, args.truth);
  const Database syn = LoadDatabase(schema, args.synthetic);
  const TwoLevel tl = DefaultTwoLevel(schema);
  const auto queries = GenQueries(schema, tl, args.queries, args.children, args.attrs,
                                  RngStream(args.seed, "queries"));
  const QueryReport report = CompareOnQueries(truth, syn, tl, queries);
  const double tv = SizePatternTv(truth, syn, tl);
  out << "relation pair " << schema.relation(tl.parent).name << " <- "
      << schema.relation(tl.child).name << "\n";
  out << "queries " << queries.size() << "\n";
  out << "mean_relative_error " << report.mean_relative_error << "\n";
  out << "size_pattern_tv " << tv << "\n";
  if (!args.out.empty()) {
    nlohmann::json j;
    j["mean_relative_error"] = report.mean_relative_error;
    j["size_pattern_tv"] = tv;
    j["queries"] = nlohmann::json::array();
    for (size_t i = 0; i < queries.size(); ++i) {
      nlohmann::json q = QueryToJson(schema, tl, queries[i]);
      q["truth"] = report.truth[i];
      q["synthetic"] = report.synthetic[i];
      q["relative_error"] = report.relative_error[i];
      j["queries"].push_back(std::move(q));
    }
    WriteJsonFile(args.out, j);
  }
  return 0;
}

int RunAudit(const std::string& ledger_path, std::ostream& out) {
  const AuditReport report = AuditLedgerJson(ReadJsonFile(ledger_path));
  out << FormatAudit(report);
  return 0;
}

int RunBench(const BenchArgs& args, std::ostream& out) {
  const Benchmark bench = GenBenchmark(args.profile, {args.groups}, RngStream(args.seed, "benchmark"));
  WriteBenchmark(bench, args.out);
  for (const EncodedRelation& rel : bench.db.relations) {
    out << bench.db.schema.relation(rel.relation).name << " " << rel.num_rows() << "\n";
  }
  return 0;
}

}  // namespace fksynth::cli
