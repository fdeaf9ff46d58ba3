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

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "commands.h"
#include "fksynth/error.h"

namespace {

void AddBudgetFlags(CLI::App* app, fksynth::privacy::BudgetConfig& b) {
  app->add_option("--em-iterations", b.em_iterations, "EM iterations T")->check(CLI::NonNegativeNumber);
  app->add_option("--rounds", b.rounds, "refinement rounds T_C")->check(CLI::NonNegativeNumber);
  app->add_option("--candidates", b.candidates, "candidates per round n_C")->check(CLI::PositiveNumber);
  app->add_option("--increment", b.increment, "insertions per round (0: ceil(d/4))")->check(CLI::NonNegativeNumber);
  app->add_option("--lambda", b.lambda, "usefulness constant")->check(CLI::PositiveNumber);
  app->add_option("--max-candidate-attrs", b.max_candidate_obs_attrs, "observed attributes per candidate")->check(CLI::PositiveNumber);
  app->add_option("--line1-share", b.line1_share, "key budget share of observed marginals");
  app->add_option("--em-share", b.em_share, "key budget share of EM");
  app->add_option("--score-share", b.score_share, "key budget share of candidate scoring");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private synthesis of relational databases"};
  app.require_subcommand(1);

  fksynth::cli::SynthArgs synth;
  std::string em_mode = "soft";
  CLI::App* s = app.add_subcommand("synth", "model a database and write a synthetic copy");
  s->add_option("--schema", synth.schema, "schema JSON")->required();
  s->add_option("--data", synth.data, "directory with one CSV per relation")->required();
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--epsilon", synth.epsilon, "privacy parameter epsilon")->required()->check(CLI::PositiveNumber);
  s->add_option("--delta", synth.delta, "privacy parameter delta (default 1/n)");
  s->add_option("--seed", synth.seed, "random seed");
  s->add_option("--threads", synth.threads, "worker threads")->check(CLI::PositiveNumber);
  s->add_option("--em-mode", em_mode, "soft or hard")->check(CLI::IsMember({"soft", "hard"}));
  s->add_option("--max-latent", synth.max_latent_card, "cap on each latent domain")->check(CLI::PositiveNumber);
  s->add_option("--primary-rows", synth.primary_rows, "rows of the primary relation (default: noisy count)");
  s->add_flag("--noiseless", synth.noiseless, "exact reference run without privacy");
  AddBudgetFlags(s, synth.budget);

  fksynth::cli::EvalArgs eval;
  CLI::App* e = app.add_subcommand("eval", "compare two databases on aggregate queries");
  e->add_option("--schema", eval.schema, "schema JSON")->required();
  e->add_option("--truth", eval.truth, "ground-truth directory")->required();
  e->add_option("--synthetic", eval.synthetic, "synthetic directory")->required();
  e->add_option("--out", eval.out, "per-query report JSON");
  e->add_option("--queries", eval.queries, "number of queries")->check(CLI::PositiveNumber);
  e->add_option("--children", eval.children, "child predicates per query")->check(CLI::Range(1, 2));
  e->add_option("--attrs", eval.attrs, "attributes per predicate")->check(CLI::Range(1, 2));
  e->add_option("--seed", eval.seed, "query seed");

  std::string ledger;
  CLI::App* a = app.add_subcommand("audit", "print the budget breakdown of a run");
  a->add_option("--ledger", ledger, "ledger.json of a synth run")->required();

  fksynth::cli::BenchArgs bench;
  CLI::App* b = app.add_subcommand("bench", "write a planted benchmark database");
  b->add_option("--profile", bench.profile, "two_cluster_households, chain_3level or public_parent")->required();
  b->add_option("--out", bench.out, "output directory")->required();
  b->add_option("--groups", bench.groups, "parents of the main key")->check(CLI::PositiveNumber);
  b->add_option("--seed", bench.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << "error: InvalidArgument: " << err.what() << "\n";
    return 2;
  }

  try {
    if (s->parsed()) {
      synth.mode = fksynth::ParseEmMode(em_mode);
      return fksynth::cli::RunSynth(synth, std::cerr);
    }
    if (e->parsed()) return fksynth::cli::RunEval(eval, std::cout);
    if (a->parsed()) return fksynth::cli::RunAudit(ledger, std::cout);
    if (b->parsed()) return fksynth::cli::RunBench(bench, std::cout);
  } catch (const fksynth::Error& err) {
    std::cerr << "error: " << fksynth::ErrorCodeName(err.code()) << ": " << err.what() << "\n";
    return 1;
  } catch (const std::exception& err) {
    std::cerr << "error: Internal: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
