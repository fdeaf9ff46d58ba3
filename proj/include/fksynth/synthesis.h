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

#ifndef FKSYNTH_SYNTHESIS_H_
#define FKSYNTH_SYNTHESIS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fksynth/datastore.h"
#include "fksynth/pipeline.h"
#include "fksynth/rng.h"

namespace fksynth {

struct SynthesisOptions {
  // Row count of the primary relation when it is sampled from its
  // standalone model; negative selects the noisy count.
  double primary_rows = -1.0;
};

struct SynthesisReport {
  std::vector<size_t> rows;                 // per relation
  std::map<int, size_t> restricted_pool;    // per edge: |S| at the start
  std::map<int, size_t> restricted_used;    // per edge: tuples wired
  std::map<int, size_t> restricted_dropped; // per edge: leftovers removed
  std::map<int, size_t> exhausted_parents;  // per edge: parents left empty
  std::map<int, size_t> clipped_groups;     // per edge: sizes clipped to |S|
  std::vector<std::string> warnings;
};

// Samples the latent columns of every public tuple from its standalone
// model given the tuple's public attributes. Returns the relation with all
// augmented columns filled.
EncodedRelation InferPublicLatent(const ModelBundle& bundle, int relation, RngStream rng);

// Generates a synthetic database (augmented columns retained) by walking the
// private keys in descending order. Only the bundle is read.
Database Synthesize(const ModelBundle& bundle, RngStream rng,
                    const SynthesisOptions& options = {}, SynthesisReport* report = nullptr);

// Writes one CSV per relation with the schema's columns only.
void WriteDatabase(const Database& db, const std::string& dir);

}  // namespace fksynth

#endif  // FKSYNTH_SYNTHESIS_H_
