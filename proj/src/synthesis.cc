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

#include "fksynth/synthesis.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <memory>

#include "fksynth/error.h"

namespace fksynth {
namespace {

EncodedRelation EmptyLike(const ModelBundle& bundle, int r) {
  EncodedRelation rel;
  rel.relation = r;
  rel.attributes = bundle.augmented_attributes[r];
  const size_t slots = bundle.schema.relation(r).foreign_keys.size();
  rel.fk_keys.assign(slots, {});
  rel.fk_rows.assign(slots, {});
  return rel;
}

void AppendRow(EncodedRelation& rel, std::span<const int> values) {
  for (int a = 0; a < rel.num_attrs(); ++a) rel.codes.push_back(values[a]);
  rel.keys.emplace_back();
  for (size_t s = 0; s < rel.fk_keys.size(); ++s) {
    rel.fk_keys[s].emplace_back();
    rel.fk_rows[s].push_back(-1);
  }
}

// Keeps the rows flagged in keep, preserving order.
void FilterRows(EncodedRelation& rel, const std::vector<char>& keep) {
  EncodedRelation out;
  out.relation = rel.relation;
  out.attributes = rel.attributes;
  out.fk_keys.assign(rel.fk_keys.size(), {});
  out.fk_rows.assign(rel.fk_rows.size(), {});
  for (size_t r = 0; r < rel.num_rows(); ++r) {
    if (!keep[r]) continue;
    auto row = rel.row(r);
    out.codes.insert(out.codes.end(), row.begin(), row.end());
    out.keys.push_back(rel.keys[r]);
    for (size_t s = 0; s < rel.fk_keys.size(); ++s) {
      out.fk_keys[s].push_back(rel.fk_keys[s][r]);
      out.fk_rows[s].push_back(rel.fk_rows[s][r]);
    }
  }
  rel = std::move(out);
}

class SamplerCache {
 public:
  SamplerCache(const GraphicalModel& model, std::span<const double> theta)
      : model_(model), theta_(theta) {}

  ConditionalSampler& Get(const std::vector<int>& evidence) {
    auto it = cache_.find(evidence);
    if (it != cache_.end()) return *it->second;
    std::vector<int> ev = evidence;
    // A zero-mass condition falls back to the unconditioned model.
    if (!std::isfinite(model_.Collect(theta_, ev).log_partition)) ev.clear();
    auto sampler = std::make_unique<ConditionalSampler>(model_, theta_, ev);
    return *cache_.emplace(evidence, std::move(sampler)).first->second;
  }

 private:
  const GraphicalModel& model_;
  std::span<const double> theta_;
  std::map<std::vector<int>, std::unique_ptr<ConditionalSampler>> cache_;
};

int SampleSize(const LatentFkModel& m, int z, RngStream& rng) {
  std::span<const double> row(m.p_size.data() + static_cast<size_t>(z) * m.tau, m.tau);
  return 1 + static_cast<int>(rng.Categorical(row));
}

// Latent joint value of a parent row, or -1 for the no-group value.
int ParentLatent(const EncodedRelation& parent, size_t row, const FkComponent& fk) {
  const int k = fk.build.model.k;
  const int z1 = parent.at(row, fk.parent_z1_column);
  const int z2 = parent.at(row, fk.parent_z2_column);
  if (z1 >= k || z2 >= k) return -1;
  return z1 * k + z2;
}

void GenerateFresh(const ModelBundle& bundle, const FkComponent& fk, const EncodedRelation& parent,
                   EncodedRelation& child, RngStream& rng) {
  const FkEdge& e = bundle.schema.edge(fk.edge);
  const LatentFkModel& m = fk.build.model;
  const Domain& dom = m.model.domain();
  SamplerCache samplers(m.model, m.model.theta());
  std::vector<int> evidence(dom.num_vars(), -1);
  std::vector<int> assignment;
  for (size_t p = 0; p < parent.num_rows(); ++p) {
    const int z = ParentLatent(parent, p, fk);
    if (z < 0) continue;
    const int s = SampleSize(m, z, rng);
    evidence[m.z1_var()] = z / m.k;
    evidence[m.z2_var()] = z % m.k;
    ConditionalSampler& sampler = samplers.Get(evidence);
    for (int i = 0; i < s; ++i) {
      sampler.Sample(rng, assignment);
      AppendRow(child, assignment);
      child.fk_rows[e.fk_slot].back() = static_cast<int>(p);
    }
  }
}

void AssignRestricted(const ModelBundle& bundle, const FkComponent& fk,
                      const EncodedRelation& parent, EncodedRelation& child, RngStream& rng,
                      SynthesisReport& report) {
  const FkEdge& e = bundle.schema.edge(fk.edge);
  const LatentFkModel& m = fk.build.model;
  const Domain& dom = m.model.domain();
  if (child.num_attrs() != dom.num_observed) {
    Fail(ErrorCode::kDimensionMismatch, "synthetic child does not match the key model");
  }
  // Distinct patterns of S with a stack of free rows each.
  std::map<std::vector<int>, int> ids;
  std::vector<std::vector<int>> free_rows;
  std::vector<std::vector<int>> patterns;
  for (size_t r = 0; r < child.num_rows(); ++r) {
    auto row = child.row(r);
    std::vector<int> key(row.begin(), row.end());
    auto [it, inserted] = ids.emplace(key, static_cast<int>(patterns.size()));
    if (inserted) {
      patterns.push_back(key);
      free_rows.emplace_back();
    }
    free_rows[it->second].push_back(static_cast<int>(r));
  }
  for (auto& rows : free_rows) std::reverse(rows.begin(), rows.end());
  const size_t np = patterns.size();
  const int64_t span = m.latent_span();
  // Per pattern and z, exp(score) scaled per z for stability.
  std::vector<double> weight(np * span);
  {
    std::vector<int> assignment(dom.num_vars(), 0);
    std::vector<double> ls(span);
    std::vector<double> zmax(span, -INFINITY);
    std::vector<double> logs(np * span);
    for (size_t p = 0; p < np; ++p) {
      for (int a = 0; a < dom.num_observed; ++a) assignment[a] = patterns[p][a];
      m.model.ScoreLatent(m.model.theta(), assignment, ls);
      for (int64_t z = 0; z < span; ++z) {
        logs[p * span + z] = ls[z];
        zmax[z] = std::max(zmax[z], ls[z]);
      }
    }
    for (size_t p = 0; p < np; ++p) {
      for (int64_t z = 0; z < span; ++z) weight[p * span + z] = std::exp(logs[p * span + z] - zmax[z]);
    }
  }
  size_t remaining = child.num_rows();
  report.restricted_pool[fk.edge] = remaining;
  size_t used = 0;
  std::vector<double> w(np);
  for (size_t p = 0; p < parent.num_rows(); ++p) {
    const int z = ParentLatent(parent, p, fk);
    if (z < 0) continue;
    int s = SampleSize(m, z, rng);
    if (remaining == 0) {
      ++report.exhausted_parents[fk.edge];
      continue;
    }
    if (static_cast<size_t>(s) > remaining) {
      s = static_cast<int>(remaining);
      ++report.clipped_groups[fk.edge];
    }
    for (size_t q = 0; q < np; ++q) {
      w[q] = static_cast<double>(free_rows[q].size()) * weight[q * span + z];
    }
    for (int i = 0; i < s; ++i) {
      double total = 0.0;
      for (double x : w) total += x;
      size_t q;
      if (total > 0.0) {
        q = rng.Categorical(w);
      } else {
        // All remaining patterns underflowed; take any free row.
        q = 0;
        while (free_rows[q].empty()) ++q;
      }
      const int row = free_rows[q].back();
      free_rows[q].pop_back();
      w[q] = static_cast<double>(free_rows[q].size()) * weight[q * span + z];
      child.fk_rows[e.fk_slot][row] = static_cast<int>(p);
      --remaining;
      ++used;
    }
  }
  report.restricted_used[fk.edge] = used;
  report.restricted_dropped[fk.edge] = remaining;
  if (report.exhausted_parents[fk.edge] > 0) {
    report.warnings.push_back("restriction exhausted on " + bundle.schema.EdgeName(fk.edge) +
                              ": " + std::to_string(report.exhausted_parents[fk.edge]) +
                              " parents left empty");
  }
  std::vector<char> keep(child.num_rows());
  for (size_t r = 0; r < child.num_rows(); ++r) keep[r] = child.fk_rows[e.fk_slot][r] >= 0;
  FilterRows(child, keep);
}

}  // namespace

EncodedRelation InferPublicLatent(const ModelBundle& bundle, int relation, RngStream rng) {
  const EncodedRelation& real = bundle.public_relations.at(relation);
  const auto it = bundle.standalone.find(relation);
  if (it == bundle.standalone.end()) return real;
  const GraphicalModel& model = it->second.model.model;
  const int public_attrs = static_cast<int>(bundle.schema.relation(relation).attributes.size());
  EncodedRelation out = real;
  SamplerCache samplers(model, model.theta());
  std::vector<int> evidence(model.domain().num_vars(), -1);
  std::vector<int> assignment;
  for (size_t r = 0; r < out.num_rows(); ++r) {
    for (int a = 0; a < public_attrs; ++a) evidence[a] = real.at(r, a);
    samplers.Get(evidence).Sample(rng, assignment);
    for (int a = public_attrs; a < out.num_attrs(); ++a) {
      out.codes[r * out.attributes.size() + a] = assignment[a];
    }
  }
  return out;
}

Database Synthesize(const ModelBundle& bundle, RngStream rng, const SynthesisOptions& options,
                    SynthesisReport* report_out) {
  const DatabaseSchema& schema = bundle.schema;
  SynthesisReport report;
  Database out{schema, {}};
  std::vector<char> present(schema.num_relations(), 0);
  for (int r = 0; r < schema.num_relations(); ++r) out.relations.push_back(EmptyLike(bundle, r));

  for (const auto& [r, rel] : bundle.public_relations) {
    out.relations[r] = InferPublicLatent(bundle, r, rng.Derive("public_latent", r));
    present[r] = 1;
  }
  const int primary = schema.primary_relation();
  if (auto it = bundle.standalone.find(primary); it != bundle.standalone.end()) {
    const SingleRelationModel& sm = it->second.model;
    const double n = options.primary_rows >= 0.0 ? options.primary_rows : sm.n_tilde;
    const size_t rows = static_cast<size_t>(std::llround(std::max(0.0, n)));
    ConditionalSampler sampler(sm.model, sm.model.theta());
    RngStream prng = rng.Derive("primary");
    std::vector<int> assignment;
    for (size_t i = 0; i < rows; ++i) {
      sampler.Sample(prng, assignment);
      AppendRow(out.relations[primary], assignment);
    }
    present[primary] = 1;
  }

  const std::vector<int>& order = schema.private_fk_order();
  for (size_t i = order.size(); i-- > 0;) {
    const int edge = order[i];
    const FkEdge& e = schema.edge(edge);
    const FkComponent& fk = bundle.fks.at(edge);
    if (!present[e.parent]) {
      Fail(ErrorCode::kInvalidArgument, "parent of " + schema.EdgeName(edge) + " not synthesized");
    }
    RngStream erng = rng.Derive("edge", edge);
    if (present[e.child]) {
      AssignRestricted(bundle, fk, out.relations[e.parent], out.relations[e.child], erng, report);
    } else {
      GenerateFresh(bundle, fk, out.relations[e.parent], out.relations[e.child], erng);
      present[e.child] = 1;
    }
  }

  for (int r = 0; r < schema.num_relations(); ++r) {
    EncodedRelation& rel = out.relations[r];
    if (!schema.relation(r).is_private()) continue;
    for (size_t row = 0; row < rel.num_rows(); ++row) rel.keys[row] = std::to_string(row + 1);
  }
  for (int r = 0; r < schema.num_relations(); ++r) {
    EncodedRelation& rel = out.relations[r];
    if (!schema.relation(r).is_private()) continue;
    for (size_t s = 0; s < rel.fk_rows.size(); ++s) {
      const int parent = schema.edge(schema.EdgeIndex(r, static_cast<int>(s))).parent;
      for (size_t row = 0; row < rel.num_rows(); ++row) {
        const int pr = rel.fk_rows[s][row];
        rel.fk_keys[s][row] = pr >= 0 ? out.relations[parent].keys[pr] : std::string();
      }
    }
  }
  for (const EncodedRelation& rel : out.relations) report.rows.push_back(rel.num_rows());
  if (report_out != nullptr) *report_out = std::move(report);
  return out;
}

void WriteDatabase(const Database& db, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) Fail(ErrorCode::kIo, "cannot create " + dir);
  for (const EncodedRelation& rel : db.relations) {
    const std::string name = db.schema.relation(rel.relation).name;
    WriteCsvFile((std::filesystem::path(dir) / (name + ".csv")).string(),
                 EncodeToCsv(db.schema, rel));
  }
}

}  // namespace fksynth
