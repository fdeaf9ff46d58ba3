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

#ifndef FKSYNTH_LATENT_EM_H_
#define FKSYNTH_LATENT_EM_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fksynth/datastore.h"
#include "fksynth/graphical_model.h"
#include "fksynth/marginal.h"
#include "fksynth/privacy.h"
#include "fksynth/rng.h"

namespace fksynth {

enum class EmMode { kSoft, kHard };

const char* EmModeName(EmMode mode);
EmMode ParseEmMode(std::string_view name);

// Model of one private foreign key: a log-linear model over the child's
// attributes plus two latent group attributes Z1, Z2 of size k each, a prior
// over the joint latent value z = z1 * k + z2, and a group-size distribution
// over {1..tau} conditioned on z.
struct LatentFkModel {
  int edge = -1;
  int k = 1;
  int tau = 1;
  GraphicalModel model;
  // One table per model spec. Observed tables are measured once; latent
  // tables are replaced on every EM iteration.
  std::vector<MarginalTable> tables;
  double n_tilde = 0.0;
  std::vector<double> p_z;     // k * k
  std::vector<double> p_size;  // (k * k) x tau, row z holds p(s = 1..tau | z)

  int latent_span() const { return k * k; }
  int z1_var() const { return model.domain().num_observed; }
  int z2_var() const { return model.domain().num_observed + 1; }
  double PSize(int z, int size) const { return p_size[static_cast<size_t>(z) * tau + size - 1]; }
  // Concatenated table counts in parameter order.
  std::vector<double> Data() const;
  int NumLatentSpecs() const;
};

// Builds the model over the child's current columns with the given specs
// and tables (latent tables may be empty). theta starts at zero plus
// N(0, init_scale^2) on latent cells so that the latent values are not
// exchangeable; p_z and p_size start uniform.
LatentFkModel InitializeLatentModel(const EncodedRelation& child, int edge, int k,
                                    int tau, std::vector<MarginalTable> tables,
                                    double n_tilde, double init_scale, RngStream rng,
                                    int64_t clique_cap = kDefaultCliqueCap);

struct Responsibilities {
  int64_t span = 1;
  std::vector<double> prob;  // groups x span
  std::vector<int> hard;     // argmax, lowest z on ties
  int64_t uniform_fallbacks = 0;

  size_t num_groups() const { return hard.size(); }
  std::span<const double> row(size_t g) const {
    return {prob.data() + g * span, static_cast<size_t>(span)};
  }
};

// p(z | G) proportional to p_z(z) p_size(|G| | z) prod_t p(t | z), where
// p(t | z) comes from the model's joint over (t, z). Groups whose
// likelihood vanishes for every z get uniform rows.
Responsibilities EStep(const LatentFkModel& model, const EncodedRelation& child,
                       const GroupIndex& groups, int threads = 1);

// Rows of one-hot hard assignments, or the soft rows, as used by the counts.
std::vector<double> AssignmentWeights(const Responsibilities& resp, EmMode mode);

// Noisy clamped (soft or hard) counts over z, normalized; uniform when all
// clamped counts are zero. One measurement of sensitivity mu_g.
std::vector<double> UpdatePZ(const Responsibilities& resp, EmMode mode, double sigma_z,
                             double mu_g, privacy::Mechanism& mechanism,
                             const std::string& label);

// Noisy clamped size-by-z counts normalized per z; a z whose column is zero
// gets the uniform distribution over {1..tau}. One measurement.
std::vector<double> UpdatePSize(const Responsibilities& resp, const GroupIndex& groups,
                                int tau, EmMode mode, double sigma_size, double mu_g,
                                privacy::Mechanism& mechanism, const std::string& label);

// Replaces every latent table by its expected counts under the assignment
// weights plus noise, one measurement of sensitivity tau * mu_g per table.
void MaterializeLatentTables(LatentFkModel& model, const EncodedRelation& child,
                             const GroupIndex& groups, const Responsibilities& resp,
                             EmMode mode, double sigma_latent, double mu_g,
                             privacy::Mechanism& mechanism, const std::string& label);

// Expected complete-data log-likelihood
//   sum_G sum_z r(z | G) [log p_z(z) + log p_size(|G| | z) + sum_t log p(t | z)].
// Terms with r = 0 contribute nothing.
double QFunction(const LatentFkModel& model, const EncodedRelation& child,
                 const GroupIndex& groups, const Responsibilities& resp);

struct EmSettings {
  EmMode mode = EmMode::kSoft;
  double mu_g = 1.0;
  int threads = 1;
  FitOptions fit;
  std::string label = "em";
  // Record Q before and after the closed-form updates (extra inference).
  bool trace_q = false;
};

struct EmIterationTrace {
  double q_before = 0.0;  // after the E-step, old p_z and p_size
  double q_after = 0.0;   // same responsibilities, updated p_z and p_size
  FitResult fit;
  int64_t uniform_fallbacks = 0;
};

struct EmResult {
  Responsibilities resp;  // E-step against the returned parameters
  std::vector<EmIterationTrace> iterations;
};

// Runs `iterations` rounds of E-step, p_z and p_size updates, latent table
// materialization and a theta refit, then a final E-step.
EmResult RunEm(LatentFkModel& model, const EncodedRelation& child,
               const GroupIndex& groups, int iterations, const privacy::FkNoise& noise,
               const EmSettings& settings, privacy::Mechanism& mechanism);

}  // namespace fksynth

#endif  // FKSYNTH_LATENT_EM_H_
