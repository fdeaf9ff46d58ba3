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

#ifndef FKSYNTH_GRAPHICAL_MODEL_H_
#define FKSYNTH_GRAPHICAL_MODEL_H_

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "fksynth/factor.h"
#include "fksynth/junction_tree.h"
#include "fksynth/marginal.h"
#include "fksynth/rng.h"
#include "json.hpp"

namespace fksynth {

// Clique beliefs of one parameter vector. After Collect() only the root
// belief is final; Distribute() completes the rest.
struct Calibration {
  std::vector<Factor> potentials;
  std::vector<Factor> up;        // message from each clique to its parent
  std::vector<Factor> beliefs;   // unnormalized log beliefs
  double log_partition = 0.0;
  bool distributed = false;
};

// Log-linear model p(x) proportional to exp(sum over specs of theta[cell]).
// The parameter vector concatenates one block per spec in spec order.
class GraphicalModel {
 public:
  GraphicalModel(Domain domain, std::vector<MarginalSpec> specs,
                 int64_t clique_cap = kDefaultCliqueCap);

  const Domain& domain() const { return domain_; }
  const std::vector<MarginalSpec>& specs() const { return specs_; }
  const JunctionTree& tree() const { return tree_; }
  int64_t clique_cap() const { return clique_cap_; }
  int num_specs() const { return static_cast<int>(specs_.size()); }
  size_t num_params() const { return offsets_.back(); }
  size_t offset(int spec) const { return offsets_[spec]; }
  size_t spec_size(int spec) const { return offsets_[spec + 1] - offsets_[spec]; }
  int FindSpec(const MarginalSpec& spec) const;

  std::vector<double>& theta() { return theta_; }
  const std::vector<double>& theta() const { return theta_; }

  // Appends a spec with zero parameters and rebuilds the tree. Returns the
  // existing index when the spec is already present.
  int AddSpec(const MarginalSpec& spec);

  // evidence is empty or holds one value per variable (-1 for free).
  Calibration Collect(std::span<const double> theta,
                      std::span<const int> evidence = {}) const;
  void Distribute(Calibration& cal) const;
  Calibration Calibrate(std::span<const double> theta,
                        std::span<const int> evidence = {}) const;
  double LogPartition(std::span<const double> theta) const;

  // n * p(cell) for every parameter cell, in parameter order.
  std::vector<double> InferMarginals(const Calibration& cal, double n) const;
  // Normalized log-probabilities over vars (sorted), which need not lie in
  // one clique.
  Factor QueryLogMarginal(const Calibration& cal, std::span<const int> vars) const;

  // Unnormalized log-weight of one full assignment.
  double Score(std::span<const double> theta, std::span<const int> assignment) const;
  // Score of (observed part of assignment, z) for every joint latent value z,
  // first latent variable slowest. out has latent_span() entries.
  void ScoreLatent(std::span<const double> theta, std::span<const int> assignment,
                   std::span<double> out) const;
  int64_t latent_span() const { return latent_span_; }

 private:
  void Rebuild();

  Domain domain_;
  std::vector<MarginalSpec> specs_;
  int64_t clique_cap_;
  JunctionTree tree_;
  std::vector<size_t> offsets_;
  std::vector<double> theta_;
  int64_t latent_span_ = 1;
  // Per spec: cell of its latent part for each joint latent value.
  std::vector<std::vector<int32_t>> latent_cell_;
};

// L(theta) = data . theta - n log A(theta).
double Objective(const GraphicalModel& model, std::span<const double> theta,
                 std::span<const double> data, double n);

// dL/dtheta = data - n p(cell).
std::vector<double> EmGradient(const GraphicalModel& model,
                               std::span<const double> theta,
                               std::span<const double> data, double n);

struct FitOptions {
  int max_steps = 300;
  double tolerance = 1e-6;   // on the ascent direction, relative to n
  double armijo = 1e-4;
  int max_backtracks = 60;
};

struct FitResult {
  std::vector<double> theta;
  std::vector<double> objective;  // at the start and after each accepted step
  int steps = 0;
  bool converged = false;
};

// Gradient ascent on L with Barzilai-Borwein step proposals and Armijo
// backtracking. The ascent direction is the gradient with its mean removed
// within each spec block; adding a constant to a block does not change the
// distribution, and for counts whose blocks all total n the two coincide.
FitResult FitTheta(const GraphicalModel& model, std::vector<double> theta,
                   std::span<const double> data, double n,
                   const FitOptions& options = {});

// Ancestral sampler over the junction tree conditioned on evidence.
class ConditionalSampler {
 public:
  ConditionalSampler(const GraphicalModel& model, std::span<const double> theta,
                     std::span<const int> evidence = {});

  // Fills one value per domain variable.
  void Sample(RngStream& rng, std::vector<int>& assignment);

 private:
  const std::vector<double>& Cumulative(int clique, int64_t base);

  const GraphicalModel* model_;
  Calibration cal_;
  std::vector<std::vector<int64_t>> free_offsets_;
  std::vector<std::vector<int>> free_vars_;
  std::vector<std::vector<int>> sep_pos_;  // positions of separator vars
  std::vector<std::vector<int64_t>> strides_;
  std::map<std::pair<int, int64_t>, std::vector<double>> cache_;
};

nlohmann::json ModelToJson(const GraphicalModel& model);
GraphicalModel ModelFromJson(const nlohmann::json& j);

}  // namespace fksynth

#endif  // FKSYNTH_GRAPHICAL_MODEL_H_
