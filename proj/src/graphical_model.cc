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

#include "fksynth/graphical_model.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fksynth/error.h"
#include "fksynth/simd/kernels.h"

namespace fksynth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

}  // namespace

GraphicalModel::GraphicalModel(Domain domain, std::vector<MarginalSpec> specs,
                               int64_t clique_cap)
    : domain_(std::move(domain)), specs_(std::move(specs)), clique_cap_(clique_cap) {
  for (const MarginalSpec& s : specs_) {
    for (int v : s.vars) {
      if (v < 0 || v >= domain_.num_vars()) {
        Fail(ErrorCode::kDimensionMismatch,
             "spec " + s.ToString() + " is outside the model domain");
      }
    }
  }
  Rebuild();
  theta_.assign(num_params(), 0.0);
}

void GraphicalModel::Rebuild() {
  tree_ = BuildJunctionTree(domain_, specs_, clique_cap_);
  offsets_.assign(1, 0);
  for (const MarginalSpec& s : specs_) {
    offsets_.push_back(offsets_.back() + domain_.SpanSize(s.vars));
  }
  std::vector<int> latent;
  for (int v = domain_.num_observed; v < domain_.num_vars(); ++v) latent.push_back(v);
  latent_span_ = domain_.SpanSize(latent);
  latent_cell_.assign(specs_.size(), {});
  std::vector<int> zval(latent.size());
  for (size_t s = 0; s < specs_.size(); ++s) {
    auto& cells = latent_cell_[s];
    cells.resize(latent_span_);
    for (int64_t z = 0; z < latent_span_; ++z) {
      int64_t rem = z;
      for (size_t i = latent.size(); i-- > 0;) {
        zval[i] = static_cast<int>(rem % domain_.card[latent[i]]);
        rem /= domain_.card[latent[i]];
      }
      int64_t cell = 0;
      for (int v : specs_[s].vars) {
        if (domain_.is_latent(v)) {
          cell = cell * domain_.card[v] + zval[v - domain_.num_observed];
        }
      }
      cells[z] = static_cast<int32_t>(cell);
    }
  }
}

int GraphicalModel::FindSpec(const MarginalSpec& spec) const {
  for (int i = 0; i < num_specs(); ++i) {
    if (specs_[i] == spec) return i;
  }
  return -1;
}

int GraphicalModel::AddSpec(const MarginalSpec& spec) {
  if (int i = FindSpec(spec); i >= 0) return i;
  std::vector<MarginalSpec> next = specs_;
  next.push_back(spec);
  // Validate (and possibly reject) before touching any state.
  BuildJunctionTree(domain_, next, clique_cap_);
  specs_ = std::move(next);
  Rebuild();
  theta_.resize(num_params(), 0.0);
  return num_specs() - 1;
}

Calibration GraphicalModel::Collect(std::span<const double> theta,
                                    std::span<const int> evidence) const {
  if (theta.size() != num_params()) {
    Fail(ErrorCode::kDimensionMismatch, "theta size does not match the model");
  }
  const JunctionTree& jt = tree_;
  const int m = jt.num_cliques();
  Calibration cal;
  cal.potentials.reserve(m);
  for (int c = 0; c < m; ++c) {
    cal.potentials.emplace_back(jt.cliques[c], CardsOf(jt.cliques[c], domain_.card));
  }
  for (int s = 0; s < num_specs(); ++s) {
    AddInto(cal.potentials[jt.spec_clique[s]], specs_[s].vars,
            theta.subspan(offsets_[s], spec_size(s)));
  }
  if (!evidence.empty()) {
    for (int v = 0; v < domain_.num_vars(); ++v) {
      if (evidence[v] < 0) continue;
      for (Factor& f : cal.potentials) ApplyEvidence(f, v, evidence[v]);
    }
  }
  cal.up.assign(m, Factor());
  cal.beliefs.assign(m, Factor());
  for (int i = m; i-- > 0;) {
    const int c = jt.preorder[i];
    Factor f = cal.potentials[c];
    for (int ch : jt.children[c]) AddInto(f, cal.up[ch]);
    if (jt.parent[c] >= 0) cal.up[c] = Marginalize(f, jt.separator[c]);
    cal.beliefs[c] = std::move(f);
  }
  cal.log_partition = m > 0 ? LogSumExp(cal.beliefs[jt.preorder[0]].values) : 0.0;
  return cal;
}

void GraphicalModel::Distribute(Calibration& cal) const {
  if (cal.distributed) return;
  const JunctionTree& jt = tree_;
  for (int c : jt.preorder) {
    const int p = jt.parent[c];
    if (p < 0) continue;
    Factor without = cal.beliefs[p];
    SubtractInto(without, cal.up[c]);
    AddInto(cal.beliefs[c], Marginalize(without, jt.separator[c]));
  }
  cal.distributed = true;
}

Calibration GraphicalModel::Calibrate(std::span<const double> theta,
                                      std::span<const int> evidence) const {
  Calibration cal = Collect(theta, evidence);
  Distribute(cal);
  return cal;
}

double GraphicalModel::LogPartition(std::span<const double> theta) const {
  return Collect(theta).log_partition;
}

std::vector<double> GraphicalModel::InferMarginals(const Calibration& cal,
                                                   double n) const {
  if (!cal.distributed) {
    Fail(ErrorCode::kInvalidArgument, "calibration was not distributed");
  }
  std::vector<double> out(num_params());
  const auto& k = simd::Kernels();
  for (int s = 0; s < num_specs(); ++s) {
    Factor m = Marginalize(cal.beliefs[tree_.spec_clique[s]], specs_[s].vars);
    double* dst = out.data() + offsets_[s];
    k.exp_shifted(m.values.data(), cal.log_partition, dst, m.size());
    for (size_t i = 0; i < m.size(); ++i) dst[i] *= n;
  }
  return out;
}

Factor GraphicalModel::QueryLogMarginal(const Calibration& cal,
                                        std::span<const int> vars) const {
  if (!cal.distributed) {
    Fail(ErrorCode::kInvalidArgument, "calibration was not distributed");
  }
  const JunctionTree& jt = tree_;
  if (int c = jt.FindClique(vars); c >= 0) {
    Factor f = Marginalize(cal.beliefs[c], vars);
    for (double& v : f.values) v -= cal.log_partition;
    return f;
  }
  // Eliminate over the smallest subtree touching every query variable,
  // keeping the query variables in the messages.
  const int m = jt.num_cliques();
  std::vector<int> marked(m, 0);
  int total = 0;
  for (int v : vars) {
    const int c = jt.FindClique(std::span<const int>(&v, 1));
    if (c < 0) Fail(ErrorCode::kDimensionMismatch, "query variable outside the model");
    if (!marked[c]) {
      marked[c] = 1;
      ++total;
    }
  }
  std::vector<int> below(m, 0);
  for (int i = m; i-- > 0;) {
    const int c = jt.preorder[i];
    below[c] += marked[c];
    if (jt.parent[c] >= 0) below[jt.parent[c]] += below[c];
  }
  int top = jt.preorder[0];
  for (int c : jt.preorder) {
    if (below[c] == total) top = c;  // deepest such clique in preorder
  }
  auto in_steiner = [&](int c) { return below[c] > 0 && (below[c] < total || c == top); };
  // Messages carry the query variables along, so they may exceed the
  // model's clique cap by at most the span of the query itself.
  const int64_t limit = clique_cap_ * SpanOf(std::vector<int>(vars.begin(), vars.end()),
                                             domain_.card);
  std::vector<Factor> msg(m);
  for (int i = m; i-- > 0;) {
    const int c = jt.preorder[i];
    if (!in_steiner(c)) continue;
    Factor f = cal.beliefs[c];
    if (c != top) SubtractInto(f, Marginalize(cal.beliefs[c], jt.separator[c]));
    for (int ch : jt.children[c]) {
      if (!msg[ch].values.empty()) {
        Factor merged(UnionVars(f.vars, msg[ch].vars),
                      CardsOf(UnionVars(f.vars, msg[ch].vars), domain_.card));
        if (SpanOf(merged.vars, domain_.card) > limit) {
          Fail(ErrorCode::kCliqueTooLarge, "marginal query exceeds the clique cap");
        }
        AddInto(merged, f);
        AddInto(merged, msg[ch]);
        f = std::move(merged);
      }
    }
    if (c == top) {
      Factor out = Marginalize(f, vars);
      for (double& v : out.values) v -= cal.log_partition;
      return out;
    }
    std::vector<int> keep = UnionVars(jt.separator[c], vars);
    msg[c] = Marginalize(f, IntersectVars(keep, f.vars));
  }
  Fail(ErrorCode::kInvalidArgument, "marginal query did not reach the subtree top");
}

double GraphicalModel::Score(std::span<const double> theta,
                             std::span<const int> assignment) const {
  double s = 0.0;
  for (int i = 0; i < num_specs(); ++i) {
    s += theta[offsets_[i] + CellIndex(domain_, specs_[i], assignment)];
  }
  return s;
}

void GraphicalModel::ScoreLatent(std::span<const double> theta,
                                 std::span<const int> assignment,
                                 std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < num_specs(); ++i) {
    int64_t obs = 0;
    int64_t lat_span = 1;
    for (int v : specs_[i].vars) {
      if (domain_.is_latent(v)) {
        lat_span *= domain_.card[v];
      } else {
        obs = obs * domain_.card[v] + assignment[v];
      }
    }
    const double* base = theta.data() + offsets_[i] + obs * lat_span;
    const int32_t* cells = latent_cell_[i].data();
    for (int64_t z = 0; z < latent_span_; ++z) out[z] += base[cells[z]];
  }
}

double Objective(const GraphicalModel& model, std::span<const double> theta,
                 std::span<const double> data, double n) {
  if (data.size() != model.num_params()) {
    Fail(ErrorCode::kDimensionMismatch, "data counts do not match the model");
  }
  const double lin = simd::Kernels().dot(data.data(), theta.data(), data.size());
  return lin - n * model.LogPartition(theta);
}

std::vector<double> EmGradient(const GraphicalModel& model,
                               std::span<const double> theta,
                               std::span<const double> data, double n) {
  if (data.size() != model.num_params()) {
    Fail(ErrorCode::kDimensionMismatch, "data counts do not match the model");
  }
  std::vector<double> g = model.InferMarginals(model.Calibrate(theta), n);
  for (size_t i = 0; i < g.size(); ++i) g[i] = data[i] - g[i];
  return g;
}

FitResult FitTheta(const GraphicalModel& model, std::vector<double> theta,
                   std::span<const double> data, double n,
                   const FitOptions& options) {
  if (data.size() != model.num_params() || theta.size() != model.num_params()) {
    Fail(ErrorCode::kDimensionMismatch, "fit inputs do not match the model");
  }
  const auto& k = simd::Kernels();
  const size_t p = theta.size();
  auto objective = [&](const Calibration& cal, const std::vector<double>& th) {
    return k.dot(data.data(), th.data(), p) - n * cal.log_partition;
  };
  auto gradient = [&](const Calibration& cal) {
    std::vector<double> g = model.InferMarginals(cal, n);
    for (size_t i = 0; i < p; ++i) g[i] = data[i] - g[i];
    return g;
  };
  auto project = [&](const std::vector<double>& g) {
    std::vector<double> d = g;
    for (int s = 0; s < model.num_specs(); ++s) {
      double* b = d.data() + model.offset(s);
      const size_t len = model.spec_size(s);
      double mean = 0.0;
      for (size_t i = 0; i < len; ++i) mean += b[i];
      mean /= static_cast<double>(len);
      for (size_t i = 0; i < len; ++i) b[i] -= mean;
    }
    return d;
  };

  FitResult res;
  Calibration cal = model.Calibrate(theta);
  double obj = objective(cal, theta);
  if (!std::isfinite(obj)) {
    Fail(ErrorCode::kNonFiniteObjective, "objective is not finite at the start");
  }
  res.objective.push_back(obj);
  std::vector<double> g = gradient(cal);
  std::vector<double> prev_theta, prev_g;
  const double scale = std::max(n, 1.0);
  double alpha = 1.0 / (scale * std::max(1, model.num_specs()));
  std::vector<double> trial(p);

  for (int step = 0; step < options.max_steps; ++step) {
    const std::vector<double> d = project(g);
    if (k.max_abs(d.data(), p) <= options.tolerance * scale) {
      res.converged = true;
      break;
    }
    if (!prev_theta.empty()) {
      double sy = 0.0, yy = 0.0;
      for (size_t i = 0; i < p; ++i) {
        const double s = theta[i] - prev_theta[i];
        const double y = g[i] - prev_g[i];
        sy += s * y;
        yy += y * y;
      }
      if (sy < 0.0 && yy > 0.0) {
        alpha = -sy / yy;
      } else {
        alpha *= 2.0;
      }
    }
    const double gd = k.dot(g.data(), d.data(), p);
    bool accepted = false;
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      for (size_t i = 0; i < p; ++i) trial[i] = theta[i] + alpha * d[i];
      Calibration tc = model.Collect(trial);
      const double tobj = objective(tc, trial);
      if (std::isfinite(tobj) && tobj >= obj + options.armijo * alpha * gd) {
        model.Distribute(tc);
        prev_theta = theta;
        prev_g = g;
        theta = trial;
        cal = std::move(tc);
        obj = tobj;
        g = gradient(cal);
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;
    res.objective.push_back(obj);
    ++res.steps;
  }
  if (!res.converged) {
    const std::vector<double> d = project(g);
    res.converged = k.max_abs(d.data(), p) <= options.tolerance * scale;
  }
  res.theta = std::move(theta);
  return res;
}

ConditionalSampler::ConditionalSampler(const GraphicalModel& model,
                                       std::span<const double> theta,
                                       std::span<const int> evidence)
    : model_(&model), cal_(model.Calibrate(theta, evidence)) {
  const JunctionTree& jt = model.tree();
  const int m = jt.num_cliques();
  free_offsets_.resize(m);
  free_vars_.resize(m);
  sep_pos_.resize(m);
  strides_.resize(m);
  for (int c = 0; c < m; ++c) {
    const Factor& b = cal_.beliefs[c];
    strides_[c] = b.Strides();
    std::vector<int> free_pos;
    for (size_t i = 0; i < b.vars.size(); ++i) {
      if (std::binary_search(jt.separator[c].begin(), jt.separator[c].end(), b.vars[i])) {
        sep_pos_[c].push_back(static_cast<int>(i));
      } else {
        free_pos.push_back(static_cast<int>(i));
        free_vars_[c].push_back(b.vars[i]);
      }
    }
    std::vector<int64_t>& offs = free_offsets_[c];
    offs.assign(1, 0);
    for (int pos : free_pos) {
      std::vector<int64_t> next;
      next.reserve(offs.size() * b.card[pos]);
      for (int64_t o : offs) {
        for (int x = 0; x < b.card[pos]; ++x) next.push_back(o + x * strides_[c][pos]);
      }
      offs = std::move(next);
    }
  }
}

const std::vector<double>& ConditionalSampler::Cumulative(int clique, int64_t base) {
  auto key = std::make_pair(clique, base);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  const Factor& b = cal_.beliefs[clique];
  const auto& offs = free_offsets_[clique];
  double mx = kNegInf;
  for (int64_t o : offs) mx = std::max(mx, b.values[base + o]);
  if (mx == kNegInf) {
    Fail(ErrorCode::kInvalidArgument, "conditional distribution has no mass");
  }
  std::vector<double> cum(offs.size());
  double acc = 0.0;
  for (size_t i = 0; i < offs.size(); ++i) {
    acc += std::exp(b.values[base + offs[i]] - mx);
    cum[i] = acc;
  }
  return cache_.emplace(key, std::move(cum)).first->second;
}

void ConditionalSampler::Sample(RngStream& rng, std::vector<int>& assignment) {
  const JunctionTree& jt = model_->tree();
  const Domain& dom = model_->domain();
  assignment.assign(dom.num_vars(), 0);
  for (int c : jt.preorder) {
    const Factor& b = cal_.beliefs[c];
    int64_t base = 0;
    for (int pos : sep_pos_[c]) base += assignment[b.vars[pos]] * strides_[c][pos];
    const std::vector<double>& cum = Cumulative(c, base);
    const double u = rng.Uniform() * cum.back();
    size_t idx = static_cast<size_t>(std::upper_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (idx >= cum.size()) idx = cum.size() - 1;
    // Decode the free-variable combination, last free variable fastest.
    size_t rem = idx;
    for (size_t i = free_vars_[c].size(); i-- > 0;) {
      const int v = free_vars_[c][i];
      assignment[v] = static_cast<int>(rem % dom.card[v]);
      rem /= dom.card[v];
    }
  }
}

nlohmann::json ModelToJson(const GraphicalModel& model) {
  nlohmann::json specs = nlohmann::json::array();
  for (const MarginalSpec& s : model.specs()) specs.push_back(s.vars);
  return {{"card", model.domain().card},
          {"num_observed", model.domain().num_observed},
          {"clique_cap", model.clique_cap()},
          {"specs", std::move(specs)},
          {"theta", model.theta()}};
}

GraphicalModel ModelFromJson(const nlohmann::json& j) {
  try {
    Domain d;
    d.card = j.at("card").get<std::vector<int>>();
    d.num_observed = j.at("num_observed").get<int>();
    std::vector<MarginalSpec> specs;
    for (const auto& s : j.at("specs")) specs.emplace_back(s.get<std::vector<int>>());
    GraphicalModel m(std::move(d), std::move(specs), j.at("clique_cap").get<int64_t>());
    std::vector<double> theta = j.at("theta").get<std::vector<double>>();
    if (theta.size() != m.num_params()) {
      Fail(ErrorCode::kParse, "checkpoint theta has the wrong length");
    }
    m.theta() = std::move(theta);
    return m;
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("model checkpoint: ") + e.what());
  }
}

}  // namespace fksynth
