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

#ifndef FKSYNTH_JUNCTION_TREE_H_
#define FKSYNTH_JUNCTION_TREE_H_

#include <cstdint>
#include <vector>

#include "fksynth/marginal.h"

namespace fksynth {

inline constexpr int64_t kDefaultCliqueCap = 1'000'000;

// Tree of cliques over the domain variables rooted at clique 0. Every domain
// variable appears in at least one clique and every spec is contained in
// some clique. Parents precede their children in preorder().
struct JunctionTree {
  std::vector<std::vector<int>> cliques;
  std::vector<int> parent;                 // -1 for the root
  std::vector<std::vector<int>> children;
  std::vector<std::vector<int>> separator;  // with the parent
  std::vector<int> preorder;
  std::vector<int> spec_clique;  // clique index per input spec

  int num_cliques() const { return static_cast<int>(cliques.size()); }
  // Smallest clique index containing every variable, or -1.
  int FindClique(std::span<const int> vars) const;
  // True when the running-intersection property holds.
  bool HasRunningIntersection() const;
};

// Triangulates the interaction graph of the specs with the min-fill heuristic
// (ties to the smallest variable id), keeps the maximal cliques and joins them
// with a maximum spanning tree on separator size. Throws CliqueTooLarge when
// a clique spans more than clique_cap cells.
JunctionTree BuildJunctionTree(const Domain& domain,
                               const std::vector<MarginalSpec>& specs,
                               int64_t clique_cap = kDefaultCliqueCap);

// Largest clique span that BuildJunctionTree would produce, without building
// the tree; used to screen candidate specs against the cap.
int64_t MaxCliqueSpan(const Domain& domain, const std::vector<MarginalSpec>& specs);

}  // namespace fksynth

#endif  // FKSYNTH_JUNCTION_TREE_H_
