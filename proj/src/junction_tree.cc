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

#include "fksynth/junction_tree.h"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

#include "fksynth/error.h"
#include "fksynth/factor.h"

namespace fksynth {

namespace {

// Elimination cliques of a min-fill triangulation, maximal ones only, in the
// order they were produced.
std::vector<std::vector<int>> Triangulate(const Domain& domain,
                                          const std::vector<MarginalSpec>& specs) {
  const int n = domain.num_vars();
  std::vector<std::set<int>> adj(n);
  for (const MarginalSpec& s : specs) {
    for (int a : s.vars) {
      for (int b : s.vars) {
        if (a != b) adj[a].insert(b);
      }
    }
  }
  std::vector<bool> gone(n, false);
  std::vector<std::vector<int>> raw;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    int64_t best_fill = 0;
    for (int v = 0; v < n; ++v) {
      if (gone[v]) continue;
      int64_t fill = 0;
      for (auto i = adj[v].begin(); i != adj[v].end(); ++i) {
        for (auto j = std::next(i); j != adj[v].end(); ++j) {
          if (!adj[*i].count(*j)) ++fill;
        }
      }
      if (best < 0 || fill < best_fill) {
        best = v;
        best_fill = fill;
      }
    }
    std::vector<int> clique(adj[best].begin(), adj[best].end());
    clique.push_back(best);
    std::sort(clique.begin(), clique.end());
    for (int a : adj[best]) {
      for (int b : adj[best]) {
        if (a != b) adj[a].insert(b);
      }
    }
    for (int a : adj[best]) adj[a].erase(best);
    adj[best].clear();
    gone[best] = true;
    raw.push_back(std::move(clique));
  }
  std::vector<std::vector<int>> maximal;
  for (size_t i = 0; i < raw.size(); ++i) {
    bool subsumed = false;
    for (size_t j = 0; j < raw.size() && !subsumed; ++j) {
      if (i == j) continue;
      const bool sub = std::includes(raw[j].begin(), raw[j].end(),
                                     raw[i].begin(), raw[i].end());
      // Equal cliques: keep the earlier one.
      if (sub && (raw[j].size() > raw[i].size() || j < i)) subsumed = true;
    }
    if (!subsumed) maximal.push_back(raw[i]);
  }
  return maximal;
}

}  // namespace

int JunctionTree::FindClique(std::span<const int> vars) const {
  for (int c = 0; c < num_cliques(); ++c) {
    if (std::includes(cliques[c].begin(), cliques[c].end(), vars.begin(),
                      vars.end())) {
      return c;
    }
  }
  return -1;
}

bool JunctionTree::HasRunningIntersection() const {
  // For every variable the cliques containing it must form a connected
  // subtree: exactly one of them has a parent outside the set.
  std::set<int> all;
  for (const auto& c : cliques) all.insert(c.begin(), c.end());
  for (int v : all) {
    int tops = 0;
    for (int c = 0; c < num_cliques(); ++c) {
      if (!std::binary_search(cliques[c].begin(), cliques[c].end(), v)) continue;
      const int p = parent[c];
      if (p < 0 || !std::binary_search(cliques[p].begin(), cliques[p].end(), v)) ++tops;
    }
    if (tops != 1) return false;
  }
  return true;
}

int64_t MaxCliqueSpan(const Domain& domain, const std::vector<MarginalSpec>& specs) {
  int64_t best = 0;
  for (const auto& c : Triangulate(domain, specs)) {
    best = std::max(best, SpanOf(c, domain.card));
  }
  return best;
}

JunctionTree BuildJunctionTree(const Domain& domain,
                               const std::vector<MarginalSpec>& specs,
                               int64_t clique_cap) {
  JunctionTree jt;
  jt.cliques = Triangulate(domain, specs);
  for (const auto& c : jt.cliques) {
    const int64_t span = SpanOf(c, domain.card);
    if (span > clique_cap) {
      Fail(ErrorCode::kCliqueTooLarge,
           "clique spans " + std::to_string(span) + " cells, cap is " +
               std::to_string(clique_cap));
    }
  }
  const int m = jt.num_cliques();

  // Kruskal over all clique pairs, heaviest separator first.
  std::vector<std::tuple<int, int, int>> edges;
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      const int w = static_cast<int>(IntersectVars(jt.cliques[i], jt.cliques[j]).size());
      edges.emplace_back(-w, i, j);
    }
  }
  std::sort(edges.begin(), edges.end());
  std::vector<int> uf(m);
  std::iota(uf.begin(), uf.end(), 0);
  auto find = [&](int x) {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  };
  std::vector<std::vector<int>> nbr(m);
  for (const auto& [w, i, j] : edges) {
    const int a = find(i);
    const int b = find(j);
    if (a == b) continue;
    uf[a] = b;
    nbr[i].push_back(j);
    nbr[j].push_back(i);
  }
  for (auto& l : nbr) std::sort(l.begin(), l.end());

  jt.parent.assign(m, -1);
  jt.children.assign(m, {});
  jt.separator.assign(m, {});
  std::vector<bool> seen(m, false);
  std::vector<int> stack;
  if (m > 0) {
    stack.push_back(0);
    seen[0] = true;
  }
  while (!stack.empty()) {
    const int c = stack.back();
    stack.pop_back();
    jt.preorder.push_back(c);
    for (auto it = nbr[c].rbegin(); it != nbr[c].rend(); ++it) {
      if (seen[*it]) continue;
      seen[*it] = true;
      jt.parent[*it] = c;
      jt.separator[*it] = IntersectVars(jt.cliques[*it], jt.cliques[c]);
      stack.push_back(*it);
    }
  }
  for (int c : jt.preorder) {
    if (jt.parent[c] >= 0) jt.children[jt.parent[c]].push_back(c);
  }
  for (const MarginalSpec& s : specs) {
    jt.spec_clique.push_back(jt.FindClique(s.vars));
  }
  return jt;
}

}  // namespace fksynth
