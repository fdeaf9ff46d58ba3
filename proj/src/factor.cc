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

#include "fksynth/factor.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fksynth/error.h"
#include "fksynth/simd/kernels.h"

namespace fksynth {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Walks the cells of a prefix of a factor's variables while tracking the
// matching offsets in the factor and in a second table.
class PrefixWalker {
 public:
  PrefixWalker(std::span<const int> card, std::span<const int64_t> stride_a,
               std::span<const int64_t> stride_b, size_t prefix_len)
      : card_(card.begin(), card.begin() + prefix_len),
        sa_(stride_a.begin(), stride_a.begin() + prefix_len),
        sb_(stride_b.begin(), stride_b.begin() + prefix_len),
        digit_(prefix_len, 0) {
    count_ = 1;
    for (int c : card_) count_ *= c;
  }

  int64_t count() const { return count_; }
  int64_t a() const { return off_a_; }
  int64_t b() const { return off_b_; }

  void Next() {
    for (size_t i = digit_.size(); i-- > 0;) {
      if (++digit_[i] < card_[i]) {
        off_a_ += sa_[i];
        off_b_ += sb_[i];
        return;
      }
      digit_[i] = 0;
      off_a_ -= sa_[i] * (card_[i] - 1);
      off_b_ -= sb_[i] * (card_[i] - 1);
    }
  }

 private:
  std::vector<int> card_;
  std::vector<int64_t> sa_;
  std::vector<int64_t> sb_;
  std::vector<int> digit_;
  int64_t count_ = 1;
  int64_t off_a_ = 0;
  int64_t off_b_ = 0;
};

// Strides of sub_vars' layout expressed per variable of vars (0 if absent).
std::vector<int64_t> EmbeddedStrides(std::span<const int> vars,
                                     std::span<const int> card,
                                     std::span<const int> sub_vars) {
  std::vector<int64_t> out(vars.size(), 0);
  int64_t s = 1;
  size_t j = sub_vars.size();
  for (size_t i = vars.size(); i-- > 0;) {
    if (j > 0 && sub_vars[j - 1] == vars[i]) {
      out[i] = s;
      s *= card[i];
      --j;
    }
  }
  if (j != 0) {
    Fail(ErrorCode::kDimensionMismatch, "factor variables are not a subset");
  }
  return out;
}

struct RunShape {
  size_t prefix_len;  // variables walked by the odometer
  int64_t run_len;    // contiguous cells per prefix cell
  bool shared;        // suffix present in the sub-table (else absent)
};

RunShape SuffixRun(std::span<const int> card, std::span<const int64_t> sub_stride) {
  const size_t n = card.size();
  RunShape r{n, 1, true};
  if (n == 0) return r;
  const bool last_shared = sub_stride[n - 1] != 0;
  r.shared = last_shared;
  size_t i = n;
  while (i > 0 && (sub_stride[i - 1] != 0) == last_shared) {
    --i;
    r.run_len *= card[i];
  }
  r.prefix_len = i;
  return r;
}

}  // namespace

Factor::Factor(std::vector<int> v, std::vector<int> c, double fill)
    : vars(std::move(v)), card(std::move(c)) {
  int64_t n = 1;
  for (int x : card) n *= x;
  values.assign(static_cast<size_t>(n), fill);
}

std::vector<int64_t> Factor::Strides() const {
  std::vector<int64_t> s(vars.size());
  int64_t acc = 1;
  for (size_t i = vars.size(); i-- > 0;) {
    s[i] = acc;
    acc *= card[i];
  }
  return s;
}

bool Factor::HasVar(int var) const {
  return std::binary_search(vars.begin(), vars.end(), var);
}

std::vector<int> CardsOf(std::span<const int> vars, std::span<const int> domain_card) {
  std::vector<int> out;
  out.reserve(vars.size());
  for (int v : vars) out.push_back(domain_card[v]);
  return out;
}

int64_t SpanOf(std::span<const int> vars, std::span<const int> domain_card) {
  int64_t s = 1;
  for (int v : vars) s *= domain_card[v];
  return s;
}

void AddInto(Factor& target, std::span<const int> source_vars,
             std::span<const double> source_values) {
  const auto& k = simd::Kernels();
  const std::vector<int64_t> ts = target.Strides();
  const std::vector<int64_t> ss = EmbeddedStrides(target.vars, target.card, source_vars);
  const RunShape run = SuffixRun(target.card, ss);
  PrefixWalker walk(target.card, ts, ss, run.prefix_len);
  double* t = target.values.data();
  const double* s = source_values.data();
  for (int64_t o = 0; o < walk.count(); ++o, walk.Next()) {
    if (run.shared) {
      k.add(t + walk.a(), s + walk.b(), t + walk.a(), run.run_len);
    } else {
      k.add_scalar(t + walk.a(), s[walk.b()], t + walk.a(), run.run_len);
    }
  }
}

void AddInto(Factor& target, const Factor& source) {
  AddInto(target, source.vars, source.values);
}

void SubtractInto(Factor& target, const Factor& source) {
  Factor neg = source;
  for (double& v : neg.values) v = -v;
  AddInto(target, neg);
  for (double& v : target.values) {
    if (std::isnan(v)) v = kNegInf;
  }
}

double LogSumExp(std::span<const double> values) {
  const auto& k = simd::Kernels();
  const double m = k.reduce_max(values.data(), values.size());
  if (m == kNegInf) return kNegInf;
  if (!std::isfinite(m)) return m;
  return m + std::log(k.sum_exp_shifted(values.data(), m, values.size()));
}

Factor Marginalize(const Factor& f, std::span<const int> keep) {
  const auto& k = simd::Kernels();
  std::vector<int> kv(keep.begin(), keep.end());
  std::vector<int> kc;
  for (int v : kv) {
    auto it = std::lower_bound(f.vars.begin(), f.vars.end(), v);
    if (it == f.vars.end() || *it != v) {
      Fail(ErrorCode::kDimensionMismatch, "marginalized variables not in factor");
    }
    kc.push_back(f.card[it - f.vars.begin()]);
  }
  Factor out(kv, kc, kNegInf);
  if (kv.size() == f.vars.size()) {
    out.values = f.values;
    return out;
  }
  const std::vector<int64_t> fs = f.Strides();
  const std::vector<int64_t> os = EmbeddedStrides(f.vars, f.card, kv);
  const RunShape run = SuffixRun(f.card, os);
  PrefixWalker walk(f.card, fs, os, run.prefix_len);
  const double* src = f.values.data();
  double* dst = out.values.data();

  if (!run.shared) {
    // The suffix is summed out: reduce each run, then fold into its cell.
    for (int64_t o = 0; o < walk.count(); ++o, walk.Next()) {
      const double* x = src + walk.a();
      const double m = k.reduce_max(x, run.run_len);
      if (m == kNegInf) continue;
      const double v = m + std::log(k.sum_exp_shifted(x, m, run.run_len));
      double& d = dst[walk.b()];
      if (d == kNegInf) {
        d = v;
      } else {
        const double hi = std::max(d, v);
        d = hi + std::log1p(std::exp(std::min(d, v) - hi));
      }
    }
    return out;
  }

  // The suffix is kept: a max pass and an accumulate pass over whole runs.
  for (int64_t o = 0; o < walk.count(); ++o, walk.Next()) {
    k.max_into(src + walk.a(), dst + walk.b(), run.run_len);
  }
  std::vector<double> shift(out.values);
  for (double& s : shift) {
    if (!std::isfinite(s)) s = 0.0;
  }
  std::vector<double> acc(out.size(), 0.0);
  PrefixWalker walk2(f.card, fs, os, run.prefix_len);
  for (int64_t o = 0; o < walk2.count(); ++o, walk2.Next()) {
    k.accumulate_exp_shifted(src + walk2.a(), shift.data() + walk2.b(),
                             acc.data() + walk2.b(), run.run_len);
  }
  for (size_t i = 0; i < out.size(); ++i) {
    dst[i] = acc[i] > 0.0 ? shift[i] + std::log(acc[i]) : kNegInf;
  }
  return out;
}

void ApplyEvidence(Factor& f, int var, int value) {
  auto it = std::lower_bound(f.vars.begin(), f.vars.end(), var);
  if (it == f.vars.end() || *it != var) return;
  const size_t pos = static_cast<size_t>(it - f.vars.begin());
  const std::vector<int64_t> s = f.Strides();
  const int64_t stride = s[pos];
  const int c = f.card[pos];
  const int64_t block = stride * c;
  for (int64_t base = 0; base < static_cast<int64_t>(f.size()); base += block) {
    for (int x = 0; x < c; ++x) {
      if (x == value) continue;
      std::fill_n(f.values.begin() + base + x * stride, stride, kNegInf);
    }
  }
}

std::vector<int> UnionVars(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<int> IntersectVars(std::span<const int> a, std::span<const int> b) {
  std::vector<int> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

}  // namespace fksynth
