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

#include "fksynth/rng.h"

#include <cassert>
#include <cmath>

#include "fksynth/error.h"

namespace fksynth {
namespace {

uint64_t SplitMix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t Fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

uint64_t Mix(uint64_t key, std::string_view component, uint64_t index) {
  uint64_t h = SplitMix64(key ^ Fnv1a(component));
  return SplitMix64(h ^ SplitMix64(index + 0x632be59bd9b4e019ULL));
}

}  // namespace

RngStream::RngStream(uint64_t key) : key_(key), engine_(key) {}

RngStream::RngStream(uint64_t seed, std::string_view component, uint64_t index)
    : RngStream(Mix(SplitMix64(seed), component, index)) {}

RngStream RngStream::Derive(std::string_view component, uint64_t index) const {
  return RngStream(Mix(key_, component, index));
}

double RngStream::Uniform() {
  // 53 random bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::Normal(double stddev) {
  if (stddev == 0.0) return 0.0;
  return stddev * normal_(engine_);
}

uint64_t RngStream::UniformInt(uint64_t bound) {
  assert(bound > 0);
  std::uniform_int_distribution<uint64_t> dist(0, bound - 1);
  return dist(engine_);
}

size_t RngStream::Categorical(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0) || !std::isfinite(total)) {
    Fail(ErrorCode::kInvalidArgument, "categorical weights have no mass");
  }
  double u = Uniform() * total;
  size_t last_positive = 0;
  for (size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return last_positive;
}

}  // namespace fksynth
