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

#ifndef FKSYNTH_RNG_H_
#define FKSYNTH_RNG_H_

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace fksynth {

// A random stream keyed by (seed, component, index). Two streams with the
// same key produce identical sequences; streams with different keys are
// statistically independent for all practical purposes.
class RngStream {
 public:
  RngStream(uint64_t seed, std::string_view component, uint64_t index = 0);

  // Child stream keyed additionally by (component, index).
  RngStream Derive(std::string_view component, uint64_t index = 0) const;

  double Uniform();  // [0, 1)
  double Normal(double stddev);
  uint64_t UniformInt(uint64_t bound);  // [0, bound)

  // Index drawn proportionally to non-negative weights. At least one weight
  // must be positive.
  size_t Categorical(std::span<const double> weights);

  std::mt19937_64& engine() { return engine_; }
  uint64_t key() const { return key_; }

 private:
  explicit RngStream(uint64_t key);

  uint64_t key_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace fksynth

#endif  // FKSYNTH_RNG_H_
