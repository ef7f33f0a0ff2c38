/*
 * Copyright 2026 The DVF Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace dvf {

// Deterministic, splittable random stream.
//
// Draws are SplitMix64 outputs (Steele, Lea, Flood 2014) with the state
// initialised to the seed. A child created by Split(label) is seeded with
// Mix64(seed ^ Fnv1a64(label)), so it depends only on the parent's seed and
// the label, never on how many draws the parent has made. Unit-interval
// values take the top 53 bits of a draw. The algorithm is pinned: recorded
// test fixtures rely on these exact sequences.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : seed_(seed), state_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  // u in [0, 1).
  double Unit();

  // lo + (hi - lo) * u. Throws kInvalidRange if lo > hi or either is not
  // finite. Returns exactly lo when lo == hi.
  double Uniform(double lo, double hi);

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t Index(std::uint64_t n);

  // True with probability p (p clamped to [0, 1]; p == 1 is always true).
  bool Bernoulli(double p);

  RandomStream Split(std::string_view label) const;

 private:
  std::uint64_t seed_;
  std::uint64_t state_;
};

std::uint64_t Mix64(std::uint64_t z);
std::uint64_t Fnv1a64(std::string_view bytes);

// Accepts decimal or 0x-prefixed hexadecimal. Throws kInvalidConfig.
std::uint64_t ParseSeed(std::string_view text);

}  // namespace dvf
