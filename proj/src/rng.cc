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

#include "dvf/rng.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <string>

#include "dvf/error.h"

namespace dvf {

std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t Fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ull;
  for (const char c : bytes) {
    hash ^= static_cast<unsigned char>(c);
    hash *= 0x100000001b3ull;
  }
  return hash;
}

std::uint64_t RandomStream::operator()() {
  state_ += 0x9e3779b97f4a7c15ull;
  return Mix64(state_);
}

double RandomStream::Unit() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::Uniform(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo > hi) {
    throw Error(ErrorCode::kInvalidRange,
                "uniform range [" + std::to_string(lo) + ", " +
                    std::to_string(hi) + "]");
  }
  const double u = Unit();
  if (lo == hi) return lo;
  // Guard against rounding past hi for wide ranges.
  return std::min(hi, lo + (hi - lo) * u);
}

std::uint64_t RandomStream::Index(std::uint64_t n) {
  if (n == 0) {
    throw Error(ErrorCode::kInvalidRange, "index range is empty");
  }
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t draw = (*this)();
  while (draw >= limit) draw = (*this)();
  return draw % n;
}

bool RandomStream::Bernoulli(double p) { return Unit() < p; }

RandomStream RandomStream::Split(std::string_view label) const {
  return RandomStream(Mix64(seed_ ^ Fnv1a64(label)));
}

std::uint64_t ParseSeed(std::string_view text) {
  int base = 10;
  if (text.size() > 2 && text[0] == '0' && (text[1] == 'x' || text[1] == 'X')) {
    text.remove_prefix(2);
    base = 16;
  }
  std::uint64_t value = 0;
  const auto [end, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value, base);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    throw Error(ErrorCode::kInvalidConfig,
                "seed '" + std::string(text) + "' is not a decimal or 0x-hex integer");
  }
  return value;
}

}  // namespace dvf
