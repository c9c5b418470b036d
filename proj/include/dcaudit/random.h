/*
 * Copyright 2026 The dcaudit Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef DCAUDIT_RANDOM_H_
#define DCAUDIT_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <random>

namespace dcaudit {

using Rng = std::mt19937_64;

// SplitMix64 finalizer.
inline uint64_t MixBits(uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Derives an independent substream seed from a base seed and a path of
// indices, e.g. DeriveSeed(seed, {outer_fold, inner_fold}). Results do not
// depend on the order in which substreams are consumed, so parallel and
// sequential execution draw identical numbers.
inline uint64_t DeriveSeed(uint64_t seed, std::initializer_list<uint64_t> path) {
  uint64_t state = MixBits(seed);
  for (const uint64_t index : path) {
    state = MixBits(state ^ MixBits(index + 0x632BE59BD9B4E019ULL));
  }
  return state;
}

}  // namespace dcaudit

#endif  // DCAUDIT_RANDOM_H_
