// Copyright 2026 The hsca Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

#include "hsca/gfield.hpp"

namespace hsca {

// Every random draw in the library comes from a seeded mt19937_64. Symbols and
// Bernoulli trials are derived from raw generator output so the streams are
// identical across standard library implementations.
using Rng = std::mt19937_64;

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30U)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27U)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31U);
}

// Independent child seed for a named sub-stream.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return splitmix64(base ^ splitmix64(tag + 0x5bd1e995ULL));
}

inline Symbol uniform_symbol(Rng& rng, Symbol q) {
  const std::uint64_t limit = Rng::max() - (Rng::max() % q) - 1;
  std::uint64_t x = rng();
  while (x > limit) x = rng();
  return static_cast<Symbol>(x % q);
}

inline FieldElement uniform_element(Rng& rng, FieldModulus mod) {
  return {uniform_symbol(rng, mod.value()), mod};
}

inline Payload uniform_payload(Rng& rng, std::size_t len, FieldModulus mod) {
  Payload p;
  p.reserve(len);
  for (std::size_t i = 0; i < len; ++i) p.push_back(uniform_element(rng, mod));
  return p;
}

// Uniform in [0, 1) with 53 bits.
inline double unit_double(Rng& rng) {
  return static_cast<double>(rng() >> 11U) * 0x1.0p-53;
}

}  // namespace hsca
