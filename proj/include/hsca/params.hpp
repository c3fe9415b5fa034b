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
#include <ostream>
#include <string>

#include "hsca/error.hpp"

namespace hsca {

// (K, N, Nr, T, q, L): users, helpers, resiliency threshold, collusion bound,
// field size and gradient length in symbols.
struct SchemeParams {
  int K = 0;
  int N = 0;
  int Nr = 0;
  int T = 0;
  std::uint32_t q = 0;
  int L = 0;

  bool feasible() const noexcept { return Nr > T; }
  // Length of one gradient part, L / (Nr - T).
  int part_length() const noexcept { return L / (Nr - T); }

  friend bool operator==(const SchemeParams&, const SchemeParams&) = default;

  std::string to_string() const {
    return "(" + std::to_string(K) + "," + std::to_string(N) + "," +
           std::to_string(Nr) + "," + std::to_string(T) + "," +
           std::to_string(q) + "," + std::to_string(L) + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const SchemeParams& p) {
    return os << p.to_string();
  }
};

// Range checks only; feasibility and field checks happen in setup().
inline void check_param_ranges(const SchemeParams& p) {
  auto bad = [&](const std::string& why) {
    throw Error(Errc::kBadParams, p.to_string() + ": " + why);
  };
  if (p.K < 1) bad("K must be >= 1");
  if (p.N < 2) bad("N must be >= 2");
  if (p.N > 30) bad("N must be <= 30");
  if (p.Nr < 1 || p.Nr > p.N - 1) bad("need 1 <= Nr <= N-1");
  if (p.T < 1 || p.T > p.N) bad("need 1 <= T <= N");
  if (p.L < 1) bad("L must be >= 1");
}

}  // namespace hsca
