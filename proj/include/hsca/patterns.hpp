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

// User-to-helper communication patterns (nu) and helper-to-master survivor
// sets. Users and helpers are 0-based here; the text literal is 1-based.

#pragma once

#include <algorithm>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "hsca/error.hpp"
#include "hsca/params.hpp"
#include "hsca/random.hpp"

namespace hsca {

// Sorted, duplicate-free list of 0-based indices.
using IndexSet = std::vector<int>;

inline bool contains(const IndexSet& s, int x) {
  return std::binary_search(s.begin(), s.end(), x);
}

inline IndexSet range_set(int n) {
  IndexSet s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = i;
  return s;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

// Bit i of the mask selects universe[i].
inline IndexSet subset_from_mask(const IndexSet& universe, std::uint32_t mask) {
  IndexSet out;
  for (std::size_t i = 0; i < universe.size(); ++i) {
    if (mask & (1U << i)) out.push_back(universe[i]);
  }
  return out;
}

// All subsets of `universe` with at least `min_size` (and at most `max_size`)
// elements, in lexicographic order of their sorted element lists.
inline std::vector<IndexSet> subsets_of(const IndexSet& universe,
                                        std::size_t min_size,
                                        std::size_t max_size = SIZE_MAX) {
  std::vector<IndexSet> out;
  const std::uint32_t total = 1U << universe.size();
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    auto s = subset_from_mask(universe, mask);
    if (s.size() >= min_size && s.size() <= max_size) out.push_back(std::move(s));
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct CommPattern {
  // receivers[k] = N_k, the helpers that got user k's upload.
  std::vector<IndexSet> receivers;
  // N_HM, the helpers whose response reaches the master.
  IndexSet survivors;

  int users() const noexcept { return static_cast<int>(receivers.size()); }

  bool delivered(int k, int n) const {
    return contains(receivers.at(static_cast<std::size_t>(k)), n);
  }

  // K_n.
  IndexSet users_at(int n) const {
    IndexSet out;
    for (int k = 0; k < users(); ++k) {
      if (delivered(k, n)) out.push_back(k);
    }
    return out;
  }

  // N_UH, the union of all N_k.
  IndexSet active_helpers() const {
    IndexSet out;
    for (const auto& r : receivers) out = set_union(out, r);
    return out;
  }

  friend bool operator==(const CommPattern&, const CommPattern&) = default;
};

inline CommPattern full_pattern(const SchemeParams& p) {
  CommPattern nu;
  nu.receivers.assign(static_cast<std::size_t>(p.K), range_set(p.N));
  nu.survivors = range_set(p.N);
  return nu;
}

namespace detail {

inline void check_index_set(const IndexSet& s, int limit,
                            const std::string& what) {
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] < 0 || s[i] >= limit) {
      throw Error(Errc::kBadParams, what + " index " + std::to_string(s[i] + 1) +
                                        " out of range");
    }
    if (i > 0 && s[i] <= s[i - 1]) {
      throw Error(Errc::kBadParams, what + " not sorted/unique");
    }
  }
}

}  // namespace detail

inline void validate(const CommPattern& nu, const SchemeParams& p) {
  if (nu.users() != p.K) {
    throw Error(Errc::kBadParams, "pattern has " + std::to_string(nu.users()) +
                                      " users, expected " + std::to_string(p.K));
  }
  for (int k = 0; k < p.K; ++k) {
    const auto& nk = nu.receivers[static_cast<std::size_t>(k)];
    detail::check_index_set(nk, p.N, "receiver");
    if (static_cast<int>(nk.size()) < p.Nr) {
      throw Error(Errc::kTooFewReceivers,
                  "user " + std::to_string(k + 1) + " reached " +
                      std::to_string(nk.size()) + " < Nr=" +
                      std::to_string(p.Nr) + " helpers");
    }
  }
  detail::check_index_set(nu.survivors, p.N, "survivor");
  if (static_cast<int>(nu.survivors.size()) < p.Nr) {
    throw Error(Errc::kBadSurvivorSet, "fewer than Nr survivors");
  }
  const auto uh = nu.active_helpers();
  if (!std::includes(uh.begin(), uh.end(), nu.survivors.begin(),
                     nu.survivors.end())) {
    throw Error(Errc::kBadSurvivorSet, "survivors not a subset of N_UH");
  }
}

// Lazily walks every nu in N(Nr) in lexicographic order. Survivor sets are
// initialised to N_UH.
class PatternEnumerator {
 public:
  explicit PatternEnumerator(const SchemeParams& p)
      : choices_(subsets_of(range_set(p.N), static_cast<std::size_t>(p.Nr))),
        odometer_(static_cast<std::size_t>(p.K), 0) {}

  bool next(CommPattern& out) {
    if (done_) return false;
    out.receivers.clear();
    for (auto c : odometer_) out.receivers.push_back(choices_[c]);
    out.survivors = out.active_helpers();
    // Advance; the last user varies fastest.
    std::size_t i = odometer_.size();
    while (i > 0) {
      --i;
      if (++odometer_[i] < choices_.size()) return true;
      odometer_[i] = 0;
    }
    done_ = true;
    return true;
  }

 private:
  std::vector<IndexSet> choices_;
  std::vector<std::size_t> odometer_;
  bool done_ = false;
};

inline std::vector<CommPattern> enumerate_patterns(const SchemeParams& p) {
  std::vector<CommPattern> out;
  PatternEnumerator it(p);
  CommPattern nu;
  while (it.next(nu)) out.push_back(nu);
  return out;
}

// (sum_{s=Nr}^{N} C(N,s))^K.
inline std::uint64_t pattern_count(const SchemeParams& p) {
  std::uint64_t per_user = 0;
  std::uint64_t c = 1;
  for (int s = 0; s <= p.N; ++s) {
    if (s > 0) c = c * static_cast<std::uint64_t>(p.N - s + 1) / static_cast<std::uint64_t>(s);
    if (s >= p.Nr) per_user += c;
  }
  std::uint64_t total = 1;
  for (int k = 0; k < p.K; ++k) total *= per_user;
  return total;
}

inline std::vector<IndexSet> enumerate_survivors(const CommPattern& nu,
                                                 const SchemeParams& p) {
  return subsets_of(nu.active_helpers(), static_cast<std::size_t>(p.Nr));
}

// Each link is dropped independently with `drop_prob`. A user (or the survivor
// set) that ends up below Nr is redrawn; `retry_budget` bounds the redraws.
inline CommPattern sample_pattern(const SchemeParams& p, double drop_prob,
                                  Rng& rng, int retry_budget = 10000) {
  if (!(drop_prob >= 0.0 && drop_prob < 1.0)) {
    throw Error(Errc::kBadParams, "drop probability must be in [0, 1)");
  }
  auto draw = [&](const IndexSet& universe) {
    for (int attempt = 0; attempt < retry_budget; ++attempt) {
      IndexSet kept;
      for (int n : universe) {
        if (unit_double(rng) >= drop_prob) kept.push_back(n);
      }
      if (static_cast<int>(kept.size()) >= p.Nr) return kept;
    }
    throw Error(Errc::kSamplingExhausted,
                "no draw with >= Nr links after " +
                    std::to_string(retry_budget) + " attempts");
  };
  CommPattern nu;
  const IndexSet all = range_set(p.N);
  for (int k = 0; k < p.K; ++k) nu.receivers.push_back(draw(all));
  nu.survivors = draw(nu.active_helpers());
  return nu;
}

inline CommPattern sample_pattern(const SchemeParams& p, double drop_prob,
                                  std::uint64_t seed) {
  Rng rng(seed);
  return sample_pattern(p, drop_prob, rng);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline int parse_int(std::string_view s) {
  s = trim(s);
  if (s.empty()) throw Error(Errc::kParseError, "empty integer");
  int v = 0;
  for (char c : s) {
    if (c < '0' || c > '9') {
      throw Error(Errc::kParseError, "bad integer '" + std::string(s) + "'");
    }
    v = v * 10 + (c - '0');
    if (v > 1000000) throw Error(Errc::kParseError, "integer too large");
  }
  return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// "1,2,3" (1-based) -> {0,1,2}.
inline IndexSet parse_index_list(std::string_view s) {
  IndexSet out;
  for (auto tok : split(s, ',')) {
    int v = parse_int(tok);
    if (v < 1) throw Error(Errc::kParseError, "indices are 1-based");
    out.push_back(v - 1);
  }
  std::sort(out.begin(), out.end());
  if (std::adjacent_find(out.begin(), out.end()) != out.end()) {
    throw Error(Errc::kParseError, "duplicate index in list");
  }
  return out;
}

inline std::string format_index_list(const IndexSet& s) {
  std::string out;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(s[i] + 1);
  }
  return out;
}

}  // namespace detail

// Parses `nu=1:1,2,3;2:1,2,4 hm=2,3,4`. Every user 1..K must appear once.
// Without `hm=` the survivor set defaults to N_UH.
inline CommPattern parse_pattern(std::string_view literal, int users) {
  CommPattern nu;
  nu.receivers.assign(static_cast<std::size_t>(users), IndexSet{});
  std::vector<bool> seen(static_cast<std::size_t>(users), false);
  bool have_nu = false;
  bool have_hm = false;
  std::istringstream in{std::string(literal)};
  std::string word;
  while (in >> word) {
    std::string_view w = word;
    if (w.starts_with("nu=")) {
      have_nu = true;
      for (auto entry : detail::split(w.substr(3), ';')) {
        auto colon = entry.find(':');
        if (colon == std::string_view::npos) {
          throw Error(Errc::kParseError, "expected 'user:helpers'");
        }
        int k = detail::parse_int(entry.substr(0, colon));
        if (k < 1 || k > users) {
          throw Error(Errc::kParseError, "user " + std::to_string(k) + " out of range");
        }
        auto uk = static_cast<std::size_t>(k - 1);
        if (seen[uk]) throw Error(Errc::kParseError, "user listed twice");
        seen[uk] = true;
        nu.receivers[uk] = detail::parse_index_list(entry.substr(colon + 1));
      }
    } else if (w.starts_with("hm=")) {
      have_hm = true;
      nu.survivors = detail::parse_index_list(w.substr(3));
    } else {
      throw Error(Errc::kParseError, "unknown token '" + word + "'");
    }
  }
  if (!have_nu) throw Error(Errc::kParseError, "missing nu=");
  for (int k = 0; k < users; ++k) {
    if (!seen[static_cast<std::size_t>(k)]) {
      throw Error(Errc::kParseError, "user " + std::to_string(k + 1) + " missing");
    }
  }
  if (!have_hm) nu.survivors = nu.active_helpers();
  return nu;
}

inline std::string format_pattern(const CommPattern& nu) {
  std::string out = "nu=";
  for (int k = 0; k < nu.users(); ++k) {
    if (k) out += ';';
    out += std::to_string(k + 1) + ":" +
           detail::format_index_list(nu.receivers[static_cast<std::size_t>(k)]);
  }
  out += " hm=" + detail::format_index_list(nu.survivors);
  return out;
}

}  // namespace hsca
