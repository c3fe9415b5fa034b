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

#include "hsca/patterns.hpp"

#include <cmath>
#include <cstdint>
#include <set>

#include "gtest/gtest.h"
#include "hsca/error.hpp"

namespace hsca {
namespace {

SchemeParams params(int K, int N, int Nr, int T) { return {K, N, Nr, T, 11, Nr - T}; }

template <typename Fn>
void expect_code(Errc code, Fn&& fn) {
  try {
    fn();
    ADD_FAILURE() << "expected " << errc_name(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

const char* kExample = "nu=1:1,2,3;2:1,2,4 hm=2,3,4";

TEST(PatternLiteralTest, ParsesWorkedExample) {
  auto nu = parse_pattern(kExample, 2);
  EXPECT_EQ(nu.receivers[0], (IndexSet{0, 1, 2}));
  EXPECT_EQ(nu.receivers[1], (IndexSet{0, 1, 3}));
  EXPECT_EQ(nu.survivors, (IndexSet{1, 2, 3}));
  EXPECT_EQ(format_pattern(nu), kExample);
  EXPECT_EQ(nu.active_helpers(), (IndexSet{0, 1, 2, 3}));
  EXPECT_EQ(nu.users_at(2), (IndexSet{0}));
  EXPECT_EQ(nu.users_at(3), (IndexSet{1}));
  EXPECT_EQ(nu.users_at(0), (IndexSet{0, 1}));
}

TEST(PatternLiteralTest, DefaultsSurvivorsAndRejectsGarbage) {
  auto nu = parse_pattern("nu=2:1,3;1:2,3", 2);
  EXPECT_EQ(nu.survivors, (IndexSet{0, 1, 2}));
  expect_code(Errc::kParseError, [] { parse_pattern("nu=1:1,2", 2); });
  expect_code(Errc::kParseError, [] { parse_pattern("nu=1:1,x", 1); });
  expect_code(Errc::kParseError, [] { parse_pattern("nu=1:1,1", 1); });
  expect_code(Errc::kParseError, [] { parse_pattern("hm=1", 1); });
  expect_code(Errc::kParseError, [] { parse_pattern("nu=3:1", 2); });
}

TEST(ValidateTest, Examples) {
  auto p = params(2, 4, 3, 1);
  EXPECT_NO_THROW(validate(parse_pattern(kExample, 2), p));
  try {
    validate(parse_pattern("nu=1:1;2:1,2,3", 2), p);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooFewReceivers);
    EXPECT_NE(std::string(e.what()).find("user 1"), std::string::npos);
  }
  expect_code(Errc::kBadSurvivorSet,
              [&] { validate(parse_pattern("nu=1:1,2,3;2:1,2,3 hm=2,3,4", 2), p); });
  expect_code(Errc::kBadSurvivorSet,
              [&] { validate(parse_pattern("nu=1:1,2,3;2:1,2,3 hm=2,3", 2), p); });
  expect_code(Errc::kBadParams,
              [&] { validate(parse_pattern("nu=1:1,2,5;2:1,2,3", 2), p); });
}

// Brute-force count over every K-tuple of helper bitmasks.
std::uint64_t brute_force_count(const SchemeParams& p) {
  std::uint64_t per_user = 0;
  for (std::uint32_t m = 0; m < (1U << p.N); ++m) {
    if (std::popcount(m) >= p.Nr) ++per_user;
  }
  std::uint64_t total = 1;
  for (int k = 0; k < p.K; ++k) total *= per_user;
  return total;
}

TEST(EnumeratePatternsTest, Counts) {
  EXPECT_EQ(enumerate_patterns(params(2, 4, 3, 1)).size(), 25u);
  EXPECT_EQ(enumerate_patterns(params(2, 3, 2, 1)).size(), 16u);
  auto small = enumerate_patterns({1, 2, 1, 1, 5, 1});
  ASSERT_EQ(small.size(), 3u);
  EXPECT_EQ(small[0].receivers[0], (IndexSet{0}));
  EXPECT_EQ(small[1].receivers[0], (IndexSet{0, 1}));
  EXPECT_EQ(small[2].receivers[0], (IndexSet{1}));
}

TEST(EnumeratePatternsTest, MatchesClosedFormAndValidates) {
  for (auto p : {params(2, 3, 2, 1), params(2, 4, 3, 1), params(3, 4, 3, 2),
                 params(2, 5, 4, 2), params(1, 6, 2, 1), params(3, 5, 2, 1)}) {
    auto all = enumerate_patterns(p);
    EXPECT_EQ(all.size(), brute_force_count(p)) << p;
    EXPECT_EQ(all.size(), pattern_count(p)) << p;
    std::set<std::vector<IndexSet>> distinct;
    for (std::size_t i = 0; i < all.size(); ++i) {
      EXPECT_NO_THROW(validate(all[i], p));
      distinct.insert(all[i].receivers);
      if (i > 0) {
        EXPECT_LT(all[i - 1].receivers, all[i].receivers);
      }
      for (int n = 0; n < p.N; ++n) {
        auto kn = all[i].users_at(n);
        for (int k = 0; k < p.K; ++k) {
          EXPECT_EQ(contains(kn, k), all[i].delivered(k, n));
        }
      }
    }
    EXPECT_EQ(distinct.size(), all.size());
  }
}

TEST(EnumerateSurvivorsTest, Counts) {
  auto p = params(2, 4, 3, 1);
  EXPECT_EQ(enumerate_survivors(parse_pattern(kExample, 2), p).size(), 5u);
  EXPECT_EQ(enumerate_survivors(parse_pattern("nu=1:1,2,3;2:1,2,3", 2), p).size(), 1u);
  auto p3 = params(2, 3, 2, 1);
  auto sets = enumerate_survivors(parse_pattern("nu=1:1,2;2:2,3", 2), p3);
  EXPECT_EQ(sets.size(), 4u);
  for (const auto& s : sets) EXPECT_GE(s.size(), 2u);
}

TEST(SamplePatternTest, NoDropsAndDeterminism) {
  auto p = params(3, 5, 3, 1);
  auto nu = sample_pattern(p, 0.0, 99);
  EXPECT_EQ(nu, full_pattern(p));
  EXPECT_EQ(sample_pattern(p, 0.4, 1234), sample_pattern(p, 0.4, 1234));
  EXPECT_NO_THROW(validate(sample_pattern(p, 0.4, 1234), p));
  expect_code(Errc::kBadParams, [&] { sample_pattern(p, 1.0, 1); });
}

TEST(SamplePatternTest, ExhaustedBudget) {
  Rng rng(5);
  expect_code(Errc::kSamplingExhausted,
              [&] { sample_pattern(params(1, 8, 7, 1), 0.999, rng, 20); });
}

TEST(SamplePatternTest, LinkSurvivalMatchesConditionedBinomial) {
  const auto p = params(2, 4, 3, 1);
  const double drop = 0.2;
  // Enumeration oracle: P(link survives | at least Nr of N links survive).
  double accept = 0, with_link = 0;
  for (std::uint32_t m = 0; m < 16; ++m) {
    int s = std::popcount(m);
    if (s < p.Nr) continue;
    double pr = std::pow(1 - drop, s) * std::pow(drop, p.N - s);
    accept += pr;
    if (m & 1U) with_link += pr;
  }
  const double expected = with_link / accept;
  const int samples = 10000;
  Rng rng(2026);
  std::vector<int> hits(static_cast<std::size_t>(p.K * p.N), 0);
  for (int s = 0; s < samples; ++s) {
    auto nu = sample_pattern(p, drop, rng);
    for (int k = 0; k < p.K; ++k) {
      for (int n : nu.receivers[static_cast<std::size_t>(k)]) {
        ++hits[static_cast<std::size_t>(k * p.N + n)];
      }
    }
  }
  const double sigma = std::sqrt(expected * (1 - expected) / samples);
  for (int h : hits) {
    EXPECT_NEAR(static_cast<double>(h) / samples, expected, 3 * sigma);
  }
}

}  // namespace
}  // namespace hsca
