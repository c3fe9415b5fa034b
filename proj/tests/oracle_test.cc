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

#include <chrono>
#include <cstdint>
#include <random>
#include <vector>

#include "gtest/gtest.h"
#include "hsca/error.hpp"
#include "hsca/leakage.hpp"
#include "hsca/patterns.hpp"
#include "hsca/protocol.hpp"
#include "hsca/random.hpp"

namespace hsca {
namespace {

// Smallest instance the field-size rule admits (q >= N + Nr) whose source
// space still enumerates within the oracle budget: 5^5 assignments.
const SchemeParams kTiny{1, 3, 2, 1, 5, 1};
const char* kTinyPattern = "nu=1:1,2";

class TinyOracle : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    ctx_ = new SchemeContext(setup(kTiny));
    lt_ = new LinearTranscript(build_linear_transcript(*ctx_, parse_pattern(kTinyPattern, 1)));
    oracle_ = new BruteForceOracle(*ctx_, lt_->pattern(), view_catalog(*lt_));
  }
  static void TearDownTestSuite() {
    delete oracle_;
    delete lt_;
    delete ctx_;
  }

  static VarSet union_of(std::uint64_t mask) {
    VarSet out;
    for (std::size_t i = 0; i < oracle_->items(); ++i) {
      if (mask & (std::uint64_t{1} << i)) {
        const auto& item = oracle_->catalog()[i];
        out.insert(out.end(), item.begin(), item.end());
      }
    }
    return out;
  }

  static Rational exact(const BruteEntropy& h) {
    auto e = h.exact(kTiny.q);
    EXPECT_TRUE(e.has_value()) << "support " << h.support;
    return e.value_or(Rational(-1));
  }

  static SchemeContext* ctx_;
  static LinearTranscript* lt_;
  static BruteForceOracle* oracle_;
};

SchemeContext* TinyOracle::ctx_ = nullptr;
LinearTranscript* TinyOracle::lt_ = nullptr;
BruteForceOracle* TinyOracle::oracle_ = nullptr;

TEST_F(TinyOracle, Shape) {
  EXPECT_EQ(lt_->layout().dimension(), 5);
  EXPECT_EQ(oracle_->assignments(), 3125U);
  // W1 F1 W, X at 3 helpers, Z at 3 helpers, M into helper 3, Y.
  EXPECT_EQ(oracle_->items(), 11U);
}

TEST(TinyInstance, ThreeElementFieldHasTooFewPoints) {
  try {
    setup(SchemeParams{2, 3, 2, 1, 3, 1});
    ADD_FAILURE() << "expected FieldTooSmall";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kFieldTooSmall);
  }
}

TEST_F(TinyOracle, SingleVariables) {
  EXPECT_EQ(exact(oracle_->entropy(0b1)), Rational(1));
  EXPECT_EQ(exact(oracle_->entropy(0)), Rational(0));
  EXPECT_NEAR(oracle_->entropy(0).value, 0.0, 1e-12);
  EXPECT_NEAR(oracle_->entropy(0b1).value, 1.0, 1e-9);
  auto x = brute_force_entropy(*ctx_, lt_->pattern(),
                               {VarRef::upload(0, 0), VarRef::upload(0, 1)});
  EXPECT_EQ(exact(x), entropy_rank(*lt_, {VarRef::upload(0, 0), VarRef::upload(0, 1)}));
  EXPECT_EQ(exact(x), Rational(2));
  // W is a function of W_1 alone here.
  EXPECT_EQ(exact(brute_force_entropy(*ctx_, lt_->pattern(),
                                      {VarRef::gradient(0), VarRef::sum()})),
            Rational(1));
}

TEST_F(TinyOracle, EverySubsetOfCatalog) {
  const auto all = oracle_->all_entropies();
  ASSERT_EQ(all.size(), std::size_t{1} << oracle_->items());
  for (std::uint64_t mask = 0; mask < all.size(); ++mask) {
    const auto rank_h = entropy_rank(*lt_, union_of(mask));
    ASSERT_TRUE(all[mask].uniform) << mask;
    ASSERT_EQ(exact(all[mask]), rank_h) << mask;
    ASSERT_NEAR(all[mask].value, boost::rational_cast<double>(rank_h), 1e-9) << mask;
  }
}

TEST_F(TinyOracle, RandomConditionalQueries) {
  const auto all = oracle_->all_entropies();
  std::mt19937_64 rng(5);
  const std::uint64_t full = (std::uint64_t{1} << oracle_->items()) - 1;
  for (int i = 0; i < 50; ++i) {
    const std::uint64_t a = rng() & full, b = rng() & full, c = rng() & full;
    auto h = [&](std::uint64_t m) { return exact(all[m]); };
    const Rational brute = h(a | c) + h(b | c) - h(a | b | c) - h(c);
    const auto r = cond_mutual_info(*lt_, {union_of(a), union_of(b), union_of(c)});
    EXPECT_EQ(r.value, brute) << a << " " << b << " " << c;
  }
}

TEST_F(TinyOracle, LemmaQueriesMatchEnumeration) {
  // Every collusion set of size <= T on the tiny instance, via individual
  // re-enumeration of the exact sets used by the checks.
  for (const auto& t : subsets_of(range_set(kTiny.N), 0, 1)) {
    const VarSet a = lt_->uploads_at(range_set(kTiny.N));
    const VarSet b = lt_->shares_received(t);
    const VarSet c = join({lt_->uploads_at(t), lt_->keys_held(t)});
    BruteForceOracle o(*ctx_, lt_->pattern(), {a, b, c});
    const Rational brute = exact(o.entropy(0b101)) + exact(o.entropy(0b110)) -
                           exact(o.entropy(0b111)) - exact(o.entropy(0b100));
    EXPECT_EQ(check_lemma2(*lt_, t).value, brute);
    EXPECT_EQ(brute, Rational(0));

    const VarSet w = lt_->all_gradients();
    const VarSet view = helper_view(*lt_, t);
    BruteForceOracle s(*ctx_, lt_->pattern(), {w, view});
    const Rational leak = exact(s.entropy(0b01)) + exact(s.entropy(0b10)) -
                          exact(s.entropy(0b11));
    EXPECT_EQ(check_security_helpers(*lt_, {}, t).value, leak);
  }
}

TEST_F(TinyOracle, RandomFineGrainedSubsets) {
  // Subsets drawn from individual variables rather than catalog groups.
  std::vector<VarRef> vars;
  for (const auto& [v, m] : lt_->all()) vars.push_back(v);
  std::mt19937_64 rng(9);
  for (int i = 0; i < 200; ++i) {
    VarSet pick;
    for (const auto& v : vars) {
      if (rng() % 3 == 0) pick.push_back(v);
    }
    EXPECT_EQ(exact(brute_force_entropy(*ctx_, lt_->pattern(), pick)),
              entropy_rank(*lt_, pick));
  }
}

TEST(BruteForceEntropy, ExactFormNeedsUniformPowerOfQ) {
  EXPECT_EQ((BruteEntropy{2.0, 9, true}).exact(3), Rational(2));
  EXPECT_FALSE((BruteEntropy{1.0, 6, true}).exact(3).has_value());
  EXPECT_FALSE((BruteEntropy{1.0, 3, false}).exact(3).has_value());
  EXPECT_EQ((BruteEntropy{0.0, 1, true}).exact(3), Rational(0));
}

TEST(BruteForceEntropy, TooLarge) {
  auto ctx = setup(SchemeParams{2, 3, 2, 1, 5, 1});
  try {
    brute_force_entropy(ctx, full_pattern(ctx.params), {VarRef::gradient(0)});
    ADD_FAILURE() << "expected TooLargeToEnumerate";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kTooLargeToEnumerate);
  }
}

}  // namespace
}  // namespace hsca
