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

#include "hsca/gfield.hpp"

#include <cstdint>
#include <random>

#include "gtest/gtest.h"
#include "hsca/error.hpp"

namespace hsca {
namespace {

FieldElement fe(std::uint64_t v, std::uint64_t q) { return {v, FieldModulus(q)}; }

TEST(FieldModulusTest, RejectsCompositeAndTiny) {
  EXPECT_NO_THROW(FieldModulus(2));
  EXPECT_NO_THROW(FieldModulus(7));
  for (std::uint64_t q : {0, 1, 4, 9, 15, 49}) {
    try {
      FieldModulus m(q);
      FAIL() << q << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kNotPrime);
    }
  }
}

TEST(FieldTest, Add) {
  EXPECT_EQ(fe_add(fe(5, 7), fe(4, 7)).value(), 2u);
  EXPECT_EQ(fe_add(fe(2, 3), fe(2, 3)).value(), 1u);
  for (std::uint64_t x = 0; x < 7; ++x) {
    EXPECT_EQ(fe_add(fe(0, 7), fe(x, 7)), fe(x, 7));
  }
}

TEST(FieldTest, Mul) {
  EXPECT_EQ(fe_mul(fe(3, 7), fe(3, 7)).value(), 2u);
  EXPECT_EQ(fe_mul(fe(4, 7), fe(4, 7)).value(), 2u);
  for (std::uint64_t x = 0; x < 7; ++x) {
    EXPECT_EQ(fe_mul(fe(1, 7), fe(x, 7)), fe(x, 7));
  }
}

TEST(FieldTest, Inverse) {
  EXPECT_EQ(fe_inv(fe(2, 7)).value(), 4u);
  EXPECT_EQ(fe_inv(fe(1, 7)).value(), 1u);
  EXPECT_EQ(fe_inv(fe(3, 5)).value(), 2u);
  try {
    fe_inv(fe(0, 7));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kZeroInverse);
  }
}

TEST(FieldTest, Pow) {
  EXPECT_EQ(fe_pow(fe(3, 7), 2).value(), 2u);
  EXPECT_EQ(fe_pow(fe(4, 7), 2).value(), 2u);
  for (std::uint64_t x = 0; x < 7; ++x) EXPECT_EQ(fe_pow(fe(x, 7), 0).value(), 1u);
}

TEST(FieldTest, ModulusMismatch) {
  try {
    fe_add(fe(1, 7), fe(1, 11));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kModulusMismatch);
  }
  EXPECT_THROW(fe_mul(fe(1, 7), fe(1, 5)), Error);
}

TEST(FieldTest, CanonicalRepresentative) {
  EXPECT_EQ(fe(20, 7).value(), 6u);
  EXPECT_EQ(fe_sub(fe(1, 7), fe(3, 7)).value(), 5u);
}

class FieldPropertyTest : public ::testing::TestWithParam<std::uint64_t> {};

TEST_P(FieldPropertyTest, AxiomsOnRandomTriples) {
  const std::uint64_t q = GetParam();
  std::mt19937_64 rng(q);
  std::uniform_int_distribution<std::uint64_t> dist(0, q - 1);
  for (int trial = 0; trial < 2000; ++trial) {
    auto a = fe(dist(rng), q), b = fe(dist(rng), q), c = fe(dist(rng), q);
    EXPECT_EQ((a + b) + c, a + (b + c));
    EXPECT_EQ((a * b) * c, a * (b * c));
    EXPECT_EQ(a + b, b + a);
    EXPECT_EQ(a * b, b * a);
    EXPECT_EQ(a * (b + c), a * b + a * c);
    EXPECT_EQ(a + (-a), FieldElement::zero(a.modulus()));
    if (!a.is_zero()) {
      EXPECT_EQ(a * fe_inv(a), FieldElement::one(a.modulus()));
    }
  }
}

TEST_P(FieldPropertyTest, PowMatchesRepeatedMul) {
  const std::uint64_t q = GetParam();
  std::mt19937_64 rng(q + 1);
  std::uniform_int_distribution<std::uint64_t> dist(0, q - 1);
  for (int trial = 0; trial < 200; ++trial) {
    auto a = fe(dist(rng), q);
    auto acc = FieldElement::one(a.modulus());
    for (std::uint64_t e = 0; e <= 16; ++e) {
      EXPECT_EQ(fe_pow(a, e), acc) << a << "^" << e;
      acc = acc * a;
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Primes, FieldPropertyTest,
                         ::testing::Values(2, 3, 5, 7, 11, 101, 65521,
                                           2147483647));

}  // namespace
}  // namespace hsca
