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

// Prime-field arithmetic GF(q). Values are always kept in canonical form
// [0, q-1]; q must be prime and below 2^31 so products fit in 64 bits.

#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "hsca/error.hpp"

namespace hsca {

using Symbol = std::uint32_t;

namespace detail {

constexpr bool is_prime(std::uint64_t q) {
  if (q < 2) return false;
  if (q % 2 == 0) return q == 2;
  for (std::uint64_t d = 3; d * d <= q; d += 2) {
    if (q % d == 0) return false;
  }
  return true;
}

constexpr Symbol add_mod(Symbol a, Symbol b, Symbol q) {
  std::uint64_t s = std::uint64_t{a} + b;
  return static_cast<Symbol>(s >= q ? s - q : s);
}

constexpr Symbol sub_mod(Symbol a, Symbol b, Symbol q) {
  return a >= b ? a - b : static_cast<Symbol>(std::uint64_t{a} + q - b);
}

constexpr Symbol mul_mod(Symbol a, Symbol b, Symbol q) {
  return static_cast<Symbol>((std::uint64_t{a} * b) % q);
}

constexpr Symbol pow_mod(Symbol a, std::uint64_t e, Symbol q) {
  Symbol result = 1 % q;
  Symbol base = a % q;
  while (e > 0) {
    if (e & 1U) result = mul_mod(result, base, q);
    base = mul_mod(base, base, q);
    e >>= 1U;
  }
  return result;
}

// Fermat inverse; q is prime.
constexpr Symbol inv_mod(Symbol a, Symbol q) { return pow_mod(a, q - 2, q); }

}  // namespace detail

class FieldModulus {
 public:
  explicit FieldModulus(std::uint64_t q) : q_(static_cast<Symbol>(q)) {
    if (q < 2 || q >= (std::uint64_t{1} << 31)) {
      throw Error(Errc::kNotPrime,
                  "modulus " + std::to_string(q) + " outside [2, 2^31)");
    }
    if (!detail::is_prime(q)) {
      throw Error(Errc::kNotPrime, std::to_string(q) + " is not prime");
    }
  }

  Symbol value() const noexcept { return q_; }

  friend bool operator==(FieldModulus, FieldModulus) = default;

 private:
  Symbol q_;
};

class FieldElement {
 public:
  FieldElement(std::uint64_t value, FieldModulus mod)
      : value_(static_cast<Symbol>(value % mod.value())), mod_(mod) {}

  static FieldElement zero(FieldModulus mod) { return {0, mod}; }
  static FieldElement one(FieldModulus mod) { return {1, mod}; }

  Symbol value() const noexcept { return value_; }
  FieldModulus modulus() const noexcept { return mod_; }
  bool is_zero() const noexcept { return value_ == 0; }

  friend bool operator==(FieldElement, FieldElement) = default;

  friend std::ostream& operator<<(std::ostream& os, FieldElement e) {
    return os << e.value_;
  }

 private:
  Symbol value_;
  FieldModulus mod_;
};

inline void require_same_modulus(FieldModulus a, FieldModulus b) {
  if (a != b) {
    throw Error(Errc::kModulusMismatch, "GF(" + std::to_string(a.value()) +
                                            ") vs GF(" +
                                            std::to_string(b.value()) + ")");
  }
}

inline FieldElement fe_add(FieldElement a, FieldElement b) {
  require_same_modulus(a.modulus(), b.modulus());
  return {detail::add_mod(a.value(), b.value(), a.modulus().value()),
          a.modulus()};
}

inline FieldElement fe_sub(FieldElement a, FieldElement b) {
  require_same_modulus(a.modulus(), b.modulus());
  return {detail::sub_mod(a.value(), b.value(), a.modulus().value()),
          a.modulus()};
}

inline FieldElement fe_neg(FieldElement a) {
  return fe_sub(FieldElement::zero(a.modulus()), a);
}

inline FieldElement fe_mul(FieldElement a, FieldElement b) {
  require_same_modulus(a.modulus(), b.modulus());
  return {detail::mul_mod(a.value(), b.value(), a.modulus().value()),
          a.modulus()};
}

inline FieldElement fe_inv(FieldElement a) {
  if (a.is_zero()) throw Error(Errc::kZeroInverse, "inverse of 0");
  return {detail::inv_mod(a.value(), a.modulus().value()), a.modulus()};
}

// 0^0 is 1.
inline FieldElement fe_pow(FieldElement a, std::uint64_t e) {
  return {detail::pow_mod(a.value(), e, a.modulus().value()), a.modulus()};
}

inline FieldElement operator+(FieldElement a, FieldElement b) {
  return fe_add(a, b);
}
inline FieldElement operator-(FieldElement a, FieldElement b) {
  return fe_sub(a, b);
}
inline FieldElement operator-(FieldElement a) { return fe_neg(a); }
inline FieldElement operator*(FieldElement a, FieldElement b) {
  return fe_mul(a, b);
}

// A length-l block of symbols: one message payload, one gradient part.
using Payload = std::vector<FieldElement>;

inline Payload zero_payload(std::size_t len, FieldModulus mod) {
  return Payload(len, FieldElement::zero(mod));
}

inline Payload add_payload(const Payload& a, const Payload& b) {
  if (a.size() != b.size()) {
    throw Error(Errc::kShapeMismatch, "payload length " +
                                          std::to_string(a.size()) + " vs " +
                                          std::to_string(b.size()));
  }
  Payload out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out.push_back(a[i] + b[i]);
  return out;
}

inline std::vector<Symbol> payload_values(const Payload& p) {
  std::vector<Symbol> out;
  out.reserve(p.size());
  for (auto e : p) out.push_back(e.value());
  return out;
}

}  // namespace hsca
