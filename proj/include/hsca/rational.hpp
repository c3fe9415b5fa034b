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
#include <iomanip>
#include <sstream>
#include <string>

#include <boost/rational.hpp>

namespace hsca {

// Exact rates and entropies (q-ary units).
using Rational = boost::rational<std::int64_t>;

inline std::string rational_string(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

inline std::string rational_decimal(const Rational& r, int digits = 6) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(digits)
     << static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
  return os.str();
}

}  // namespace hsca
