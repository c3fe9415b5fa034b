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

#include <stdexcept>
#include <string>
#include <string_view>

namespace hsca {

enum class Errc {
  kModulusMismatch,
  kZeroInverse,
  kNotPrime,
  kFieldTooSmall,
  kSingular,
  kDimensionMismatch,
  kIndexOutOfRange,
  kInfeasible,
  kBadBlockLength,
  kBadParams,
  kShapeMismatch,
  kStragglerHelper,
  kNotEnoughShares,
  kMissingRecovery,
  kNotEnoughResponses,
  kTooFewReceivers,
  kBadSurvivorSet,
  kSamplingExhausted,
  kLayoutMismatch,
  kBadSubset,
  kTooLargeToEnumerate,
  kBudgetExceeded,
  kParseError,
};

constexpr std::string_view errc_name(Errc c) {
  switch (c) {
    case Errc::kModulusMismatch: return "ModulusMismatch";
    case Errc::kZeroInverse: return "ZeroInverse";
    case Errc::kNotPrime: return "NotPrime";
    case Errc::kFieldTooSmall: return "FieldTooSmall";
    case Errc::kSingular: return "Singular";
    case Errc::kDimensionMismatch: return "DimensionMismatch";
    case Errc::kIndexOutOfRange: return "IndexOutOfRange";
    case Errc::kInfeasible: return "Infeasible";
    case Errc::kBadBlockLength: return "BadBlockLength";
    case Errc::kBadParams: return "BadParams";
    case Errc::kShapeMismatch: return "ShapeMismatch";
    case Errc::kStragglerHelper: return "StragglerHelper";
    case Errc::kNotEnoughShares: return "NotEnoughShares";
    case Errc::kMissingRecovery: return "MissingRecovery";
    case Errc::kNotEnoughResponses: return "NotEnoughResponses";
    case Errc::kTooFewReceivers: return "TooFewReceivers";
    case Errc::kBadSurvivorSet: return "BadSurvivorSet";
    case Errc::kSamplingExhausted: return "SamplingExhausted";
    case Errc::kLayoutMismatch: return "LayoutMismatch";
    case Errc::kBadSubset: return "BadSubset";
    case Errc::kTooLargeToEnumerate: return "TooLargeToEnumerate";
    case Errc::kBudgetExceeded: return "BudgetExceeded";
    case Errc::kParseError: return "ParseError";
  }
  return "Unknown";
}

// All library failures are reported through this one exception type; the
// code distinguishes them.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace hsca
