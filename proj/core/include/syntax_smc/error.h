// Copyright 2026 The syntax-smc Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SYNTAX_SMC_ERROR_H_
#define SYNTAX_SMC_ERROR_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace syntax_smc {

enum class ErrorCode {
  kUnbalancedParens,
  kEmptyLabel,
  kEmptyTree,
  kInvalidTree,
  kInvalidLabel,
  kInvalidDummyPlacement,
  kMalformedSequence,
  kUnknownToken,
  kEmptyCorpus,
  kEmptyCandidateSet,
  kAllZeroWeights,
  kDegenerateRun,
  kBoundaryUndetected,
  kSupportTooLarge,
  kEmptyList,
  kGrammarFormat,
  kFormat,
  kInvalidArgument,
  kRemote,
};

std::string_view error_code_name(ErrorCode code);

// Base exception for every recoverable failure in the library. `position`
// is a byte offset for text parsers and a tag index for the codec.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::optional<std::size_t> position = std::nullopt);

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> position() const noexcept { return position_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> position_;
};

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_ERROR_H_
