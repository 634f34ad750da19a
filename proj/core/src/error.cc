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

#include "syntax_smc/error.h"

namespace syntax_smc {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnbalancedParens: return "UnbalancedParens";
    case ErrorCode::kEmptyLabel: return "EmptyLabel";
    case ErrorCode::kEmptyTree: return "EmptyTree";
    case ErrorCode::kInvalidTree: return "InvalidTree";
    case ErrorCode::kInvalidLabel: return "InvalidLabel";
    case ErrorCode::kInvalidDummyPlacement: return "InvalidDummyPlacement";
    case ErrorCode::kMalformedSequence: return "MalformedSequence";
    case ErrorCode::kUnknownToken: return "UnknownToken";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kEmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::kAllZeroWeights: return "AllZeroWeights";
    case ErrorCode::kDegenerateRun: return "DegenerateRun";
    case ErrorCode::kBoundaryUndetected: return "BoundaryUndetected";
    case ErrorCode::kSupportTooLarge: return "SupportTooLarge";
    case ErrorCode::kEmptyList: return "EmptyList";
    case ErrorCode::kGrammarFormat: return "GrammarFormat";
    case ErrorCode::kFormat: return "Format";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kRemote: return "Remote";
  }
  return "Unknown";
}

namespace {

std::string format_message(ErrorCode code, const std::string& message,
                           std::optional<std::size_t> position) {
  std::string out(error_code_name(code));
  if (position) out += " at " + std::to_string(*position);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorCode code, const std::string& message,
             std::optional<std::size_t> position)
    : std::runtime_error(format_message(code, message, position)),
      code_(code),
      position_(position) {}

}  // namespace syntax_smc
