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

// Exact posteriors, evidence and optimal shaping by exhaustive enumeration
// of every string of at most max_words words. Arithmetic uses long double.
// For language models with unbounded support the sums are restricted to
// that length, matching the forced EOS of the samplers.

#ifndef SYNTAX_SMC_ORACLE_H_
#define SYNTAX_SMC_ORACLE_H_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "syntax_smc/inference.h"
#include "syntax_smc/lm.h"
#include "syntax_smc/proposals.h"
#include "syntax_smc/taggers.h"

namespace syntax_smc {

using WordString = std::vector<std::string>;
using Distribution = std::map<WordString, double>;

// Largest sum over lengths of |V|^length accepted by the oracle.
inline constexpr double kMaxEnumeration = 1e7;

struct ExactPosterior {
  long double z = 0;
  long double prior_mass = 0;  // total prior over the enumerated strings
  std::map<WordString, long double> table;  // strings with positive mass

  Distribution distribution() const;
};

// Flat enumeration, length by length. Throws Error{kSupportTooLarge}.
ExactPosterior enumerate_posterior(const LanguageModel& lm, const Potential& potential,
                                   const TagSequence& target, std::size_t max_words);

// phi*(y) = sum over continuations y' of p_lm(y' | y) psi(y y'), by a
// backward recursion over the prefix tree; phi*(empty) = Z.
class OptimalShaping {
 public:
  // Throws Error{kSupportTooLarge}.
  static std::shared_ptr<const OptimalShaping> build(std::shared_ptr<const LanguageModel> lm,
                                                     const Potential& potential,
                                                     const TagSequence& target,
                                                     std::size_t max_words);

  long double z() const;
  // 0 for prefixes outside the table.
  long double phi(std::span<const TokenId> prefix) const;
  long double psi(std::span<const TokenId> prefix) const;
  // phi*(x | y) over tokens and EOS, or nullopt when phi*(y) = 0.
  std::optional<std::vector<long double>> conditional(std::span<const TokenId> prefix) const;

  const LanguageModel& lm() const noexcept { return *lm_; }
  std::size_t max_words() const noexcept { return max_words_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  nlohmann::json to_json() const;

 private:
  struct Node {
    long double phi = 0;
    long double psi = 0;
  };

  std::shared_ptr<const LanguageModel> lm_;
  std::size_t max_words_ = 0;
  std::map<std::vector<TokenId>, Node> nodes_;
};

// q = phi*(. | y); falls back to the prior where phi*(y) = 0.
class OptimalProposal final : public Proposal {
 public:
  explicit OptimalProposal(std::shared_ptr<const OptimalShaping> table)
      : table_(std::move(table)) {}
  NextTokenDistribution propose(std::span<const TokenId> prefix) const override;

 private:
  std::shared_ptr<const OptimalShaping> table_;
};

// phi = phi*; the empty prefix scores log Z.
class OptimalShaper final : public Shaper {
 public:
  explicit OptimalShaper(std::shared_ptr<const OptimalShaping> table)
      : table_(std::move(table)) {}
  double log_score(std::span<const std::string> prefix, const TagSequence& target) const override;

 private:
  std::shared_ptr<const OptimalShaping> table_;
};

// Half the L1 distance; strings missing from one side have mass 0 there.
double tvd(const Distribution& p, const Distribution& q);

// Normalized support of a run as a distribution.
Distribution run_distribution(const RunResult& result);

nlohmann::json posterior_json(const ExactPosterior& posterior);

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_ORACLE_H_
