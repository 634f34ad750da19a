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

// Proposal distributions q(x | y) over the next word.

#ifndef SYNTAX_SMC_PROPOSALS_H_
#define SYNTAX_SMC_PROPOSALS_H_

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "syntax_smc/lm.h"
#include "syntax_smc/tree.h"

namespace syntax_smc {

class Proposal {
 public:
  virtual ~Proposal() = default;
  // Distribution over the LM vocabulary ids plus EOS given the prefix; the
  // next word's position is prefix.size().
  virtual NextTokenDistribution propose(std::span<const TokenId> prefix) const = 0;

  double logprob(std::span<const TokenId> prefix, TokenId next) const {
    return propose(prefix).logprob(next);
  }
};

// q = p_lm.
class PriorProposal final : public Proposal {
 public:
  explicit PriorProposal(std::shared_ptr<const LanguageModel> lm) : lm_(std::move(lm)) {}
  NextTokenDistribution propose(std::span<const TokenId> prefix) const override {
    return lm_->conditional(prefix);
  }

 private:
  std::shared_ptr<const LanguageModel> lm_;
};

// Padding POS after the last word.
inline constexpr std::string_view kEndPos = "END";

struct PosTaggedSentence {
  std::vector<std::string> words;
  std::vector<std::string> pos;
};

// Words and preterminal labels of a tree.
PosTaggedSentence pos_tagged(const Tree& tree);

// Word distributions given the POS at the current position and the next.
class PosBigramModel {
 public:
  using Row = std::map<std::string, double>;

  // MLE counts. Throws Error{kEmptyCorpus} / Error{kInvalidArgument}.
  static PosBigramModel train(std::span<const PosTaggedSentence> corpus,
                              double floor = 1e-6);

  // The pair row if (pos, next) was seen, else the backoff row for pos,
  // else nullptr.
  const Row* row(std::string_view pos, std::string_view next) const;
  const std::map<std::string, Row>& pairs() const noexcept { return pairs_; }
  const std::map<std::string, Row>& backoff() const noexcept { return backoff_; }
  double floor() const noexcept { return floor_; }

  // {"pairs": {"DT|NN": {"the": p, ...}}, "backoff": {...}, "floor": eps}
  nlohmann::json to_json() const;
  static PosBigramModel from_json(const nlohmann::json& doc);

 private:
  std::map<std::string, Row> pairs_;
  std::map<std::string, Row> backoff_;
  double floor_ = 1e-6;
};

// q(w | y) proportional to p_lm(w | y) * p_bigram(w | pos_n, pos_n+1), mixed
// with floor mass eps spread over the LM's top-K words in proportion to
// their prior probability. Returns EOS with probability 1 once the template
// length is reached.
class BigramMixtureProposal final : public Proposal {
 public:
  BigramMixtureProposal(std::shared_ptr<const LanguageModel> lm,
                        std::shared_ptr<const PosBigramModel> bigram,
                        const TreeTemplate& tmpl, std::size_t top_k = 50);

  // Throws Error{kEmptyCandidateSet} when neither the bigram row nor the
  // floor gives any mass.
  NextTokenDistribution propose(std::span<const TokenId> prefix) const override;

 private:
  std::shared_ptr<const LanguageModel> lm_;
  std::shared_ptr<const PosBigramModel> bigram_;
  std::size_t length_;
  std::size_t top_k_;
  // Candidate (id, p_bigram) per position.
  std::vector<std::vector<std::pair<TokenId, double>>> candidates_;
};

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_PROPOSALS_H_
