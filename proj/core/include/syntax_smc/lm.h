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

// Language-model priors: p(y) = p(eos | y) * prod_n p(y_n | y_<n).
//
// Built-in models are word level, one token per word. Every probability is
// handled in log space; -infinity is an exact zero.

#ifndef SYNTAX_SMC_LM_H_
#define SYNTAX_SMC_LM_H_

#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"

namespace syntax_smc {

using TokenId = std::int32_t;

inline constexpr double kLogZero = -std::numeric_limits<double>::infinity();
inline constexpr std::string_view kEosMarker = "</s>";

// Ordered token set; the end-of-string marker is not a member and takes id
// size().
class Vocabulary {
 public:
  Vocabulary() = default;
  // Throws Error{kInvalidArgument} on duplicates, an empty list or the EOS
  // marker appearing as a token.
  explicit Vocabulary(std::vector<std::string> items);

  std::size_t size() const noexcept { return items_.size(); }
  TokenId eos() const noexcept { return static_cast<TokenId>(items_.size()); }
  std::optional<TokenId> find(std::string_view token) const;
  // Throws Error{kUnknownToken}.
  TokenId id(std::string_view token) const;
  // The EOS id maps to kEosMarker.
  std::string_view token(TokenId id) const;
  std::span<const std::string> items() const noexcept { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, TokenId> index_;
};

// Distribution over vocabulary ids plus EOS (the last entry).
class NextTokenDistribution {
 public:
  NextTokenDistribution() = default;

  // Throws Error{kInvalidArgument} if an entry is negative or the total is
  // not 1 within 1e-9.
  static NextTokenDistribution from_probs(std::span<const double> probs);
  static NextTokenDistribution from_logprobs(std::vector<double> logprobs);
  // Uses the weights up to normalization.
  static NextTokenDistribution normalized(std::span<const double> weights);

  std::size_t size() const noexcept { return logprobs_.size(); }
  TokenId eos() const noexcept { return static_cast<TokenId>(logprobs_.size()) - 1; }
  double logprob(TokenId id) const { return logprobs_.at(static_cast<std::size_t>(id)); }
  double prob(TokenId id) const;
  std::span<const double> logprobs() const noexcept { return logprobs_; }

 private:
  explicit NextTokenDistribution(std::vector<double> logprobs)
      : logprobs_(std::move(logprobs)) {}

  std::vector<double> logprobs_;
};

// Implementations must be safe for concurrent const calls.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocabulary() const = 0;
  // Throws Error{kUnknownToken} for ids outside the vocabulary.
  virtual NextTokenDistribution conditional(std::span<const TokenId> prefix) const = 0;
};

// Maps words to ids; throws Error{kUnknownToken}.
std::vector<TokenId> to_ids(const Vocabulary& vocab,
                            std::span<const std::string> words);

NextTokenDistribution conditional(const LanguageModel& lm,
                                  std::span<const std::string> prefix);

// log p(y), including the final EOS factor.
double string_logprob(const LanguageModel& lm, std::span<const TokenId> tokens);
double string_logprob(const LanguageModel& lm, std::span<const std::string> words);

// Explicit next-token table. Prefixes of max_words tokens, and prefixes
// with no row, end with probability 1, so the support is finite.
class TabularLM final : public LanguageModel {
 public:
  using Table = std::map<std::vector<TokenId>, NextTokenDistribution>;

  TabularLM(Vocabulary vocab, std::size_t max_words, Table rows);

  // Random rows for every prefix shorter than max_words. `eos_weight` is
  // the relative EOS weight against per-token weights drawn from U(0.1, 1).
  static TabularLM random(Vocabulary vocab, std::size_t max_words,
                          std::uint64_t seed, double eos_weight = 0.3);

  const Vocabulary& vocabulary() const override { return vocab_; }
  NextTokenDistribution conditional(std::span<const TokenId> prefix) const override;

  std::size_t max_words() const noexcept { return max_words_; }
  const Table& rows() const noexcept { return rows_; }

  nlohmann::json to_json() const;
  static TabularLM from_json(const nlohmann::json& doc);

 private:
  Vocabulary vocab_;
  std::size_t max_words_;
  Table rows_;
  NextTokenDistribution end_;
};

struct NgramOptions {
  int order = 2;
  double k = 0.01;  // add-k smoothing constant
};

// Add-k smoothed n-gram model over the corpus vocabulary and EOS. Histories
// are padded with a begin marker. With k = 0 an unseen history falls back
// to the next lower order.
class NgramLM final : public LanguageModel {
 public:
  // Throws Error{kEmptyCorpus} / Error{kInvalidArgument}.
  static NgramLM train(std::span<const std::vector<std::string>> corpus,
                       NgramOptions options = {});

  const Vocabulary& vocabulary() const override { return vocab_; }
  NextTokenDistribution conditional(std::span<const TokenId> prefix) const override;

  const NgramOptions& options() const noexcept { return options_; }

  nlohmann::json to_json() const;
  static NgramLM from_json(const nlohmann::json& doc);

 private:
  static constexpr TokenId kBegin = -1;
  using History = std::vector<TokenId>;
  struct Row {
    std::map<TokenId, double> next;
    double total = 0.0;
  };

  NgramLM(Vocabulary vocab, NgramOptions options, std::map<History, Row> top);
  void build_lower_orders();

  Vocabulary vocab_;
  NgramOptions options_;
  // counts_[n] holds histories of length n (0 <= n < order).
  std::vector<std::map<History, Row>> counts_;
};

// One whitespace-tokenized sentence per line; blank lines are skipped.
std::vector<std::vector<std::string>> read_corpus(std::istream& in);

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_LM_H_
