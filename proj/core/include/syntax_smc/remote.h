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

// Client for a token-level language-model service speaking JSON over HTTP:
//
//   POST /v1/next_token {prefix_tokens}          -> {top, eos_logprob, other_mass_logprob}
//   POST /v1/score      {prefix_tokens, token_id} -> {logprob}
//   POST /v1/tags       {prefix_tokens}          -> {odd: {tag: logprob}, even: {...}}
//   POST /v1/tokenize   {text}                   -> {tokens, word_ends}
//
// `top` entries are [token_id, logprob] or [token_id, logprob, text]. Log
// probabilities may be numbers or decimal strings. The token text lets the
// client see word boundaries: a token whose text starts with whitespace,
// "Ġ" or "▁" opens a new word.

#ifndef SYNTAX_SMC_REMOTE_H_
#define SYNTAX_SMC_REMOTE_H_

#include <functional>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "syntax_smc/inference.h"
#include "syntax_smc/lm.h"
#include "syntax_smc/taggers.h"

namespace syntax_smc {

class Transport {
 public:
  virtual ~Transport() = default;
  // Throws Error{kRemote} on connection failures and non-200 replies.
  virtual nlohmann::json post(const std::string& endpoint,
                              const nlohmann::json& body) const = 0;
};

class HttpTransport final : public Transport {
 public:
  // `base_url` like "http://127.0.0.1:8000".
  explicit HttpTransport(std::string base_url, double timeout_seconds = 30.0);
  nlohmann::json post(const std::string& endpoint, const nlohmann::json& body) const override;

 private:
  std::string base_url_;
  double timeout_;
};

// Answers from recorded exchanges, JSONL records
// {"endpoint": ..., "request": {...}, "response": {...}}. Unknown requests
// throw Error{kRemote}.
class ReplayTransport final : public Transport {
 public:
  static ReplayTransport from_jsonl(std::istream& in);
  void add(const std::string& endpoint, const nlohmann::json& request,
           const nlohmann::json& response);
  nlohmann::json post(const std::string& endpoint, const nlohmann::json& body) const override;
  std::size_t size() const noexcept { return replies_.size(); }

 private:
  std::map<std::string, nlohmann::json> replies_;
};

struct TopToken {
  TokenId id = 0;
  double logprob = kLogZero;
  std::string text;
};

struct NextTokenReply {
  std::vector<TopToken> top;
  double eos_logprob = kLogZero;
  double other_mass_logprob = kLogZero;

  // Exact logprob of a top token, or nullopt.
  std::optional<double> find(TokenId id) const;
};

struct TagReply {
  std::map<std::string, double> odd;
  std::map<std::string, double> even;
};

struct TokenizeReply {
  std::vector<TokenId> tokens;
  std::vector<bool> word_ends;
};

struct RemoteOptions {
  bool word_level = false;            // one token per word
  std::size_t max_tokens_per_word = 16;
  double mass_tolerance = 1e-6;
};

class RemoteLM {
 public:
  RemoteLM(std::shared_ptr<const Transport> transport, RemoteOptions options = {})
      : transport_(std::move(transport)), options_(options) {}

  // Throws Error{kRemote} on malformed replies, including top + eos + other
  // mass not summing to 1.
  NextTokenReply next_token(std::span<const TokenId> prefix) const;
  double score(std::span<const TokenId> prefix, TokenId token) const;
  // From the top list when present, else from the score endpoint.
  double token_logprob(std::span<const TokenId> prefix, TokenId token) const;
  TagReply tags(std::span<const TokenId> prefix) const;
  TokenizeReply tokenize(std::string_view text) const;

  const RemoteOptions& options() const noexcept { return options_; }

 private:
  std::shared_ptr<const Transport> transport_;
  RemoteOptions options_;
};

// True if a token with this text opens a new word.
bool starts_new_word(std::string_view text);
// Token text without its leading boundary marker.
std::string strip_boundary(std::string_view text);

// One draw from the token proposal.
using TokenSampler =
    std::function<CarryToken(std::span<const TokenId> prefix, std::size_t draw)>;

struct AdvanceResult {
  bool eos = false;
  std::string word;
  std::vector<TokenId> tokens;
  std::vector<double> log_ratios;  // per token, log p_lm - log q
  double log_p = 0.0;
  double log_q = 0.0;
  std::optional<CarryToken> carry;  // the look-ahead that opens the next word
};

// Samples tokens until the next one opens a new word (or is EOS). A carried
// token from the previous word is used as the first token. With word_level
// the first token is the whole word. Throws Error{kBoundaryUndetected} when
// a word runs past max_tokens.
AdvanceResult advance_word(const TokenSampler& sample, std::span<const TokenId> prefix,
                           std::optional<CarryToken> carry, bool word_level,
                           std::size_t max_tokens = 16);

// Proposal: the top-K tokens and EOS, renormalized; p_lm from the reply.
class RemoteStepper final : public Stepper {
 public:
  explicit RemoteStepper(const RemoteLM& lm) : lm_(lm) {}
  WordStep step(const Particle& particle, const CounterRng& rng, std::size_t index,
                std::size_t step) const override;
  double log_eos(const Particle& particle) const override;

 private:
  const RemoteLM& lm_;
};

// Tag distributions from the service; word i is scored from the tokens up
// to the end of word i.
class RemoteTagger final : public SlotTagger {
 public:
  explicit RemoteTagger(const RemoteLM& lm) : lm_(lm) {}
  std::pair<double, double> slot_logprobs(std::span<const std::string> words, std::size_t index,
                                          std::string_view leaf_tag,
                                          std::string_view internal_tag) const override;

 private:
  const RemoteLM& lm_;
};

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_REMOTE_H_
