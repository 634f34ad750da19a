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

#include "syntax_smc/lm.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "syntax_smc/error.h"
#include "syntax_smc/logmath.h"

namespace syntax_smc {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Vocabulary

Vocabulary::Vocabulary(std::vector<std::string> items) : items_(std::move(items)) {
  if (items_.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "vocabulary must not be empty");
  }
  index_.reserve(items_.size());
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i] == kEosMarker) {
      throw Error(ErrorCode::kInvalidArgument,
                  "the EOS marker cannot be a vocabulary item");
    }
    if (!index_.emplace(items_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate vocabulary item '" + items_[i] + "'");
    }
  }
}

std::optional<TokenId> Vocabulary::find(std::string_view token) const {
  const auto it = index_.find(std::string(token));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  if (auto found = find(token)) return *found;
  throw Error(ErrorCode::kUnknownToken,
              "'" + std::string(token) + "' is not in the vocabulary");
}

std::string_view Vocabulary::token(TokenId id) const {
  if (id == eos()) return kEosMarker;
  return items_.at(static_cast<std::size_t>(id));
}

// ---------------------------------------------------------------------------
// NextTokenDistribution

NextTokenDistribution NextTokenDistribution::from_probs(std::span<const double> probs) {
  std::vector<double> logs;
  logs.reserve(probs.size());
  for (double p : probs) {
    if (!(p >= 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, "negative probability");
    }
    logs.push_back(p > 0.0 ? std::log(p) : kLogZero);
  }
  return from_logprobs(std::move(logs));
}

NextTokenDistribution NextTokenDistribution::from_logprobs(std::vector<double> logprobs) {
  if (logprobs.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument,
                "a distribution needs at least one token and EOS");
  }
  double total = 0.0;
  for (double lp : logprobs) {
    if (std::isnan(lp) || lp > 1e-12) {
      throw Error(ErrorCode::kInvalidArgument, "invalid log-probability");
    }
    total += std::exp(lp);
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument,
                "probabilities sum to " + std::to_string(total));
  }
  return NextTokenDistribution(std::move(logprobs));
}

NextTokenDistribution NextTokenDistribution::normalized(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative weight");
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::kInvalidArgument, "all weights are zero");
  std::vector<double> logs;
  logs.reserve(weights.size());
  const double log_total = std::log(total);
  for (double w : weights) logs.push_back(w > 0.0 ? std::log(w) - log_total : kLogZero);
  return NextTokenDistribution(std::move(logs));
}

double NextTokenDistribution::prob(TokenId id) const { return std::exp(logprob(id)); }

// ---------------------------------------------------------------------------
// Free functions

std::vector<TokenId> to_ids(const Vocabulary& vocab, std::span<const std::string> words) {
  std::vector<TokenId> ids;
  ids.reserve(words.size());
  for (const std::string& w : words) ids.push_back(vocab.id(w));
  return ids;
}

NextTokenDistribution conditional(const LanguageModel& lm,
                                  std::span<const std::string> prefix) {
  const std::vector<TokenId> ids = to_ids(lm.vocabulary(), prefix);
  return lm.conditional(ids);
}

double string_logprob(const LanguageModel& lm, std::span<const TokenId> tokens) {
  double total = 0.0;
  for (std::size_t n = 0; n <= tokens.size(); ++n) {
    const NextTokenDistribution dist = lm.conditional(tokens.first(n));
    const TokenId next = n < tokens.size() ? tokens[n] : dist.eos();
    if (next < 0 || next > dist.eos() || (n < tokens.size() && next == dist.eos())) {
      throw Error(ErrorCode::kUnknownToken, "token id out of range");
    }
    total += dist.logprob(next);
    if (total == kLogZero) return kLogZero;
  }
  return total;
}

double string_logprob(const LanguageModel& lm, std::span<const std::string> words) {
  const std::vector<TokenId> ids = to_ids(lm.vocabulary(), words);
  return string_logprob(lm, ids);
}

namespace {

void check_prefix(const Vocabulary& vocab, std::span<const TokenId> prefix) {
  for (TokenId id : prefix) {
    if (id < 0 || id >= vocab.eos()) {
      throw Error(ErrorCode::kUnknownToken,
                  "token id " + std::to_string(id) + " is not in the vocabulary");
    }
  }
}

NextTokenDistribution certain_end(std::size_t vocab_size) {
  std::vector<double> probs(vocab_size + 1, 0.0);
  probs.back() = 1.0;
  return NextTokenDistribution::from_probs(probs);
}

}  // namespace

// ---------------------------------------------------------------------------
// TabularLM

TabularLM::TabularLM(Vocabulary vocab, std::size_t max_words, Table rows)
    : vocab_(std::move(vocab)),
      max_words_(max_words),
      rows_(std::move(rows)),
      end_(certain_end(vocab_.size())) {
  for (const auto& [prefix, dist] : rows_) {
    check_prefix(vocab_, prefix);
    if (dist.size() != vocab_.size() + 1) {
      throw Error(ErrorCode::kInvalidArgument, "row size does not match vocabulary");
    }
  }
}

TabularLM TabularLM::random(Vocabulary vocab, std::size_t max_words,
                            std::uint64_t seed, double eos_weight) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> weight(0.1, 1.0);
  const std::size_t v = vocab.size();
  Table rows;
  std::vector<std::vector<TokenId>> frontier = {{}};
  for (std::size_t len = 0; len < max_words; ++len) {
    std::vector<std::vector<TokenId>> next;
    for (const auto& prefix : frontier) {
      std::vector<double> w(v + 1);
      for (std::size_t i = 0; i < v; ++i) w[i] = weight(gen);
      w[v] = eos_weight;
      rows.emplace(prefix, NextTokenDistribution::normalized(w));
      for (std::size_t i = 0; i < v; ++i) {
        auto extended = prefix;
        extended.push_back(static_cast<TokenId>(i));
        next.push_back(std::move(extended));
      }
    }
    frontier = std::move(next);
  }
  return TabularLM(std::move(vocab), max_words, std::move(rows));
}

NextTokenDistribution TabularLM::conditional(std::span<const TokenId> prefix) const {
  check_prefix(vocab_, prefix);
  if (prefix.size() >= max_words_) return end_;
  const auto it = rows_.find(std::vector<TokenId>(prefix.begin(), prefix.end()));
  if (it == rows_.end()) return end_;
  return it->second;
}

json TabularLM::to_json() const {
  json rows = json::array();
  for (const auto& [prefix, dist] : rows_) {
    json words = json::array();
    for (TokenId id : prefix) words.push_back(vocab_.token(id));
    json probs = json::object();
    for (TokenId id = 0; id <= vocab_.eos(); ++id) {
      probs[std::string(vocab_.token(id))] = dist.prob(id);
    }
    rows.push_back({{"prefix", words}, {"probs", probs}});
  }
  return {{"format", "syntax-smc-tabular"},
          {"version", 1},
          {"vocabulary", vocab_.items()},
          {"max_words", max_words_},
          {"rows", rows}};
}

TabularLM TabularLM::from_json(const json& doc) {
  try {
    if (doc.at("format") != "syntax-smc-tabular") {
      throw Error(ErrorCode::kFormat, "not a tabular LM file");
    }
    Vocabulary vocab(doc.at("vocabulary").get<std::vector<std::string>>());
    const auto max_words = doc.at("max_words").get<std::size_t>();
    Table rows;
    for (const json& row : doc.at("rows")) {
      std::vector<TokenId> prefix;
      for (const json& w : row.at("prefix")) prefix.push_back(vocab.id(w.get<std::string>()));
      std::vector<double> probs(vocab.size() + 1, 0.0);
      for (const auto& [token, p] : row.at("probs").items()) {
        const TokenId id = token == kEosMarker ? vocab.eos() : vocab.id(token);
        probs[static_cast<std::size_t>(id)] = p.get<double>();
      }
      rows.emplace(std::move(prefix), NextTokenDistribution::from_probs(probs));
    }
    return TabularLM(std::move(vocab), max_words, std::move(rows));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("tabular LM: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// NgramLM

NgramLM::NgramLM(Vocabulary vocab, NgramOptions options, std::map<History, Row> top)
    : vocab_(std::move(vocab)), options_(options) {
  counts_.resize(static_cast<std::size_t>(options_.order));
  counts_.back() = std::move(top);
  build_lower_orders();
}

// Lower-order counts are marginals of the top-order table: every position
// has a full padded history, so dropping the oldest token sums exactly.
void NgramLM::build_lower_orders() {
  for (std::size_t n = counts_.size() - 1; n > 0; --n) {
    auto& lower = counts_[n - 1];
    lower.clear();
    for (const auto& [history, row] : counts_[n]) {
      Row& target = lower[History(history.begin() + 1, history.end())];
      for (const auto& [token, c] : row.next) target.next[token] += c;
      target.total += row.total;
    }
  }
}

NgramLM NgramLM::train(std::span<const std::vector<std::string>> corpus,
                       NgramOptions options) {
  if (options.order < 1) throw Error(ErrorCode::kInvalidArgument, "order must be >= 1");
  if (!(options.k >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "k must be >= 0");
  std::set<std::string> words;
  for (const auto& sentence : corpus) words.insert(sentence.begin(), sentence.end());
  if (corpus.empty() || words.empty()) {
    throw Error(ErrorCode::kEmptyCorpus, "n-gram training needs a non-empty corpus");
  }
  Vocabulary vocab(std::vector<std::string>(words.begin(), words.end()));
  const std::size_t context = static_cast<std::size_t>(options.order) - 1;
  std::map<History, Row> top;
  for (const auto& sentence : corpus) {
    History history(context, kBegin);
    std::vector<TokenId> ids = to_ids(vocab, sentence);
    ids.push_back(vocab.eos());
    for (TokenId id : ids) {
      Row& row = top[history];
      row.next[id] += 1.0;
      row.total += 1.0;
      if (context > 0) {
        history.erase(history.begin());
        history.push_back(id);
      }
    }
  }
  return NgramLM(std::move(vocab), options, std::move(top));
}

NextTokenDistribution NgramLM::conditional(std::span<const TokenId> prefix) const {
  check_prefix(vocab_, prefix);
  const std::size_t context = counts_.size() - 1;
  History history(context, kBegin);
  const std::size_t take = std::min(context, prefix.size());
  std::copy(prefix.end() - static_cast<std::ptrdiff_t>(take), prefix.end(),
            history.end() - static_cast<std::ptrdiff_t>(take));
  const double k = options_.k;
  const std::size_t outcomes = vocab_.size() + 1;
  // Drop the oldest history token until a row with mass is found.
  for (std::size_t n = context + 1; n-- > 0;) {
    const History h(history.end() - static_cast<std::ptrdiff_t>(n), history.end());
    const auto it = counts_[n].find(h);
    const Row* row = it == counts_[n].end() ? nullptr : &it->second;
    const double total = (row ? row->total : 0.0) + k * static_cast<double>(outcomes);
    if (!(total > 0.0)) continue;
    std::vector<double> logs(outcomes, k > 0.0 ? std::log(k / total) : kLogZero);
    if (row) {
      for (const auto& [token, c] : row->next) {
        logs[static_cast<std::size_t>(token)] = std::log((c + k) / total);
      }
    }
    return NextTokenDistribution::from_logprobs(std::move(logs));
  }
  throw Error(ErrorCode::kEmptyCorpus, "n-gram model has no counts");
}

json NgramLM::to_json() const {
  json rows = json::array();
  for (const auto& [history, row] : counts_.back()) {
    json h = json::array();
    for (TokenId id : history) {
      h.push_back(id == kBegin ? std::string("<s>") : std::string(vocab_.token(id)));
    }
    json next = json::object();
    for (const auto& [token, c] : row.next) next[std::string(vocab_.token(token))] = c;
    rows.push_back({{"history", h}, {"next", next}});
  }
  return {{"format", "syntax-smc-ngram"},
          {"version", 1},
          {"order", options_.order},
          {"k", options_.k},
          {"vocabulary", vocab_.items()},
          {"counts", rows}};
}

NgramLM NgramLM::from_json(const json& doc) {
  try {
    if (doc.at("format") != "syntax-smc-ngram") {
      throw Error(ErrorCode::kFormat, "not an n-gram LM file");
    }
    NgramOptions options{doc.at("order").get<int>(), doc.at("k").get<double>()};
    Vocabulary vocab(doc.at("vocabulary").get<std::vector<std::string>>());
    std::map<History, Row> top;
    for (const json& row : doc.at("counts")) {
      History history;
      for (const json& w : row.at("history")) {
        const auto s = w.get<std::string>();
        history.push_back(s == "<s>" ? kBegin : vocab.id(s));
      }
      Row& r = top[history];
      for (const auto& [token, c] : row.at("next").items()) {
        const TokenId id = token == kEosMarker ? vocab.eos() : vocab.id(token);
        r.next[id] += c.get<double>();
        r.total += c.get<double>();
      }
    }
    return NgramLM(std::move(vocab), options, std::move(top));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("n-gram LM: ") + e.what());
  }
}

std::vector<std::vector<std::string>> read_corpus(std::istream& in) {
  std::vector<std::vector<std::string>> corpus;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream words(line);
    std::vector<std::string> sentence;
    for (std::string w; words >> w;) sentence.push_back(std::move(w));
    if (!sentence.empty()) corpus.push_back(std::move(sentence));
  }
  return corpus;
}

}  // namespace syntax_smc
