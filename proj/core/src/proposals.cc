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

#include "syntax_smc/proposals.h"

#include <algorithm>
#include <cmath>

#include "syntax_smc/error.h"
#include "syntax_smc/logmath.h"

namespace syntax_smc {

using nlohmann::json;

PosTaggedSentence pos_tagged(const Tree& tree) {
  return {leaf_words(tree), pos_sequence(tree)};
}

namespace {

std::string pair_key(std::string_view pos, std::string_view next) {
  std::string key(pos);
  key += '|';
  key += next;
  return key;
}

void normalize(std::map<std::string, PosBigramModel::Row>& table) {
  for (auto& [key, row] : table) {
    double total = 0.0;
    for (const auto& [w, c] : row) total += c;
    for (auto& [w, c] : row) c /= total;
  }
}

}  // namespace

PosBigramModel PosBigramModel::train(std::span<const PosTaggedSentence> corpus,
                                     double floor) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "bigram needs training data");
  if (!(floor >= 0.0) || floor >= 1.0) {
    throw Error(ErrorCode::kInvalidArgument, "floor must lie in [0, 1)");
  }
  PosBigramModel model;
  model.floor_ = floor;
  for (const PosTaggedSentence& s : corpus) {
    if (s.words.size() != s.pos.size()) {
      throw Error(ErrorCode::kInvalidArgument, "words and POS differ in length");
    }
    for (std::size_t n = 0; n < s.words.size(); ++n) {
      const std::string_view next = n + 1 < s.pos.size() ? std::string_view(s.pos[n + 1]) : kEndPos;
      model.pairs_[pair_key(s.pos[n], next)][s.words[n]] += 1.0;
      model.backoff_[s.pos[n]][s.words[n]] += 1.0;
    }
  }
  if (model.backoff_.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus has no words");
  normalize(model.pairs_);
  normalize(model.backoff_);
  return model;
}

const PosBigramModel::Row* PosBigramModel::row(std::string_view pos,
                                               std::string_view next) const {
  if (const auto it = pairs_.find(pair_key(pos, next)); it != pairs_.end()) {
    return &it->second;
  }
  if (const auto it = backoff_.find(std::string(pos)); it != backoff_.end()) {
    return &it->second;
  }
  return nullptr;
}

json PosBigramModel::to_json() const {
  return {{"pairs", pairs_}, {"backoff", backoff_}, {"floor", floor_}};
}

PosBigramModel PosBigramModel::from_json(const json& doc) {
  try {
    PosBigramModel model;
    model.pairs_ = doc.at("pairs").get<std::map<std::string, Row>>();
    model.backoff_ = doc.at("backoff").get<std::map<std::string, Row>>();
    model.floor_ = doc.at("floor").get<double>();
    for (const auto* table : {&model.pairs_, &model.backoff_}) {
      for (const auto& [key, row] : *table) {
        double total = 0.0;
        for (const auto& [w, p] : row) total += p;
        if (std::abs(total - 1.0) > 1e-9) {
          throw Error(ErrorCode::kFormat, "bigram row '" + key + "' does not sum to 1");
        }
      }
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("bigram model: ") + e.what());
  }
}

BigramMixtureProposal::BigramMixtureProposal(std::shared_ptr<const LanguageModel> lm,
                                             std::shared_ptr<const PosBigramModel> bigram,
                                             const TreeTemplate& tmpl, std::size_t top_k)
    : lm_(std::move(lm)),
      bigram_(std::move(bigram)),
      length_(tmpl.word_count()),
      top_k_(top_k) {
  const std::vector<std::string> pos = tmpl.pos();
  const Vocabulary& vocab = lm_->vocabulary();
  candidates_.resize(length_);
  for (std::size_t n = 0; n < length_; ++n) {
    const std::string_view next = n + 1 < length_ ? std::string_view(pos[n + 1]) : kEndPos;
    const PosBigramModel::Row* row = bigram_->row(pos[n], next);
    if (!row) continue;
    for (const auto& [word, p] : *row) {
      if (const auto id = vocab.find(word); id && p > 0.0) candidates_[n].emplace_back(*id, p);
    }
  }
}

NextTokenDistribution BigramMixtureProposal::propose(std::span<const TokenId> prefix) const {
  const std::size_t n = prefix.size();
  const std::size_t v = lm_->vocabulary().size();
  std::vector<double> q(v + 1, 0.0);
  if (n >= length_) {
    q[v] = 1.0;
    return NextTokenDistribution::from_probs(q);
  }
  const NextTokenDistribution prior = lm_->conditional(prefix);

  std::vector<double> main(v, 0.0);
  double main_total = 0.0;
  for (const auto& [id, p] : candidates_[n]) {
    main[id] = prior.prob(id) * p;
    main_total += main[id];
  }

  const double eps = bigram_->floor();
  std::vector<double> floor(v, 0.0);
  double floor_total = 0.0;
  if (eps > 0.0) {
    std::vector<TokenId> order(v);
    for (std::size_t i = 0; i < v; ++i) order[i] = static_cast<TokenId>(i);
    const std::size_t k = std::min(top_k_, v);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](TokenId a, TokenId b) {
                        const double pa = prior.logprob(a), pb = prior.logprob(b);
                        return pa != pb ? pa > pb : a < b;
                      });
    for (std::size_t i = 0; i < k; ++i) {
      floor[order[i]] = prior.prob(order[i]);
      floor_total += floor[order[i]];
    }
  }

  const bool has_main = main_total > 0.0;
  const bool has_floor = floor_total > 0.0;
  if (!has_main && !has_floor) {
    throw Error(ErrorCode::kEmptyCandidateSet,
                "no candidate word at position " + std::to_string(n));
  }
  const double main_share = has_main ? (has_floor ? 1.0 - eps : 1.0) : 0.0;
  const double floor_share = has_floor ? (has_main ? eps : 1.0) : 0.0;
  for (std::size_t i = 0; i < v; ++i) {
    if (has_main) q[i] += main_share * main[i] / main_total;
    if (has_floor) q[i] += floor_share * floor[i] / floor_total;
  }
  return NextTokenDistribution::normalized(q);
}

}  // namespace syntax_smc
