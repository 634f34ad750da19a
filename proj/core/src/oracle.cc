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

#include "syntax_smc/oracle.h"

#include <cmath>
#include <set>

#include "syntax_smc/error.h"
#include "syntax_smc/logmath.h"

namespace syntax_smc {

using nlohmann::json;

namespace {

void check_size(std::size_t vocab, std::size_t max_words) {
  double total = 0.0, level = 1.0;
  for (std::size_t len = 0; len <= max_words; ++len) {
    total += level;
    level *= static_cast<double>(vocab);
    if (total > kMaxEnumeration) {
      throw Error(ErrorCode::kSupportTooLarge,
                  "enumeration over " + std::to_string(vocab) + " words up to length " +
                      std::to_string(max_words) + " exceeds the limit");
    }
  }
}

WordString to_words(const Vocabulary& vocab, std::span<const TokenId> ids) {
  WordString out;
  for (TokenId id : ids) out.emplace_back(vocab.token(id));
  return out;
}

long double to_prob(double logprob) { return std::exp(static_cast<long double>(logprob)); }

}  // namespace

Distribution ExactPosterior::distribution() const {
  Distribution out;
  for (const auto& [y, p] : table) out.emplace(y, static_cast<double>(p));
  return out;
}

ExactPosterior enumerate_posterior(const LanguageModel& lm, const Potential& potential,
                                   const TagSequence& target, std::size_t max_words) {
  const Vocabulary& vocab = lm.vocabulary();
  const std::size_t v = vocab.size();
  check_size(v, max_words);
  ExactPosterior out;
  std::map<WordString, long double> joint;
  for (std::size_t len = 0; len <= max_words; ++len) {
    std::vector<TokenId> ids(len, 0);
    for (;;) {
      long double p = 1;
      for (std::size_t n = 0; n <= len && p > 0; ++n) {
        const NextTokenDistribution d = lm.conditional(std::span<const TokenId>(ids).first(n));
        p *= to_prob(d.logprob(n < len ? ids[n] : d.eos()));
      }
      out.prior_mass += p;
      if (p > 0) {
        WordString words = to_words(vocab, ids);
        const long double psi = to_prob(potential.log_likelihood(words, target));
        if (psi > 0) {
          joint.emplace(std::move(words), p * psi);
          out.z += p * psi;
        }
      }
      // Odometer increment.
      std::size_t pos = len;
      while (pos > 0 && ++ids[pos - 1] == static_cast<TokenId>(v)) ids[--pos] = 0;
      if (pos == 0) break;
    }
  }
  if (out.z > 0) {
    for (auto& [y, pj] : joint) out.table.emplace(y, pj / out.z);
  }
  return out;
}

std::shared_ptr<const OptimalShaping> OptimalShaping::build(
    std::shared_ptr<const LanguageModel> lm, const Potential& potential,
    const TagSequence& target, std::size_t max_words) {
  check_size(lm->vocabulary().size(), max_words);
  auto table = std::make_shared<OptimalShaping>();
  table->lm_ = lm;
  table->max_words_ = max_words;
  const Vocabulary& vocab = lm->vocabulary();
  std::vector<TokenId> prefix;
  auto visit = [&](auto&& self) -> long double {
    const NextTokenDistribution d = lm->conditional(prefix);
    Node node;
    node.psi = to_prob(potential.log_likelihood(to_words(vocab, prefix), target));
    node.phi = to_prob(d.logprob(d.eos())) * node.psi;
    if (prefix.size() < max_words) {
      for (TokenId x = 0; x < d.eos(); ++x) {
        const long double px = to_prob(d.logprob(x));
        prefix.push_back(x);
        const long double below = self(self);
        prefix.pop_back();
        node.phi += px * below;
      }
    }
    table->nodes_[prefix] = node;
    return node.phi;
  };
  visit(visit);
  return table;
}

long double OptimalShaping::z() const { return phi({}); }

long double OptimalShaping::phi(std::span<const TokenId> prefix) const {
  const auto it = nodes_.find(std::vector<TokenId>(prefix.begin(), prefix.end()));
  return it == nodes_.end() ? 0 : it->second.phi;
}

long double OptimalShaping::psi(std::span<const TokenId> prefix) const {
  const auto it = nodes_.find(std::vector<TokenId>(prefix.begin(), prefix.end()));
  return it == nodes_.end() ? 0 : it->second.psi;
}

std::optional<std::vector<long double>> OptimalShaping::conditional(
    std::span<const TokenId> prefix) const {
  const long double here = phi(prefix);
  if (!(here > 0)) return std::nullopt;
  const NextTokenDistribution d = lm_->conditional(prefix);
  std::vector<long double> out(d.size(), 0);
  out[d.eos()] = to_prob(d.logprob(d.eos())) * psi(prefix) / here;
  if (prefix.size() < max_words_) {
    std::vector<TokenId> next(prefix.begin(), prefix.end());
    next.push_back(0);
    for (TokenId x = 0; x < d.eos(); ++x) {
      next.back() = x;
      out[x] = to_prob(d.logprob(x)) * phi(next) / here;
    }
  }
  return out;
}

json OptimalShaping::to_json() const {
  const Vocabulary& vocab = lm_->vocabulary();
  json rows = json::array();
  for (const auto& [prefix, node] : nodes_) {
    rows.push_back({{"prefix", to_words(vocab, prefix)},
                    {"phi", static_cast<double>(node.phi)},
                    {"psi", static_cast<double>(node.psi)}});
  }
  return {{"z", static_cast<double>(z())}, {"max_words", max_words_}, {"phi", rows}};
}

NextTokenDistribution OptimalProposal::propose(std::span<const TokenId> prefix) const {
  const auto cond = table_->conditional(prefix);
  if (!cond) return table_->lm().conditional(prefix);
  std::vector<double> weights(cond->begin(), cond->end());
  return NextTokenDistribution::normalized(weights);
}

double OptimalShaper::log_score(std::span<const std::string> prefix,
                                const TagSequence&) const {
  if (prefix.size() > table_->max_words()) return kLogZero;
  const Vocabulary& vocab = table_->lm().vocabulary();
  std::vector<TokenId> ids;
  for (const std::string& w : prefix) {
    const auto id = vocab.find(w);
    if (!id) return kLogZero;
    ids.push_back(*id);
  }
  const long double phi = table_->phi(ids);
  return phi > 0 ? static_cast<double>(std::log(phi)) : kLogZero;
}

double tvd(const Distribution& p, const Distribution& q) {
  double total = 0.0;
  for (const auto& [y, pv] : p) {
    const auto it = q.find(y);
    total += std::abs(pv - (it == q.end() ? 0.0 : it->second));
  }
  for (const auto& [y, qv] : q) {
    if (!p.contains(y)) total += qv;
  }
  return std::min(1.0, 0.5 * total);
}

Distribution run_distribution(const RunResult& result) {
  Distribution out;
  for (const SupportEntry& e : result.support) out[e.words] += e.weight;
  return out;
}

json posterior_json(const ExactPosterior& posterior) {
  json rows = json::array();
  for (const auto& [y, p] : posterior.table) {
    rows.push_back({{"words", y}, {"p", static_cast<double>(p)}});
  }
  return {{"z", static_cast<double>(posterior.z)},
          {"prior_mass", static_cast<double>(posterior.prior_mass)},
          {"posterior", rows}};
}

}  // namespace syntax_smc
