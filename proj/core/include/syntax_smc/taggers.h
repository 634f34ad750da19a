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

// Potentials psi(t | y) over complete strings and shaping functions
// phi(t | y<=n) over prefixes.
//
// A factored tagger gives each word a pair of tag distributions, one for its
// leaf slot and one for its internal slot. The potential is the product of
// the 2L slot probabilities at the target tags, with the last internal slot
// fixed to the dummy tag. The grammar oracle instead computes the exact tag
// posterior of a PCFG.

#ifndef SYNTAX_SMC_TAGGERS_H_
#define SYNTAX_SMC_TAGGERS_H_

#include <cstdint>
#include <istream>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "syntax_smc/lm.h"
#include "syntax_smc/pcfg.h"
#include "syntax_smc/tetratag.h"

namespace syntax_smc {

// Occupies the internal slot of the last word.
inline constexpr std::string_view kDummyTag = "DUMMY";

class Potential {
 public:
  virtual ~Potential() = default;
  // log psi(target | words); -infinity when |words| != target.word_count().
  virtual double log_likelihood(std::span<const std::string> words,
                                const TagSequence& target) const = 0;
};

class Shaper {
 public:
  virtual ~Shaper() = default;
  // log phi(target | prefix). The empty prefix scores 0 for every tagger
  // shaper; an oracle shaper may return log Z there.
  virtual double log_score(std::span<const std::string> prefix,
                           const TagSequence& target) const = 0;
};

double likelihood(const Potential& potential, std::span<const std::string> words,
                  const TagSequence& target);
double shaping_prefix_score(const Shaper& shaper, std::span<const std::string> prefix,
                            const TagSequence& target);

// psi = 1 for every string.
class UnitPotential final : public Potential {
 public:
  double log_likelihood(std::span<const std::string>, const TagSequence&) const override {
    return 0.0;
  }
};

// phi = 1 on every prefix: shaping switched off.
class UnitShaper final : public Shaper {
 public:
  double log_score(std::span<const std::string>, const TagSequence&) const override {
    return 0.0;
  }
};

// A tagger that scores the two slots of one word.
class SlotTagger {
 public:
  virtual ~SlotTagger() = default;
  // Log-probabilities of `leaf_tag` and `internal_tag` for word `index`
  // given the visible words. Unknown tags score -infinity.
  virtual std::pair<double, double> slot_logprobs(std::span<const std::string> words,
                                                  std::size_t index,
                                                  std::string_view leaf_tag,
                                                  std::string_view internal_tag) const = 0;
};

// Product over all words, each seeing the whole string.
class FactoredPotential final : public Potential {
 public:
  explicit FactoredPotential(std::shared_ptr<const SlotTagger> tagger)
      : tagger_(std::move(tagger)) {}
  double log_likelihood(std::span<const std::string> words,
                        const TagSequence& target) const override;

 private:
  std::shared_ptr<const SlotTagger> tagger_;
};

// Product over the prefix, word i seeing words up to i only.
class FactoredShaper final : public Shaper {
 public:
  explicit FactoredShaper(std::shared_ptr<const SlotTagger> tagger)
      : tagger_(std::move(tagger)) {}
  double log_score(std::span<const std::string> prefix,
                   const TagSequence& target) const override;

 private:
  std::shared_ptr<const SlotTagger> tagger_;
};

// ---------------------------------------------------------------------------
// Grammar oracle

// Exact tag probabilities under a PCFG. As a potential it returns
// P(t | w); as a shaper it returns P(first 2n tags | first n words, length L),
// both marginalizing preterminals, which the tags do not carry.
class GrammarOracleTagger final : public Potential, public Shaper {
 public:
  explicit GrammarOracleTagger(std::shared_ptr<const Pcfg> grammar)
      : grammar_(std::move(grammar)) {}

  double log_likelihood(std::span<const std::string> words,
                        const TagSequence& target) const override;
  double log_score(std::span<const std::string> prefix,
                   const TagSequence& target) const override;

  const Pcfg& grammar() const noexcept { return *grammar_; }

 private:
  double log_conditional(std::span<const std::string> fixed,
                         const TagSequence& target) const;

  std::shared_ptr<const Pcfg> grammar_;
};

// ---------------------------------------------------------------------------
// Feature tagger

class TagVocabulary {
 public:
  TagVocabulary() = default;
  // The dummy tag is added if missing.
  explicit TagVocabulary(std::vector<std::string> items);

  std::size_t size() const noexcept { return items_.size(); }
  std::optional<std::size_t> find(std::string_view tag) const;
  std::size_t dummy() const noexcept { return dummy_; }
  const std::string& item(std::size_t i) const { return items_.at(i); }
  const std::vector<std::string>& items() const noexcept { return items_; }

 private:
  std::vector<std::string> items_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t dummy_ = 0;
};

// Distributions over a TagVocabulary for the leaf (odd) and internal (even)
// slot of one word.
struct TagDistributionPair {
  std::vector<double> odd;
  std::vector<double> even;
};

struct TaggedSentence {
  std::vector<std::string> words;
  TagSequence tags;
};

// JSONL records {"words": [...], "tags": ["l/NP", ...]}. A trailing dummy
// tag is accepted and dropped. Throws Error{kFormat} with the line number.
std::vector<TaggedSentence> read_tagged_corpus(std::istream& in);
nlohmann::json tagged_sentence_json(const TaggedSentence& sentence);

enum class TaggerContext { kFull, kPrefix };

struct FeatureTaggerOptions {
  TaggerContext context = TaggerContext::kFull;
  double learning_rate = 0.1;
  int epochs = 50;
  double l2 = 1e-4;
  std::uint64_t seed = 0;
};

// Two multinomial logistic heads over sparse features of a word and its
// neighbours: identity, lowercase, 1-3 character suffixes, previous word,
// and with full context the next word.
class FeatureTagger final : public SlotTagger {
 public:
  // Throws Error{kEmptyCorpus}.
  static FeatureTagger train(std::span<const TaggedSentence> corpus,
                             FeatureTaggerOptions options = {});

  TagDistributionPair distributions(std::span<const std::string> words,
                                    std::size_t index) const;
  std::pair<double, double> slot_logprobs(std::span<const std::string> words,
                                          std::size_t index,
                                          std::string_view leaf_tag,
                                          std::string_view internal_tag) const override;

  TaggerContext context() const noexcept { return context_; }
  const TagVocabulary& tags() const noexcept { return tags_; }

  nlohmann::json to_json() const;
  static FeatureTagger from_json(const nlohmann::json& doc);

 private:
  FeatureTagger() = default;

  std::vector<std::size_t> active_features(std::span<const std::string> words,
                                           std::size_t index) const;
  std::vector<double> head(const std::vector<double>& weights,
                           const std::vector<std::size_t>& features) const;

  TaggerContext context_ = TaggerContext::kFull;
  TagVocabulary tags_;
  std::vector<std::string> feature_names_;
  std::unordered_map<std::string, std::size_t> feature_index_;
  // Row-major [feature][tag].
  std::vector<double> odd_weights_;
  std::vector<double> even_weights_;
};

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_TAGGERS_H_
