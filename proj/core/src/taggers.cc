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

#include "syntax_smc/taggers.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "syntax_smc/error.h"
#include "syntax_smc/logmath.h"

namespace syntax_smc {

using nlohmann::json;

double likelihood(const Potential& potential, std::span<const std::string> words,
                  const TagSequence& target) {
  return std::exp(potential.log_likelihood(words, target));
}

double shaping_prefix_score(const Shaper& shaper, std::span<const std::string> prefix,
                            const TagSequence& target) {
  return std::exp(shaper.log_score(prefix, target));
}

namespace {

// Tag strings of word i's two slots; the last word's internal slot is the
// dummy tag.
std::pair<std::string, std::string> slot_tags(const TagSequence& target, std::size_t i) {
  std::string internal = i + 1 < target.word_count() ? target.internal_tag(i).to_string()
                                                     : std::string(kDummyTag);
  return {target.leaf_tag(i).to_string(), std::move(internal)};
}

}  // namespace

double FactoredPotential::log_likelihood(std::span<const std::string> words,
                                         const TagSequence& target) const {
  const std::size_t n = target.word_count();
  if (words.size() != n) return kLogZero;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto [leaf, internal] = slot_tags(target, i);
    const auto [odd, even] = tagger_->slot_logprobs(words, i, leaf, internal);
    total += odd;
    if (i + 1 < n) total += even;
    if (total == kLogZero) break;
  }
  return total;
}

double FactoredShaper::log_score(std::span<const std::string> prefix,
                                 const TagSequence& target) const {
  const std::size_t n = target.word_count();
  if (prefix.size() > n) return kLogZero;
  double total = 0.0;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const auto [leaf, internal] = slot_tags(target, i);
    const auto [odd, even] = tagger_->slot_logprobs(prefix.first(i + 1), i, leaf, internal);
    total += odd;
    if (i + 1 < n) total += even;
    if (total == kLogZero) break;
  }
  return total;
}

// ---------------------------------------------------------------------------
// Grammar oracle

namespace {

// A tag resolved against the grammar's symbols.
struct ResolvedTag {
  bool left = true;
  bool possible = true;          // false if some label is not a grammar symbol
  std::vector<SymbolId> chain;   // empty for a plain leaf or a dummy node
  double chain_prob = 1.0;       // product of the unary rules along the chain
};

ResolvedTag resolve(const Pcfg& g, const Tetratag& tag) {
  ResolvedTag r;
  r.left = tag.is_left();
  if (tag.label.empty()) {
    // Binary nodes always carry a symbol in a grammar derivation.
    r.possible = tag.is_leaf();
    return r;
  }
  for (const std::string& part : split_chain(tag.label)) {
    const auto id = g.find_symbol(part);
    if (!id) {
      r.possible = false;
      return r;
    }
    r.chain.push_back(*id);
  }
  for (std::size_t t = 0; t + 1 < r.chain.size(); ++t) {
    r.chain_prob *= g.unary(r.chain[t], r.chain[t + 1]);
  }
  return r;
}

// Inside sums over trees of `length` words whose first fixed.size() words
// are given and the rest free. With `target`, the leaf and internal tags of
// those first words must match. Chart cells are (i, j, symbol, side), side 0
// for a left child (or the root) and 1 for a right child.
class TagChart {
 public:
  TagChart(const Pcfg& g, std::span<const std::string> fixed, std::size_t length,
           const TagSequence* target)
      : g_(g), fixed_(fixed), n_(length), s_(g.symbol_count()), target_(target) {}

  double run() {
    const std::size_t sides = target_ ? 2 : 1;
    top_.assign((n_ + 1) * (n_ + 1) * s_ * sides, 0.0);
    std::vector<std::optional<WordId>> ids;
    for (const std::string& w : fixed_) {
      ids.push_back(g_.find_word(w));
      if (!ids.back()) return 0.0;
    }
    if (target_) {
      for (std::size_t i = 0; i < fixed_.size(); ++i) {
        leaf_.push_back(resolve(g_, target_->leaf_tag(i)));
        if (i + 1 < n_) internal_.push_back(resolve(g_, target_->internal_tag(i)));
      }
    }
    std::vector<double> weight(s_);
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t p = 0; p < s_; ++p) {
        const auto pos = static_cast<SymbolId>(p);
        weight[p] = i < ids.size() ? g_.lexical(pos, *ids[i]) : g_.lexical_mass(pos);
      }
      fill_leaf(i, weight);
    }
    std::vector<double> bin(s_), acc(s_);
    for (std::size_t width = 2; width <= n_; ++width) {
      for (std::size_t i = 0; i + width <= n_; ++i) {
        const std::size_t j = i + width;
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t k = i + 1; k < j; ++k) {
          std::fill(bin.begin(), bin.end(), 0.0);
          for (const BinaryRule& r : g_.binary_rules()) {
            bin[r.lhs] += r.prob * cell(i, k, r.left, 0) * cell(k, j, r.right, 1);
          }
          if (target_ && k <= fixed_.size()) {
            const ResolvedTag& tag = internal_[k - 1];
            if (!tag.possible || tag.chain.empty()) continue;
            cell(i, j, tag.chain.front(), tag.left ? 0 : 1) +=
                tag.chain_prob * bin[tag.chain.back()];
          } else {
            for (std::size_t a = 0; a < s_; ++a) acc[a] += bin[a];
          }
        }
        add_closed(i, j, acc);
      }
    }
    return cell(0, n_, g_.start(), 0);
  }

 private:
  double& cell(std::size_t i, std::size_t j, std::size_t x, int side) {
    const std::size_t sides = target_ ? 2 : 1;
    const std::size_t sd = target_ ? static_cast<std::size_t>(side) : 0;
    return top_[((i * (n_ + 1) + j) * s_ + x) * sides + sd];
  }

  // Adds sum_A U*(X, A) core[A] to both sides of (i, j).
  void add_closed(std::size_t i, std::size_t j, const std::vector<double>& core) {
    for (std::size_t x = 0; x < s_; ++x) {
      double sum = 0.0;
      for (std::size_t a = 0; a < s_; ++a) {
        if (core[a] != 0.0) sum += g_.closure(static_cast<SymbolId>(x), static_cast<SymbolId>(a)) * core[a];
      }
      if (sum == 0.0) continue;
      cell(i, j, x, 0) += sum;
      if (target_) cell(i, j, x, 1) += sum;
    }
  }

  void fill_leaf(std::size_t i, const std::vector<double>& weight) {
    if (!target_ || i >= fixed_.size()) {
      add_closed(i, i + 1, weight);
      return;
    }
    const ResolvedTag& tag = leaf_[i];
    if (!tag.possible) return;
    const int side = tag.left ? 0 : 1;
    if (tag.chain.empty()) {
      for (std::size_t p = 0; p < s_; ++p) cell(i, i + 1, p, side) += weight[p];
      return;
    }
    const SymbolId last = tag.chain.back();
    double below = 0.0;
    for (std::size_t p = 0; p < s_; ++p) {
      if (weight[p] != 0.0) below += g_.unary(last, static_cast<SymbolId>(p)) * weight[p];
    }
    cell(i, i + 1, tag.chain.front(), side) += tag.chain_prob * below;
  }

  const Pcfg& g_;
  std::span<const std::string> fixed_;
  std::size_t n_;
  std::size_t s_;
  const TagSequence* target_;
  std::vector<ResolvedTag> leaf_;
  std::vector<ResolvedTag> internal_;
  std::vector<double> top_;
};

}  // namespace

double GrammarOracleTagger::log_conditional(std::span<const std::string> fixed,
                                            const TagSequence& target) const {
  const std::size_t n = target.word_count();
  const double joint = TagChart(*grammar_, fixed, n, &target).run();
  if (!(joint > 0.0)) return kLogZero;
  const double marginal = TagChart(*grammar_, fixed, n, nullptr).run();
  if (!(marginal > 0.0)) return kLogZero;
  return std::min(0.0, std::log(joint) - std::log(marginal));
}

double GrammarOracleTagger::log_likelihood(std::span<const std::string> words,
                                           const TagSequence& target) const {
  if (words.size() != target.word_count()) return kLogZero;
  return log_conditional(words, target);
}

double GrammarOracleTagger::log_score(std::span<const std::string> prefix,
                                      const TagSequence& target) const {
  if (prefix.size() > target.word_count()) return kLogZero;
  if (prefix.empty()) return 0.0;
  return log_conditional(prefix, target);
}

// ---------------------------------------------------------------------------
// Tag vocabulary and corpora

TagVocabulary::TagVocabulary(std::vector<std::string> items) : items_(std::move(items)) {
  if (std::find(items_.begin(), items_.end(), kDummyTag) == items_.end()) {
    items_.emplace_back(kDummyTag);
  }
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (!index_.emplace(items_[i], i).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate tag '" + items_[i] + "'");
    }
  }
  dummy_ = index_.at(std::string(kDummyTag));
}

std::optional<std::size_t> TagVocabulary::find(std::string_view tag) const {
  const auto it = index_.find(std::string(tag));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<TaggedSentence> read_tagged_corpus(std::istream& in) {
  std::vector<TaggedSentence> corpus;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json doc = json::parse(line);
      TaggedSentence s;
      s.words = doc.at("words").get<std::vector<std::string>>();
      auto tags = doc.at("tags").get<std::vector<std::string>>();
      if (!tags.empty() && tags.back() == kDummyTag) tags.pop_back();
      std::vector<Tetratag> parsed;
      for (const std::string& t : tags) parsed.push_back(Tetratag::parse(t));
      s.tags = TagSequence(std::move(parsed));
      if (s.words.empty() || s.tags.word_count() != s.words.size()) {
        throw Error(ErrorCode::kFormat, "tag count does not match word count", number);
      }
      corpus.push_back(std::move(s));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("tagged corpus: ") + e.what(), number);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kFormat && e.position() == number) throw;
      throw Error(ErrorCode::kFormat, e.what(), number);
    }
  }
  return corpus;
}

json tagged_sentence_json(const TaggedSentence& sentence) {
  json tags = json::array();
  for (const Tetratag& t : sentence.tags.tags()) tags.push_back(t.to_string());
  return {{"words", sentence.words}, {"tags", tags}};
}

// ---------------------------------------------------------------------------
// Feature tagger

namespace {

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> feature_strings(std::span<const std::string> words,
                                         std::size_t i, TaggerContext context) {
  const std::string& w = words[i];
  const std::string lw = lowercase(w);
  std::vector<std::string> f{"b", "w=" + w, "lw=" + lw};
  for (std::size_t k = 1; k <= 3 && k <= lw.size(); ++k) {
    f.push_back("s" + std::to_string(k) + "=" + lw.substr(lw.size() - k));
  }
  f.push_back("p=" + (i > 0 ? words[i - 1] : std::string("<s>")));
  if (context == TaggerContext::kFull) {
    f.push_back("n=" + (i + 1 < words.size() ? words[i + 1] : std::string("</s>")));
  }
  return f;
}

void softmax_in_place(std::vector<double>& scores) {
  const double hi = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double& s : scores) {
    s = std::exp(s - hi);
    total += s;
  }
  for (double& s : scores) s /= total;
}

}  // namespace

std::vector<std::size_t> FeatureTagger::active_features(std::span<const std::string> words,
                                                        std::size_t index) const {
  std::vector<std::size_t> out;
  for (const std::string& f : feature_strings(words, index, context_)) {
    if (const auto it = feature_index_.find(f); it != feature_index_.end()) {
      out.push_back(it->second);
    }
  }
  return out;
}

std::vector<double> FeatureTagger::head(const std::vector<double>& weights,
                                        const std::vector<std::size_t>& features) const {
  const std::size_t t = tags_.size();
  std::vector<double> scores(t, 0.0);
  for (std::size_t f : features) {
    const double* row = weights.data() + f * t;
    for (std::size_t k = 0; k < t; ++k) scores[k] += row[k];
  }
  softmax_in_place(scores);
  return scores;
}

FeatureTagger FeatureTagger::train(std::span<const TaggedSentence> corpus,
                                   FeatureTaggerOptions options) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "tagger needs training data");
  FeatureTagger model;
  model.context_ = options.context;

  std::set<std::string> tag_set;
  for (const TaggedSentence& s : corpus) {
    if (s.words.size() != s.tags.word_count() || s.words.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "tag sequence does not match its words");
    }
    for (const Tetratag& t : s.tags.tags()) tag_set.insert(t.to_string());
  }
  model.tags_ = TagVocabulary(std::vector<std::string>(tag_set.begin(), tag_set.end()));
  for (const TaggedSentence& s : corpus) {
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      for (std::string& f : feature_strings(s.words, i, options.context)) {
        if (model.feature_index_.emplace(f, model.feature_names_.size()).second) {
          model.feature_names_.push_back(std::move(f));
        }
      }
    }
  }
  const std::size_t t = model.tags_.size();
  model.odd_weights_.assign(model.feature_names_.size() * t, 0.0);
  model.even_weights_.assign(model.feature_names_.size() * t, 0.0);

  // Gold tag ids per sentence: leaf then internal slot of each word.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> gold(corpus.size());
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const TaggedSentence& s = corpus[c];
    for (std::size_t i = 0; i < s.words.size(); ++i) {
      const auto [leaf, internal] = slot_tags(s.tags, i);
      gold[c].emplace_back(*model.tags_.find(leaf), *model.tags_.find(internal));
    }
  }

  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(options.seed);
  const double lr = options.learning_rate;
  auto update = [&](std::vector<double>& weights, const std::vector<std::size_t>& features,
                    std::size_t gold_tag) {
    const std::vector<double> probs = model.head(weights, features);
    for (std::size_t f : features) {
      double* row = weights.data() + f * t;
      for (std::size_t k = 0; k < t; ++k) {
        const double grad = (k == gold_tag ? 1.0 : 0.0) - probs[k] - options.l2 * row[k];
        row[k] += lr * grad;
      }
    }
  };
  for (int epoch = 0; epoch < options.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), gen);
    for (std::size_t c : order) {
      const TaggedSentence& s = corpus[c];
      for (std::size_t i = 0; i < s.words.size(); ++i) {
        const std::span<const std::string> visible =
            options.context == TaggerContext::kPrefix
                ? std::span<const std::string>(s.words).first(i + 1)
                : std::span<const std::string>(s.words);
        const std::vector<std::size_t> features = model.active_features(visible, i);
        update(model.odd_weights_, features, gold[c][i].first);
        // The last internal slot is the dummy tag with probability 1.
        if (i + 1 < s.words.size()) update(model.even_weights_, features, gold[c][i].second);
      }
    }
  }
  return model;
}

TagDistributionPair FeatureTagger::distributions(std::span<const std::string> words,
                                                 std::size_t index) const {
  if (index >= words.size()) {
    throw Error(ErrorCode::kInvalidArgument, "word index out of range");
  }
  const std::vector<std::size_t> features = active_features(words, index);
  TagDistributionPair pair{head(odd_weights_, features), {}};
  if (context_ == TaggerContext::kFull && index + 1 == words.size()) {
    pair.even.assign(tags_.size(), 0.0);
    pair.even[tags_.dummy()] = 1.0;
  } else {
    pair.even = head(even_weights_, features);
  }
  return pair;
}

std::pair<double, double> FeatureTagger::slot_logprobs(std::span<const std::string> words,
                                                       std::size_t index,
                                                       std::string_view leaf_tag,
                                                       std::string_view internal_tag) const {
  TagDistributionPair pair = distributions(words, index);
  // A full-context tagger scoring a prefix: the boundary word is not the
  // sentence end, so its internal slot comes from the learned head.
  if (context_ == TaggerContext::kFull && index + 1 == words.size() &&
      internal_tag != kDummyTag) {
    pair.even = head(even_weights_, active_features(words, index));
  }
  const auto odd = tags_.find(leaf_tag);
  const auto even = tags_.find(internal_tag);
  return {odd ? safe_log(pair.odd[*odd]) : kLogZero,
          even ? safe_log(pair.even[*even]) : kLogZero};
}

json FeatureTagger::to_json() const {
  const std::size_t t = tags_.size();
  json features = json::object();
  for (std::size_t f = 0; f < feature_names_.size(); ++f) {
    features[feature_names_[f]] = {
        {"odd", std::vector<double>(odd_weights_.begin() + f * t,
                                    odd_weights_.begin() + (f + 1) * t)},
        {"even", std::vector<double>(even_weights_.begin() + f * t,
                                     even_weights_.begin() + (f + 1) * t)}};
  }
  return {{"format", "syntax-smc-tagger"},
          {"version", 1},
          {"context", context_ == TaggerContext::kFull ? "full" : "prefix"},
          {"tags", tags_.items()},
          {"features", features}};
}

FeatureTagger FeatureTagger::from_json(const json& doc) {
  try {
    if (doc.at("format") != "syntax-smc-tagger") {
      throw Error(ErrorCode::kFormat, "not a tagger file");
    }
    FeatureTagger model;
    const auto context = doc.at("context").get<std::string>();
    if (context != "full" && context != "prefix") {
      throw Error(ErrorCode::kFormat, "unknown tagger context '" + context + "'");
    }
    model.context_ = context == "full" ? TaggerContext::kFull : TaggerContext::kPrefix;
    model.tags_ = TagVocabulary(doc.at("tags").get<std::vector<std::string>>());
    const std::size_t t = model.tags_.size();
    // Keys come back sorted; any order is fine since rows travel with names.
    for (const auto& [name, rows] : doc.at("features").items()) {
      const auto odd = rows.at("odd").get<std::vector<double>>();
      const auto even = rows.at("even").get<std::vector<double>>();
      if (odd.size() != t || even.size() != t) {
        throw Error(ErrorCode::kFormat, "weight row size mismatch for '" + name + "'");
      }
      model.feature_index_.emplace(name, model.feature_names_.size());
      model.feature_names_.push_back(name);
      model.odd_weights_.insert(model.odd_weights_.end(), odd.begin(), odd.end());
      model.even_weights_.insert(model.even_weights_.end(), even.begin(), even.end());
    }
    return model;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("tagger: ") + e.what());
  }
}

}  // namespace syntax_smc
