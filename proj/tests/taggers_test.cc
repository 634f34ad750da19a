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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "doctest.h"
#include "syntax_smc/error.h"
#include "syntax_smc/taggers.h"
#include "test_util.h"

using namespace syntax_smc;
using syntax_smc::testing::all_parses;
using syntax_smc::testing::load_pcfg;

namespace {

using Words = std::vector<std::string>;

// PP attachment: high and low readings share every factor except the VP
// expansion, which is `high` against 1 - high.
std::shared_ptr<const Pcfg> attachment_grammar(double high) {
  std::ostringstream g;
  g << "S -> NP VP 1\n"
    << "VP -> VBAR PP " << high << "\n"
    << "VP -> V NPP " << 1 - high << "\n"
    << "VBAR -> V NP 1\n"
    << "NPP -> NP PP 1\n"
    << "NP -> N 1\n"
    << "PP -> P NP 1\n"
    << "N -> i 0.25\nN -> man 0.25\nN -> telescope 0.5\n"
    << "V -> saw 1\nP -> with 1\n";
  return std::make_shared<Pcfg>(Pcfg::parse(g.str()));
}

const char* kHigh =
    "(S (NP (N i)) (VP (VBAR (V saw) (NP (N man))) (PP (P with) (NP (N telescope)))))";
const char* kLow =
    "(S (NP (N i)) (VP (V saw) (NPP (NP (N man)) (PP (P with) (NP (N telescope))))))";

// Every string of `len` words over `vocab`.
std::vector<Words> all_strings(const Words& vocab, std::size_t len) {
  std::vector<Words> out = {{}};
  for (std::size_t k = 0; k < len; ++k) {
    std::vector<Words> next;
    for (const Words& p : out) {
      for (const std::string& w : vocab) {
        Words q = p;
        q.push_back(w);
        next.push_back(std::move(q));
      }
    }
    out = std::move(next);
  }
  return out;
}

bool tags_match(const TagSequence& tree_tags, const TagSequence& target, std::size_t n) {
  const std::size_t upto = std::min(2 * n, target.size());
  for (std::size_t k = 0; k < upto; ++k) {
    if (!(tree_tags[k] == target[k])) return false;
  }
  return true;
}

// P(first 2n tags | prefix, length L) by enumerating every completion and
// every derivation.
double brute_prefix_score(const Pcfg& g, const Words& vocab, const Words& prefix,
                          const TagSequence& target) {
  const std::size_t len = target.word_count();
  double num = 0.0, den = 0.0;
  for (const Words& suffix : all_strings(vocab, len - prefix.size())) {
    Words w = prefix;
    w.insert(w.end(), suffix.begin(), suffix.end());
    for (const auto& [tree, p] : all_parses(g, w)) {
      den += p;
      if (tags_match(encode(tree), target, prefix.size())) num += p;
    }
  }
  return den > 0 ? num / den : 0.0;
}

std::vector<TaggedSentence> sample_corpus(const Pcfg& g, std::size_t count,
                                          std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::vector<TaggedSentence> out;
  while (out.size() < count) {
    const auto t = g.sample(gen);
    if (!t || leaf_words(*t).size() > 12) continue;
    out.push_back({leaf_words(*t), encode(*t)});
  }
  return out;
}

}  // namespace

TEST_CASE("grammar oracle: unambiguous, ambiguous and weighted readings") {
  const auto fish = load_pcfg("toy.pcfg");
  const GrammarOracleTagger toy(fish);
  // "people fish" has exactly one parse.
  const Tree one = parse_bracketed("(S (NP (N people)) (VP (V fish)))");
  const Words pf = {"people", "fish"};
  CHECK(likelihood(toy, pf, encode(one)) == doctest::Approx(1.0).epsilon(1e-12));
  const Words wrong_len = {"people", "fish", "fish"};
  CHECK(toy.log_likelihood(wrong_len, encode(one)) == kLogZero);

  const GrammarOracleTagger even(attachment_grammar(0.5));
  const GrammarOracleTagger tilted(attachment_grammar(0.6));
  const Words w = {"i", "saw", "man", "with", "telescope"};
  const TagSequence high = encode(parse_bracketed(kHigh));
  const TagSequence low = encode(parse_bracketed(kLow));
  CHECK_FALSE(high == low);
  CHECK(likelihood(even, w, high) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(likelihood(even, w, low) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(likelihood(tilted, w, high) == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(likelihood(tilted, w, low) == doctest::Approx(0.4).epsilon(1e-12));
  // A tag sequence the grammar cannot produce.
  const TagSequence foreign = encode(parse_bracketed(
      "(S (NP (N i)) (XP (V saw) (NPP (NP (N man)) (PP (P with) (NP (N telescope))))))"));
  CHECK(likelihood(tilted, w, foreign) == 0.0);
}

TEST_CASE("grammar oracle shaper matches exhaustive enumeration") {
  const auto g = load_pcfg("toy.pcfg");
  const GrammarOracleTagger oracle(g);
  const Words vocab = {"fish", "people", "can"};
  std::mt19937_64 gen(3);
  std::map<std::size_t, std::set<std::string>> seen;
  std::vector<TagSequence> targets;
  for (int i = 0; i < 4000 && targets.size() < 40; ++i) {
    const auto t = g->sample(gen);
    if (!t) continue;
    const std::size_t n = leaf_words(*t).size();
    if (n > 4) continue;
    const TagSequence tags = encode(*t);
    if (seen[n].insert(render_tags(tags.tags())).second) targets.push_back(tags);
  }
  REQUIRE(targets.size() >= 10);
  for (const TagSequence& target : targets) {
    const std::size_t len = target.word_count();
    for (std::size_t n = 0; n <= len; ++n) {
      for (const Words& prefix : all_strings(vocab, n)) {
        const double got = shaping_prefix_score(oracle, prefix, target);
        const double want = n == 0 ? 1.0 : brute_prefix_score(*g, vocab, prefix, target);
        CHECK_MESSAGE(got == doctest::Approx(want).epsilon(1e-10),
                      render_tags(target.tags()) << " prefix of " << n);
      }
    }
    // Full length: shaper and potential agree.
    for (const Words& w : all_strings(vocab, len)) {
      CHECK(shaping_prefix_score(oracle, w, target) ==
            doctest::Approx(likelihood(oracle, w, target)).epsilon(1e-12));
    }
  }
}

TEST_CASE("grammar oracle shaper is admissible") {
  const auto g = load_pcfg("toy.pcfg");
  const GrammarOracleTagger oracle(g);
  const Words vocab = {"fish", "people", "can"};
  std::mt19937_64 gen(11);
  std::set<std::string> seen;
  int positive = 0;
  for (int i = 0; i < 3000; ++i) {
    const auto t = g->sample(gen);
    if (!t || leaf_words(*t).size() > 5) continue;
    const TagSequence target = encode(*t);
    if (!seen.insert(render_tags(target.tags())).second) continue;
    for (const Words& w : all_strings(vocab, target.word_count())) {
      if (oracle.log_likelihood(w, target) == kLogZero) continue;
      ++positive;
      for (std::size_t n = 0; n <= w.size(); ++n) {
        CHECK(oracle.log_score(std::span<const std::string>(w).first(n), target) > kLogZero);
      }
    }
  }
  CHECK(positive > 50);
}

TEST_CASE("tagged corpus reader") {
  std::istringstream in(
      "{\"words\": [\"a\", \"b\"], \"tags\": [\"l/NP\", \"L/S\", \"r\", \"DUMMY\"]}\n"
      "\n"
      "{\"words\": [\"c\"], \"tags\": [\"l/S\"]}\n");
  const auto corpus = read_tagged_corpus(in);
  REQUIRE(corpus.size() == 2);
  CHECK(corpus[0].tags.size() == 3);
  CHECK(corpus[1].words == Words{"c"});
  CHECK(tagged_sentence_json(corpus[1]).at("words") == nlohmann::json::array({"c"}));

  std::istringstream bad("{\"words\": [\"a\"], \"tags\": [\"l\"]}\n{\"words\": [\"a\"]}\n");
  try {
    read_tagged_corpus(bad);
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFormat);
    CHECK(e.position().value_or(0) == 2);
  }
  std::istringstream mismatch("{\"words\": [\"a\", \"b\"], \"tags\": [\"l\"]}\n");
  CHECK_THROWS_AS(read_tagged_corpus(mismatch), Error);
}

TEST_CASE("feature tagger fits its training data") {
  const TagSequence fig = encode(parse_bracketed(syntax_smc::testing::kFig1));
  const Words words = {"There", "is", "always", "a", "chance"};
  const std::vector<TaggedSentence> corpus = {{words, fig}};
  const auto tagger = std::make_shared<FeatureTagger>(FeatureTagger::train(corpus));
  const FactoredPotential potential(tagger);
  const double own = potential.log_likelihood(words, fig);
  CHECK(own > std::log(0.5));

  // Any single substituted tag scores lower.
  std::vector<Tetratag> tags(fig.tags().begin(), fig.tags().end());
  for (std::size_t k = 0; k < tags.size(); ++k) {
    for (const std::string& alt : tagger->tags().items()) {
      if (alt == kDummyTag || alt == tags[k].to_string()) continue;
      auto mutated = tags;
      const Tetratag t = Tetratag::parse(alt);
      if (t.is_leaf() != tags[k].is_leaf()) continue;
      mutated[k] = t;
      if (!is_valid_prefix(mutated)) continue;
      try {
        const TagSequence seq(mutated);
        CHECK(potential.log_likelihood(words, seq) < own);
      } catch (const Error&) {
      }
    }
  }
  CHECK_THROWS_AS(FeatureTagger::train(std::vector<TaggedSentence>{}), Error);
}

TEST_CASE("factored potential and shaper decompose slot by slot") {
  const auto g = load_pcfg("english.pcfg");
  const auto corpus = sample_corpus(*g, 200, 1);
  for (TaggerContext ctx : {TaggerContext::kFull, TaggerContext::kPrefix}) {
    FeatureTaggerOptions opt;
    opt.context = ctx;
    opt.epochs = 5;
    const auto tagger = std::make_shared<FeatureTagger>(FeatureTagger::train(corpus, opt));
    const FactoredPotential potential(tagger);
    const FactoredShaper shaper(tagger);
    const auto& vocab = tagger->tags();
    for (std::size_t s = 0; s < 20; ++s) {
      const auto& [words, target] = corpus[s];
      const std::size_t n = words.size();
      double full = 0.0;
      double running = 0.0;
      CHECK(shaper.log_score(std::span<const std::string>(words).first(0), target) == 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const std::span<const std::string> visible =
            ctx == TaggerContext::kFull ? std::span<const std::string>(words)
                                        : std::span<const std::string>(words).first(i + 1);
        const auto d = tagger->distributions(visible, i);
        double step = std::log(d.odd[*vocab.find(target.leaf_tag(i).to_string())]);
        if (i + 1 < n) step += std::log(d.even[*vocab.find(target.internal_tag(i).to_string())]);
        full += step;
        // Shaper increments telescope by the two new slot probabilities.
        const auto prefix = std::span<const std::string>(words).first(i + 1);
        const auto d_prefix = tagger->distributions(prefix, i);
        double inc = std::log(d_prefix.odd[*vocab.find(target.leaf_tag(i).to_string())]);
        if (i + 1 < n) {
          const std::string tag = target.internal_tag(i).to_string();
          inc += tagger->slot_logprobs(prefix, i, kDummyTag, tag).second;
          if (ctx == TaggerContext::kPrefix) {
            CHECK(std::log(d_prefix.even[*vocab.find(tag)]) ==
                  doctest::Approx(tagger->slot_logprobs(prefix, i, kDummyTag, tag).second));
          }
        }
        running += inc;
        CHECK(shaper.log_score(prefix, target) == doctest::Approx(running).epsilon(1e-12));
      }
      CHECK(potential.log_likelihood(words, target) == doctest::Approx(full).epsilon(1e-12));
      const Words longer = [&] {
        Words w = words;
        w.push_back("the");
        return w;
      }();
      CHECK(potential.log_likelihood(longer, target) == kLogZero);
      CHECK(shaper.log_score(longer, target) == kLogZero);
      if (ctx == TaggerContext::kPrefix) {
        CHECK(shaper.log_score(words, target) ==
              doctest::Approx(potential.log_likelihood(words, target)).epsilon(1e-12));
      }
    }
    for (const auto& d : {tagger->distributions(corpus[0].words, 0)}) {
      double odd = 0.0, even = 0.0;
      for (double p : d.odd) odd += p;
      for (double p : d.even) even += p;
      CHECK(odd == doctest::Approx(1.0));
      CHECK(even == doctest::Approx(1.0));
    }
  }
}

TEST_CASE("prefix-context tagger ignores future words") {
  const auto g = load_pcfg("english.pcfg");
  const auto corpus = sample_corpus(*g, 200, 2);
  FeatureTaggerOptions opt;
  opt.context = TaggerContext::kPrefix;
  opt.epochs = 5;
  const FeatureTagger tagger = FeatureTagger::train(corpus, opt);
  for (std::size_t s = 0; s < 30; ++s) {
    Words w = corpus[s].words;
    if (w.size() < 3) continue;
    const auto before = tagger.distributions(w, 0);
    for (std::size_t k = 1; k < w.size(); ++k) w[k] = "zzz";
    const auto after = tagger.distributions(w, 0);
    CHECK(before.odd == after.odd);
    CHECK(before.even == after.even);
  }
}

TEST_CASE("feature tagger generalizes and serializes") {
  const auto g = load_pcfg("english.pcfg");
  const auto train = sample_corpus(*g, 600, 5);
  const auto test = sample_corpus(*g, 200, 6);
  FeatureTaggerOptions opt;
  opt.epochs = 10;
  const FeatureTagger tagger = FeatureTagger::train(train, opt);

  std::size_t correct = 0, total = 0;
  for (const auto& [words, tags] : test) {
    for (std::size_t i = 0; i < words.size(); ++i) {
      const auto d = tagger.distributions(words, i);
      const auto best = std::max_element(d.odd.begin(), d.odd.end()) - d.odd.begin();
      correct += tagger.tags().item(static_cast<std::size_t>(best)) ==
                 tags.leaf_tag(i).to_string();
      ++total;
    }
  }
  const double accuracy = static_cast<double>(correct) / static_cast<double>(total);
  MESSAGE("held-out leaf tag accuracy " << accuracy);
  CHECK(accuracy > 1.0 / static_cast<double>(tagger.tags().size()));
  CHECK(accuracy > 0.5);

  const FeatureTagger back = FeatureTagger::from_json(tagger.to_json());
  CHECK(back.to_json() == tagger.to_json());
  CHECK(back.distributions(test[0].words, 0).odd == tagger.distributions(test[0].words, 0).odd);
  CHECK(FeatureTagger::train(train, opt).to_json() == tagger.to_json());
}
