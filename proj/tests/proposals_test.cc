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
#include <algorithm>
#include <cmath>
#include <random>

#include "doctest.h"
#include "syntax_smc/error.h"
#include "syntax_smc/proposals.h"

using namespace syntax_smc;

namespace {

const std::vector<std::string> kWords = {"the", "a", "dog", "cat", "ran"};

std::vector<PosTaggedSentence> toy_corpus() {
  return {{{"the", "dog", "ran"}, {"DT", "NN", "VBD"}},
          {{"a", "cat", "ran"}, {"DT", "NN", "VBD"}},
          {{"the", "cat"}, {"DT", "NN"}}};
}

const TreeTemplate& toy_template() {
  static const TreeTemplate t =
      TreeTemplate::parse("(S (NP (DT ?) (NN ?)) (VP (VBD ?)))");
  return t;
}

double sum(const NextTokenDistribution& d) {
  double s = 0.0;
  for (double lp : d.logprobs()) s += std::exp(lp);
  return s;
}

}  // namespace

TEST_CASE("pos bigram counts") {
  const std::vector<PosTaggedSentence> one = {{{"the", "dog"}, {"DT", "NN"}}};
  const PosBigramModel m = PosBigramModel::train(one);
  const auto* row = m.row("DT", "NN");
  REQUIRE(row != nullptr);
  CHECK(row->at("the") == 1.0);
  CHECK(m.row("NN", kEndPos)->at("dog") == 1.0);
  // Unseen pair falls back to the POS row.
  CHECK(m.row("DT", "VB") == &m.backoff().at("DT"));
  CHECK(m.row("JJ", "NN") == nullptr);

  const PosBigramModel toy = PosBigramModel::train(toy_corpus());
  CHECK(toy.row("NN", "VBD")->at("dog") == doctest::Approx(0.5));
  CHECK(toy.row("NN", kEndPos)->at("cat") == 1.0);
  CHECK(toy.backoff().at("NN").at("cat") == doctest::Approx(2.0 / 3.0));
  for (const auto* table : {&toy.pairs(), &toy.backoff()}) {
    for (const auto& [key, r] : *table) {
      double s = 0.0;
      for (const auto& [w, p] : r) s += p;
      CHECK_MESSAGE(s == doctest::Approx(1.0).epsilon(1e-12), key);
    }
  }
  const PosBigramModel back = PosBigramModel::from_json(toy.to_json());
  CHECK(back.to_json() == toy.to_json());
  CHECK(toy.to_json().at("pairs").contains("DT|NN"));
  CHECK(PosBigramModel::train(toy_corpus()).to_json() == toy.to_json());

  CHECK_THROWS_AS(PosBigramModel::train(std::vector<PosTaggedSentence>{}), Error);
  const std::vector<PosTaggedSentence> ragged = {{{"a"}, {"DT", "NN"}}};
  CHECK_THROWS_AS(PosBigramModel::train(ragged), Error);

  const PosTaggedSentence s = pos_tagged(parse_bracketed("(S (NP (DT the) (NN dog)) (VB ran))"));
  CHECK(s.words == std::vector<std::string>{"the", "dog", "ran"});
  CHECK(s.pos == std::vector<std::string>{"DT", "NN", "VB"});
}

TEST_CASE("prior proposal is the lm conditional") {
  const auto lm = std::make_shared<TabularLM>(TabularLM::random(Vocabulary(kWords), 3, 4));
  const PriorProposal q(lm);
  std::mt19937_64 gen(1);
  for (int i = 0; i < 50; ++i) {
    std::vector<TokenId> prefix(gen() % 3);
    for (TokenId& t : prefix) t = static_cast<TokenId>(gen() % kWords.size());
    const auto a = q.propose(prefix);
    const auto b = lm->conditional(prefix);
    CHECK(std::ranges::equal(a.logprobs(), b.logprobs()));
    CHECK(q.logprob(prefix, 2) == b.logprob(2));
  }
}

TEST_CASE("bigram mixture matches the hand-normalized product") {
  const auto lm = std::make_shared<TabularLM>(TabularLM::random(Vocabulary(kWords), 4, 9));
  const std::vector<std::string> pos = {"DT", "NN", "VBD"};
  for (double eps : {0.0, 1e-6, 0.1}) {
    for (std::size_t top_k : {std::size_t{2}, std::size_t{50}}) {
      const auto bigram =
          std::make_shared<PosBigramModel>(PosBigramModel::train(toy_corpus(), eps));
      const BigramMixtureProposal q(lm, bigram, toy_template(), top_k);
      std::mt19937_64 gen(2);
      for (int trial = 0; trial < 30; ++trial) {
        std::vector<TokenId> prefix(gen() % 4);
        for (TokenId& t : prefix) t = static_cast<TokenId>(gen() % kWords.size());
        const auto d = q.propose(prefix);
        CHECK(sum(d) == doctest::Approx(1.0).epsilon(1e-9));
        const std::size_t n = prefix.size();
        if (n >= 3) {
          CHECK(d.prob(d.eos()) == 1.0);
          continue;
        }
        CHECK(d.prob(d.eos()) == 0.0);
        const auto prior = lm->conditional(prefix);
        const auto* row = bigram->row(pos[n], n + 1 < 3 ? pos[n + 1] : std::string(kEndPos));
        std::vector<double> main(kWords.size(), 0.0);
        double main_z = 0.0;
        for (std::size_t w = 0; w < kWords.size(); ++w) {
          const auto it = row->find(kWords[w]);
          if (it == row->end()) continue;
          main[w] = prior.prob(static_cast<TokenId>(w)) * it->second;
          main_z += main[w];
        }
        // Top-k non-EOS words of the prior, ties broken by id.
        std::vector<std::size_t> ids(kWords.size());
        for (std::size_t w = 0; w < ids.size(); ++w) ids[w] = w;
        std::stable_sort(ids.begin(), ids.end(), [&](std::size_t a, std::size_t b) {
          return prior.prob(static_cast<TokenId>(a)) > prior.prob(static_cast<TokenId>(b));
        });
        ids.resize(std::min(top_k, ids.size()));
        double floor_z = 0.0;
        for (std::size_t w : ids) floor_z += prior.prob(static_cast<TokenId>(w));
        for (std::size_t w = 0; w < kWords.size(); ++w) {
          double want = main_z > 0 ? (eps > 0 ? 1 - eps : 1.0) * main[w] / main_z : 0.0;
          if (eps > 0 && std::find(ids.begin(), ids.end(), w) != ids.end()) {
            want += (main_z > 0 ? eps : 1.0) * prior.prob(static_cast<TokenId>(w)) / floor_z;
          }
          CHECK(d.prob(static_cast<TokenId>(w)) == doctest::Approx(want).epsilon(1e-12));
        }
      }
    }
  }
}

TEST_CASE("bigram mixture edge cases") {
  const auto lm = std::make_shared<TabularLM>(TabularLM::random(Vocabulary(kWords), 4, 3));
  const std::vector<PosTaggedSentence> single = {{{"dog"}, {"NN"}}};
  const auto strict = std::make_shared<PosBigramModel>(PosBigramModel::train(single, 0.0));
  const TreeTemplate one = TreeTemplate::parse("(S (NN ?))");
  const BigramMixtureProposal q(lm, strict, one);
  const auto d = q.propose({});
  CHECK(d.prob(2) == doctest::Approx(1.0).epsilon(1e-15));
  const std::vector<TokenId> done = {2};
  CHECK(q.propose(done).prob(d.eos()) == 1.0);

  // Uniform prior: q follows the bigram alone.
  const auto uniform = std::make_shared<NgramLM>(NgramLM::train(
      std::vector<std::vector<std::string>>{{"the", "a", "dog", "cat", "ran"}}, {1, 0.0}));
  const std::vector<PosTaggedSentence> skewed = {
      {{"the", "dog"}, {"DT", "NN"}}, {{"the", "cat"}, {"DT", "NN"}}, {{"a", "dog"}, {"DT", "NN"}}};
  const auto b = std::make_shared<PosBigramModel>(PosBigramModel::train(skewed, 0.0));
  const TreeTemplate two = TreeTemplate::parse("(NP (DT ?) (NN ?))");
  const BigramMixtureProposal qu(uniform, b, two);
  const auto& v = uniform->vocabulary();
  const auto du = qu.propose({});
  CHECK(du.prob(v.id("the")) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(du.prob(v.id("a")) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // No bigram row and no floor.
  const TreeTemplate unseen = TreeTemplate::parse("(S (JJ ?))");
  const BigramMixtureProposal empty(lm, strict, unseen);
  try {
    empty.propose({});
    FAIL("accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kEmptyCandidateSet);
  }
  // The floor keeps every word reachable.
  const auto floored = std::make_shared<PosBigramModel>(PosBigramModel::train(single, 1e-6));
  const BigramMixtureProposal cont(lm, floored, unseen);
  const auto dc = cont.propose({});
  for (TokenId t = 0; t < dc.eos(); ++t) CHECK(dc.prob(t) > 0.0);
}
