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

#include <benchmark/benchmark.h>

#include <fstream>
#include <random>
#include <sstream>

#include "syntax_smc/inference.h"
#include "syntax_smc/proposals.h"
#include "syntax_smc/taggers.h"
#include "syntax_smc/tetratag.h"

using namespace syntax_smc;

namespace {

std::shared_ptr<const Pcfg> english() {
  static const auto g = [] {
    std::ifstream in(std::string(SYNTAX_SMC_DATA) + "/english.pcfg");
    std::stringstream ss;
    ss << in.rdbuf();
    return std::make_shared<const Pcfg>(Pcfg::parse(ss.str()));
  }();
  return g;
}

Tree sample_tree(std::mt19937_64& gen, std::size_t lo, std::size_t hi) {
  for (;;) {
    const auto t = english()->sample(gen);
    if (!t) continue;
    const std::size_t n = leaf_words(*t).size();
    if (n >= lo && n <= hi) return *t;
  }
}

struct Fixture {
  std::vector<Tree> trees;
  std::shared_ptr<const NgramLM> lm;
  std::shared_ptr<const PosBigramModel> bigram;

  Fixture() {
    std::mt19937_64 gen(7);
    std::vector<std::vector<std::string>> sentences;
    std::vector<PosTaggedSentence> tagged;
    for (int i = 0; i < 2000; ++i) {
      trees.push_back(sample_tree(gen, 1, 25));
      sentences.push_back(leaf_words(trees.back()));
      tagged.push_back(pos_tagged(trees.back()));
    }
    lm = std::make_shared<NgramLM>(NgramLM::train(sentences, {2, 0.01}));
    bigram = std::make_shared<PosBigramModel>(PosBigramModel::train(tagged));
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_EncodeDecode(benchmark::State& state) {
  const auto& trees = fixture().trees;
  std::size_t i = 0;
  for (auto _ : state) {
    const Tree& t = trees[i++ % trees.size()];
    const TagSequence s = encode(t);
    benchmark::DoNotOptimize(decode(s.tags(), leaf_words(t), pos_sequence(t)));
  }
}
BENCHMARK(BM_EncodeDecode);

void BM_NgramConditional(benchmark::State& state) {
  const auto& f = fixture();
  std::vector<TokenId> prefix;
  for (const auto& w : leaf_words(f.trees[0])) prefix.push_back(f.lm->vocabulary().id(w));
  for (auto _ : state) benchmark::DoNotOptimize(f.lm->conditional(prefix));
}
BENCHMARK(BM_NgramConditional);

// Prefix shaping score at the middle of a sentence of the given length.
void BM_GrammarShaper(benchmark::State& state) {
  std::mt19937_64 gen(11);
  const auto n = static_cast<std::size_t>(state.range(0));
  const Tree t = sample_tree(gen, n, n);
  const TagSequence target = encode(t);
  const auto words = leaf_words(t);
  const std::span<const std::string> prefix(words.data(), n / 2);
  for (auto _ : state) {
    const GrammarOracleTagger oracle(english());  // fresh cache per call
    benchmark::DoNotOptimize(oracle.log_score(prefix, target));
  }
}
BENCHMARK(BM_GrammarShaper)->Arg(6)->Arg(12)->Arg(20);

void BM_SmcRun(benchmark::State& state) {
  const auto& f = fixture();
  const TreeTemplate tmpl = template_from_tree(f.trees[3]);
  const BigramMixtureProposal q(f.lm, f.bigram, tmpl);
  const GrammarOracleTagger oracle(english());
  RunConfig cfg;
  cfg.particles = static_cast<std::size_t>(state.range(0));
  cfg.tau = 0.25;
  for (auto _ : state) {
    benchmark::DoNotOptimize(smc(*f.lm, q, oracle, oracle, tmpl, cfg));
    ++cfg.seed;
  }
  state.SetLabel(std::to_string(tmpl.word_count()) + " words");
}
BENCHMARK(BM_SmcRun)->Arg(6)->Arg(20)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
