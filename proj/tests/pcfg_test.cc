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

#include "doctest.h"
#include "syntax_smc/error.h"
#include "syntax_smc/pcfg.h"
#include "test_util.h"

using namespace syntax_smc;
using syntax_smc::testing::all_parses;
using syntax_smc::testing::load_pcfg;

namespace {

int grammar_error_line(std::string_view text) {
  try {
    Pcfg::parse(text);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGrammarFormat);
    return static_cast<int>(e.position().value_or(0));
  }
  return -1;
}

}  // namespace

TEST_CASE("toy grammar structure") {
  const auto g = load_pcfg("toy.pcfg");
  CHECK(g->symbol(g->start()) == "S");
  CHECK(g->word_count() == 3);
  CHECK(g->binary_rules().size() == 4);
  CHECK(g->unary_rules().size() == 2);
  CHECK(g->lexical_rules().size() == 6);
  const SymbolId n = *g->find_symbol("N");
  CHECK(g->lexical(n, *g->find_word("fish")) == doctest::Approx(0.4));
  CHECK(g->lexical_mass(n) == doctest::Approx(1.0));
  const SymbolId vp = *g->find_symbol("VP");
  const SymbolId v = *g->find_symbol("V");
  CHECK(g->unary(vp, v) == doctest::Approx(0.3));
  CHECK(g->closure(vp, v) == doctest::Approx(0.3));
  CHECK(g->closure(vp, vp) == doctest::Approx(1.0));
}

TEST_CASE("inside and viterbi agree with naive enumeration") {
  const auto g = load_pcfg("toy.pcfg");
  const std::vector<std::string> vocab = {"fish", "people", "can"};
  for (std::size_t len = 1; len <= 4; ++len) {
    std::vector<std::size_t> idx(len, 0);
    for (;;) {
      std::vector<std::string> w;
      for (std::size_t k : idx) w.push_back(vocab[k]);
      const auto parses = all_parses(*g, w);
      double sum = 0.0, best = 0.0;
      for (const auto& [t, p] : parses) {
        sum += p;
        best = std::max(best, p);
      }
      CHECK(g->inside(w) == doctest::Approx(sum).epsilon(1e-12));
      const auto v = g->viterbi(w);
      CHECK(v.has_value() == !parses.empty());
      if (v) {
        double vp = 0.0;
        for (const auto& [t, p] : parses) {
          if (t == *v) vp = std::max(vp, p);
        }
        CHECK(vp == doctest::Approx(best).epsilon(1e-12));
        CHECK(leaf_words(*v) == w);
      }
      std::size_t k = 0;
      while (k < len && ++idx[k] == vocab.size()) idx[k++] = 0;
      if (k == len) break;
    }
  }
  CHECK(g->inside(std::vector<std::string>{"fish", "unknown"}) == 0.0);
}

TEST_CASE("sampling yields parseable trees with the right frequencies") {
  const auto g = load_pcfg("toy.pcfg");
  std::mt19937_64 gen(5);
  std::map<std::string, int> counts;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto t = g->sample(gen);
    REQUIRE(t.has_value());
    const auto w = leaf_words(*t);
    CHECK(g->inside(w) > 0.0);
    ++counts[serialize_bracketed(*t)];
  }
  // P(S -> NP VP, NP -> N, N -> fish, VP -> V, V -> fish) = .7 * .4 * .3 * .5
  const double p = 0.7 * 0.4 * 0.3 * 0.5;
  const double f = counts["(S (NP (N fish)) (VP (V fish)))"] / static_cast<double>(n);
  CHECK(std::abs(f - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("text round trip") {
  const auto g = load_pcfg("english.pcfg");
  const Pcfg back = Pcfg::parse(g->to_string());
  CHECK(back.to_string() == g->to_string());
  const std::vector<std::string> w = {"the", "dog", "saw", "a", "cat"};
  CHECK(back.inside(w) == doctest::Approx(g->inside(w)).epsilon(1e-12));
  CHECK(g->word_count() <= 200);
}

TEST_CASE("format errors") {
  CHECK(grammar_error_line("S -> A 0.5\nA -> a 1.0\n") != -1);  // mass 0.5
  CHECK(grammar_error_line("S -> A B 1.0\nA -> a 1\nB -> b x\n") == 3);
  CHECK(grammar_error_line("S A 1.0\n") == 1);
  CHECK(grammar_error_line("# comment\nS -> a b 1.0\n") == 2);
  CHECK(grammar_error_line("S -> A 1.0\nA -> S 0.5\nA -> a 0.5\n") != -1);  // unary cycle
  CHECK(grammar_error_line("") >= 0);
  CHECK(grammar_error_line("S -> A 1.0\nA -> a 1.0\n") == -1);
}
