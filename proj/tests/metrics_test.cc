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
#include <tuple>

#include "doctest.h"
#include "syntax_smc/error.h"
#include "syntax_smc/metrics.h"
#include "test_util.h"

using namespace syntax_smc;
using syntax_smc::testing::kFig1;
using syntax_smc::testing::RandomTrees;

namespace {

using Words = std::vector<std::string>;
using Key = std::tuple<std::string, int, int>;

// Labeled spans of non-preterminal nodes, counted as a multiset.
int spans(const Tree& t, int start, std::map<Key, int>& out) {
  if (t.is_leaf()) return 1;
  if (t.children().size() == 1 && t.children()[0].is_leaf()) return 1;
  int width = 0;
  for (const Tree& c : t.children()) width += spans(c, start + width, out);
  ++out[{t.label(), start, start + width}];
  return width;
}

double reference_f1(const Tree& pred, const Tree& gold) {
  std::map<Key, int> p, g;
  const int lp = spans(pred, 0, p);
  const int lg = spans(gold, 0, g);
  int np = 0, ng = 0, common = 0;
  for (const auto& [k, c] : p) np += c;
  for (const auto& [k, c] : g) ng += c;
  if (np == 0 && ng == 0) return lp == lg ? 100.0 : 0.0;
  for (const auto& [k, c] : p) {
    const auto it = g.find(k);
    if (it != g.end()) common += std::min(c, it->second);
  }
  if (common == 0) return 0.0;
  const double prec = static_cast<double>(common) / np;
  const double rec = static_cast<double>(common) / ng;
  return 200.0 * prec * rec / (prec + rec);
}

class TablePotential final : public Potential {
 public:
  explicit TablePotential(std::map<Words, double> table) : table_(std::move(table)) {}
  double log_likelihood(std::span<const std::string> words,
                        const TagSequence&) const override {
    const auto it = table_.find(Words(words.begin(), words.end()));
    return it == table_.end() ? kLogZero : std::log(it->second);
  }

 private:
  std::map<Words, double> table_;
};

}  // namespace

TEST_CASE("brackets follow the evalb convention") {
  const auto b = brackets(parse_bracketed(kFig1));
  const std::vector<Bracket> want = {
      {"ADVP", 2, 3}, {"NP", 0, 1}, {"NP", 3, 5}, {"S", 0, 5}, {"VP", 1, 5}};
  CHECK(b == want);
}

TEST_CASE("bracketing f1") {
  const Tree gold = parse_bracketed(kFig1);
  CHECK(bracket_f1(gold, gold) == 100.0);
  // One relabeled bracket out of five.
  const Tree one_off = parse_bracketed(
      "(S (NP (EX There)) (VP (VBZ is) (PP (RB always)) (NP (DT a) (NN chance))))");
  CHECK(bracket_f1(one_off, gold) == doctest::Approx(80.0));
  const Tree disjoint = parse_bracketed("(X (Y (A a) (B b)) (C c))");
  const Tree other = parse_bracketed("(Z (A a) (W (B b) (C c)))");
  CHECK(bracket_f1(disjoint, other) == 0.0);
  CHECK(bracket_f1(parse_bracketed("(NN a)"), parse_bracketed("(VB b)")) == 100.0);
}

TEST_CASE("f1 and matches agree with a brute-force comparator on random pairs") {
  RandomTrees rt(314);
  for (int i = 0; i < 500; ++i) {
    const int n = rt.uniform(1, 10);
    const Tree a = rt.make(n);
    const Tree b = rt.uniform(0, 3) == 0 ? a : rt.make(rt.uniform(0, 1) ? n : rt.uniform(1, 10));
    CHECK(bracket_f1(a, b) == doctest::Approx(reference_f1(a, b)).epsilon(1e-12));
    CHECK(bracket_f1(a, b) == doctest::Approx(bracket_f1(b, a)).epsilon(1e-12));
    const MatchResult m = match_metrics(a, b);
    if (m.exact) {
      CHECK(m.structure);
      CHECK(bracket_f1(a, b) == 100.0);
    }
    if (m.structure) CHECK(m.correct_length);
  }
}

TEST_CASE("match metrics") {
  const Tree gold = parse_bracketed(kFig1);
  const MatchResult same = match_metrics(gold, gold);
  CHECK((same.exact && same.structure && same.correct_length));
  // Words do not matter.
  CHECK(match_metrics(template_from_tree(gold).tree(), gold).exact);
  const MatchResult relabeled = match_metrics(
      parse_bracketed(
          "(S (NP (EX There)) (VP (VBZ is) (PP (RB always)) (NP (DT a) (NN chance))))"),
      gold);
  CHECK_FALSE(relabeled.exact);
  CHECK(relabeled.structure);
  const MatchResult longer =
      match_metrics(parse_bracketed("(S (NP (NN a)) (VP (VB b) (NN c)))"), gold);
  CHECK_FALSE((longer.exact || longer.structure || longer.correct_length));
}

TEST_CASE("median and diversity") {
  const std::vector<double> v = {std::log(0.5), kLogZero, std::log(0.9)};
  CHECK(log_potential_median(v) == doctest::Approx(std::log(0.5)));
  const std::vector<double> even = {std::log(0.1), std::log(0.2), std::log(0.3), std::log(0.4)};
  CHECK(log_potential_median(even) == doctest::Approx(std::log(0.2)));
  const std::vector<double> same = {-2.0, -2.0};
  CHECK(log_potential_median(same) == -2.0);
  const std::vector<double> dead = {kLogZero, kLogZero, 0.0};
  CHECK(log_potential_median(dead) == kLogZero);
  CHECK_THROWS_AS(log_potential_median(std::vector<double>{}), Error);

  const std::vector<Words> ab = {{"a", "b"}, {"a", "b"}};
  CHECK(diversity(ab, 1) == doctest::Approx(0.5));
  const std::vector<Words> unique = {{"a", "b"}, {"c"}};
  CHECK(diversity(unique, 1) == 1.0);
  const std::vector<Words> abc = {{"a", "b", "c"}};
  CHECK(diversity(abc, 2) == doctest::Approx(2.0 / 3.0));
  const std::vector<Words> swapped = {{"c"}, {"a", "b"}};
  CHECK(diversity(swapped, 1) == diversity(unique, 1));
}

TEST_CASE("hand-computed three-sentence report") {
  const TreeTemplate tmpl = TreeTemplate::parse("(S (NP (NN ?)) (VP (VBD ?)))");
  const std::map<Words, std::string> parses = {
      {{"dogs", "ran"}, "(S (NP (NN dogs)) (VP (VBD ran)))"},
      {{"cats", "sat"}, "(S (VP (NN cats)) (NP (VBD sat)))"},
      {{"dogs", "ran", "far"}, "(S (NP (NN dogs)) (VP (VBD ran) (ADVP (RB far))))"}};
  const Parser parser = [&](std::span<const std::string> w) -> std::optional<Tree> {
    return parse_bracketed(parses.at(Words(w.begin(), w.end())));
  };
  const TablePotential psi({{{"dogs", "ran"}, 0.5}, {{"cats", "sat"}, 0.9}});
  const NgramLM lm = NgramLM::train(
      std::vector<Words>{{"dogs", "ran"}, {"cats", "sat"}, {"dogs", "ran", "far"}}, {1, 0.0});
  const std::vector<Words> outputs = {{"dogs", "ran"}, {"cats", "sat"}, {"dogs", "ran", "far"}};
  const EvalReport r = evaluate_run(outputs, tmpl, parser, psi, &lm);

  CHECK(r.count == 3);
  CHECK(r.correct_length == doctest::Approx(200.0 / 3));
  CHECK(r.exact_match == doctest::Approx(100.0 / 3));
  CHECK(r.structure_match == doctest::Approx(200.0 / 3));
  // F1: 100, 1/3 of the brackets, and P = 1/4, R = 1/3.
  CHECK(r.f1 == doctest::Approx((100.0 + 100.0 / 3 + 200.0 / 7) / 3));
  CHECK(r.log_potential == doctest::Approx(std::log(0.5)));
  // Unigram with EOS: dogs .2, ran .2, cats .1, sat .1, far .1, EOS .3.
  const double prior = (std::log(0.2 * 0.2 * 0.3) + std::log(0.1 * 0.1 * 0.3) +
                        std::log(0.2 * 0.2 * 0.1 * 0.3)) / 3;
  CHECK(r.log_prior == doctest::Approx(prior));
  CHECK(r.diversity[0] == doctest::Approx(5.0 / 7));
  CHECK(r.diversity[1] == doctest::Approx(3.0 / 7));
  CHECK(r.diversity[2] == doctest::Approx(1.0 / 7));

  const auto j = r.to_json();
  CHECK(j.at("f1").get<double>() == doctest::Approx(r.f1));
  CHECK(j.contains("diversity_1"));
  CHECK(j.contains("log_potential"));

  // Perfect outputs.
  const std::vector<Words> gold = {{"dogs", "ran"}, {"dogs", "ran"}};
  const EvalReport perfect = evaluate_run(gold, tmpl, parser, psi, nullptr);
  CHECK(perfect.exact_match == 100.0);
  CHECK(perfect.f1 == 100.0);
}
