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

#include "syntax_smc/metrics.h"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>

#include "syntax_smc/error.h"
#include "syntax_smc/tetratag.h"

namespace syntax_smc {

using nlohmann::json;

namespace {

std::size_t collect(const Tree& node, std::size_t start, std::vector<Bracket>& out) {
  if (node.is_leaf()) return start + 1;
  if (node.is_preterminal()) return start + 1;
  std::size_t end = start;
  for (const Tree& child : node.children()) end = collect(child, end, out);
  out.push_back({node.label(), start, end});
  return end;
}

// Same shape with every label replaced, words included.
Tree erase_labels(const Tree& node) {
  if (node.is_leaf()) return Tree::leaf(std::string(kPlaceholder));
  std::vector<Tree> kids;
  for (const Tree& child : node.children()) kids.push_back(erase_labels(child));
  return Tree("X", std::move(kids));
}

json log_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::vector<Bracket> brackets(const Tree& tree) {
  std::vector<Bracket> out;
  collect(tree, 0, out);
  std::sort(out.begin(), out.end());
  return out;
}

double bracket_f1(const Tree& predicted, const Tree& target) {
  const std::vector<Bracket> p = brackets(predicted);
  const std::vector<Bracket> g = brackets(target);
  if (p.empty() && g.empty()) {
    return tree_stats(predicted).leaf_count == tree_stats(target).leaf_count ? 100.0 : 0.0;
  }
  std::vector<Bracket> common;
  std::set_intersection(p.begin(), p.end(), g.begin(), g.end(), std::back_inserter(common));
  if (common.empty()) return 0.0;
  const double precision = static_cast<double>(common.size()) / static_cast<double>(p.size());
  const double recall = static_cast<double>(common.size()) / static_cast<double>(g.size());
  return 100.0 * 2.0 * precision * recall / (precision + recall);
}

MatchResult match_metrics(const Tree& predicted, const Tree& target) {
  MatchResult r;
  r.correct_length = tree_stats(predicted).leaf_count == tree_stats(target).leaf_count;
  if (!r.correct_length) return r;
  r.exact = template_from_tree(predicted) == template_from_tree(target);
  r.structure = erase_labels(predicted) == erase_labels(target);
  return r;
}

double log_potential_median(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kEmptyList, "median of an empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return sorted[(sorted.size() - 1) / 2];
}

double diversity(std::span<const std::vector<std::string>> sentences, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::kInvalidArgument, "n must be >= 1");
  std::set<std::vector<std::string>> grams;
  std::size_t total = 0;
  for (const auto& s : sentences) {
    total += s.size();
    for (std::size_t i = 0; i + n <= s.size(); ++i) {
      grams.emplace(s.begin() + static_cast<std::ptrdiff_t>(i),
                    s.begin() + static_cast<std::ptrdiff_t>(i + n));
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(grams.size()) / static_cast<double>(total);
}

json EvalReport::to_json() const {
  return {{"count", count},
          {"correct_length", correct_length},
          {"exact_match", exact_match},
          {"structure_match", structure_match},
          {"f1", f1},
          {"log_potential", log_json(log_potential)},
          {"log_prior", log_json(log_prior)},
          {"diversity_1", diversity[0]},
          {"diversity_2", diversity[1]},
          {"diversity_3", diversity[2]}};
}

std::vector<OutputScore> score_outputs(std::span<const std::vector<std::string>> outputs,
                                       const TreeTemplate& tmpl, const Parser& parser,
                                       const Potential& reference,
                                       const LanguageModel* lm) {
  const TagSequence target = encode(tmpl);
  std::vector<OutputScore> scores;
  for (const auto& words : outputs) {
    OutputScore s;
    s.words = words;
    s.parse = parser(words);
    if (s.parse) {
      s.f1 = bracket_f1(*s.parse, tmpl.tree());
      s.match = match_metrics(*s.parse, tmpl.tree());
    }
    s.match.correct_length = words.size() == tmpl.word_count();
    s.log_potential = reference.log_likelihood(words, target);
    if (lm) {
      try {
        s.log_prior = string_logprob(*lm, std::span<const std::string>(words));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kUnknownToken) throw;
        s.log_prior = kLogZero;
      }
    }
    scores.push_back(std::move(s));
  }
  return scores;
}

EvalReport aggregate(std::span<const OutputScore> scores) {
  EvalReport r;
  r.count = scores.size();
  if (scores.empty()) return r;
  std::vector<double> potentials;
  std::vector<std::vector<std::string>> sentences;
  double prior_sum = 0.0;
  for (const OutputScore& s : scores) {
    r.correct_length += s.match.correct_length ? 1.0 : 0.0;
    r.exact_match += s.match.exact ? 1.0 : 0.0;
    r.structure_match += s.match.structure ? 1.0 : 0.0;
    r.f1 += s.f1;
    potentials.push_back(s.log_potential);
    prior_sum += s.log_prior;
    sentences.push_back(s.words);
  }
  const double n = static_cast<double>(scores.size());
  r.correct_length *= 100.0 / n;
  r.exact_match *= 100.0 / n;
  r.structure_match *= 100.0 / n;
  r.f1 /= n;
  r.log_potential = log_potential_median(potentials);
  r.log_prior = prior_sum / n;
  for (std::size_t k = 0; k < 3; ++k) r.diversity[k] = diversity(sentences, k + 1);
  return r;
}

EvalReport evaluate_run(std::span<const std::vector<std::string>> outputs,
                        const TreeTemplate& tmpl, const Parser& parser,
                        const Potential& reference, const LanguageModel* lm) {
  const std::vector<OutputScore> scores = score_outputs(outputs, tmpl, parser, reference, lm);
  return aggregate(scores);
}

}  // namespace syntax_smc
