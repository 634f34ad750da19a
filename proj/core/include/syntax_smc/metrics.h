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

// Evaluation of generated sentences against their templates.
//
// Brackets follow the evalb convention: every non-preterminal internal node,
// the root included, gives a (label, start, end) bracket over half-open word
// spans; preterminals give none.

#ifndef SYNTAX_SMC_METRICS_H_
#define SYNTAX_SMC_METRICS_H_

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "syntax_smc/lm.h"
#include "syntax_smc/taggers.h"
#include "syntax_smc/tree.h"

namespace syntax_smc {

struct Bracket {
  std::string label;
  std::size_t start = 0;
  std::size_t end = 0;

  friend auto operator<=>(const Bracket&, const Bracket&) = default;
};

// Sorted multiset of brackets.
std::vector<Bracket> brackets(const Tree& tree);

// Labeled bracketing F1 in [0, 100]. Two trees without brackets score 100
// when their yields have the same length.
double bracket_f1(const Tree& predicted, const Tree& target);

struct MatchResult {
  bool exact = false;
  bool structure = false;
  bool correct_length = false;
};

// Words are ignored throughout: exact compares labels and shape, structure
// compares shape only.
MatchResult match_metrics(const Tree& predicted, const Tree& target);

// Log of the lower median of exp(values). Throws Error{kEmptyList}.
double log_potential_median(std::span<const double> values);

// Distinct n-grams across all sentences over the total length.
double diversity(std::span<const std::vector<std::string>> sentences, std::size_t n);

struct EvalReport {
  std::size_t count = 0;
  double correct_length = 0.0;   // percent
  double exact_match = 0.0;      // percent
  double structure_match = 0.0;  // percent
  double f1 = 0.0;               // mean, 0..100
  double log_potential = kLogZero;  // median
  double log_prior = kLogZero;      // mean
  double diversity[3] = {0.0, 0.0, 0.0};

  nlohmann::json to_json() const;
};

// Per-output values behind an EvalReport.
struct OutputScore {
  std::vector<std::string> words;
  std::optional<Tree> parse;
  double f1 = 0.0;
  MatchResult match;
  double log_potential = kLogZero;
  double log_prior = kLogZero;
};

using Parser = std::function<std::optional<Tree>(std::span<const std::string>)>;

// Scores each output: the parser supplies its tree (no parse scores F1 0 and
// no match), the reference potential its log psi against the template's
// tags, and the LM its log prior when given.
std::vector<OutputScore> score_outputs(std::span<const std::vector<std::string>> outputs,
                                       const TreeTemplate& tmpl, const Parser& parser,
                                       const Potential& reference,
                                       const LanguageModel* lm);

EvalReport aggregate(std::span<const OutputScore> scores);

EvalReport evaluate_run(std::span<const std::vector<std::string>> outputs,
                        const TreeTemplate& tmpl, const Parser& parser,
                        const Potential& reference, const LanguageModel* lm);

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_METRICS_H_
