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

// Probabilistic context-free grammars: text format, inside sums, Viterbi
// parsing and sampling.
//
// File format, one rule per line:
//
//   LHS -> RHS1 [RHS2] prob
//
// Blank lines and lines starting with '#' are ignored. The start symbol is
// the LHS of the first rule. A symbol that never appears on a left-hand side
// is a word. Binary rules rewrite to two nonterminals; unary rules rewrite
// to a nonterminal or a word, and nonterminal unaries must not form cycles.

#ifndef SYNTAX_SMC_PCFG_H_
#define SYNTAX_SMC_PCFG_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "syntax_smc/tree.h"

namespace syntax_smc {

using SymbolId = int;
using WordId = int;

struct BinaryRule {
  SymbolId lhs;
  SymbolId left;
  SymbolId right;
  double prob;
};

struct UnaryRule {
  SymbolId lhs;
  SymbolId child;
  double prob;
};

struct LexicalRule {
  SymbolId lhs;
  WordId word;
  double prob;
};

class Pcfg {
 public:
  // Throws Error{kGrammarFormat} with the 1-based line number as position.
  static Pcfg parse(std::string_view text);

  SymbolId start() const noexcept { return 0; }
  std::size_t symbol_count() const noexcept { return symbols_.size(); }
  const std::string& symbol(SymbolId id) const { return symbols_.at(id); }
  std::optional<SymbolId> find_symbol(std::string_view name) const;

  std::size_t word_count() const noexcept { return words_.size(); }
  const std::vector<std::string>& words() const noexcept { return words_; }
  std::optional<WordId> find_word(std::string_view word) const;

  const std::vector<BinaryRule>& binary_rules() const noexcept { return binary_; }
  const std::vector<UnaryRule>& unary_rules() const noexcept { return unary_; }
  const std::vector<LexicalRule>& lexical_rules() const noexcept { return lexical_; }

  // P(pos -> word); 0 when absent.
  double lexical(SymbolId pos, WordId word) const;
  // Sum over words of P(pos -> word).
  double lexical_mass(SymbolId pos) const { return lexical_mass_[pos]; }
  // Probability of the single unary rule lhs -> child; 0 when absent.
  double unary(SymbolId lhs, SymbolId child) const;

  // Sum over unary chains X ->* A, the empty chain included.
  double closure(SymbolId x, SymbolId a) const {
    return closure_[static_cast<std::size_t>(x) * symbols_.size() + a];
  }

  // P(words) under the grammar; 0 if some word is unknown.
  double inside(std::span<const std::string> words) const;

  // Most probable tree, or nullopt when the sentence has no parse.
  std::optional<Tree> viterbi(std::span<const std::string> words) const;

  // Top-down sample. Returns nullopt when the derivation grows deeper than
  // max_depth.
  std::optional<Tree> sample(std::mt19937_64& gen, int max_depth = 40) const;

  // Canonical text form, reparsable by parse().
  std::string to_string() const;

 private:
  struct Expansion {
    enum class Kind { kBinary, kUnary, kLexical } kind;
    std::size_t index;
    double prob;
  };

  void finalize();
  std::optional<Tree> sample_from(SymbolId symbol, std::mt19937_64& gen,
                                  int depth_left) const;

  std::vector<std::string> symbols_;
  std::unordered_map<std::string, SymbolId> symbol_index_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, WordId> word_index_;
  std::vector<BinaryRule> binary_;
  std::vector<UnaryRule> unary_;
  std::vector<LexicalRule> lexical_;

  std::vector<std::vector<Expansion>> expansions_;  // by lhs, file order
  std::unordered_map<std::int64_t, double> lexical_table_;
  std::vector<double> lexical_mass_;
  std::vector<double> closure_;
  // Best unary chain X ->* A: probability and the first hop (-1 = empty).
  std::vector<double> best_chain_;
  std::vector<SymbolId> best_hop_;
};

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_PCFG_H_
