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

#include "syntax_smc/pcfg.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "syntax_smc/error.h"

namespace syntax_smc {
namespace {

struct RawRule {
  std::string lhs;
  std::vector<std::string> rhs;
  double prob;
  std::size_t line;
};

std::int64_t lex_key(SymbolId pos, WordId word) {
  return (static_cast<std::int64_t>(pos) << 32) | static_cast<std::uint32_t>(word);
}

[[noreturn]] void format_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kGrammarFormat, what, line);
}

double parse_prob(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    format_error(line, "bad probability '" + text + "'");
  }
  if (used != text.size() || !(value >= 0.0) || value > 1.0) {
    format_error(line, "bad probability '" + text + "'");
  }
  return value;
}

std::string format_prob(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", p);
  return buf;
}

// Chart index helper for spans over n words.
struct SpanIndex {
  std::size_t n;
  std::size_t symbols;
  std::size_t operator()(std::size_t i, std::size_t j, std::size_t a) const {
    return (i * (n + 1) + j) * symbols + a;
  }
  std::size_t size() const { return (n + 1) * (n + 1) * symbols; }
};

}  // namespace

Pcfg Pcfg::parse(std::string_view text) {
  std::vector<RawRule> raw;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream fields(line);
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(std::move(t));
    if (tokens.empty() || tokens.front().front() == '#') continue;
    if (tokens.size() < 4 || tokens.size() > 5 || tokens[1] != "->") {
      format_error(number, "expected 'LHS -> RHS1 [RHS2] prob'");
    }
    RawRule rule{tokens[0], {tokens.begin() + 2, tokens.end() - 1},
                 parse_prob(tokens.back(), number), number};
    raw.push_back(std::move(rule));
  }
  if (raw.empty()) throw Error(ErrorCode::kGrammarFormat, "grammar has no rules");

  Pcfg g;
  for (const RawRule& r : raw) {
    if (g.symbol_index_.emplace(r.lhs, static_cast<SymbolId>(g.symbols_.size())).second) {
      g.symbols_.push_back(r.lhs);
    }
  }
  std::vector<double> totals(g.symbols_.size(), 0.0);
  for (const RawRule& r : raw) {
    const SymbolId lhs = g.symbol_index_.at(r.lhs);
    totals[lhs] += r.prob;
    if (r.rhs.size() == 2) {
      const auto left = g.find_symbol(r.rhs[0]);
      const auto right = g.find_symbol(r.rhs[1]);
      if (!left || !right) {
        format_error(r.line, "binary rules must rewrite to nonterminals");
      }
      g.binary_.push_back({lhs, *left, *right, r.prob});
    } else if (const auto child = g.find_symbol(r.rhs[0])) {
      if (*child == lhs) format_error(r.line, "unary self-loop");
      g.unary_.push_back({lhs, *child, r.prob});
    } else {
      auto [it, added] =
          g.word_index_.emplace(r.rhs[0], static_cast<WordId>(g.words_.size()));
      if (added) g.words_.push_back(r.rhs[0]);
      g.lexical_.push_back({lhs, it->second, r.prob});
    }
  }
  for (std::size_t s = 0; s < totals.size(); ++s) {
    if (std::abs(totals[s] - 1.0) > 1e-6) {
      throw Error(ErrorCode::kGrammarFormat,
                  "rules for '" + g.symbols_[s] + "' sum to " + format_prob(totals[s]));
    }
  }
  g.finalize();
  return g;
}

void Pcfg::finalize() {
  const std::size_t s = symbols_.size();
  expansions_.assign(s, {});
  lexical_mass_.assign(s, 0.0);
  for (std::size_t i = 0; i < binary_.size(); ++i) {
    expansions_[binary_[i].lhs].push_back({Expansion::Kind::kBinary, i, binary_[i].prob});
  }
  for (std::size_t i = 0; i < unary_.size(); ++i) {
    expansions_[unary_[i].lhs].push_back({Expansion::Kind::kUnary, i, unary_[i].prob});
  }
  for (std::size_t i = 0; i < lexical_.size(); ++i) {
    const LexicalRule& r = lexical_[i];
    expansions_[r.lhs].push_back({Expansion::Kind::kLexical, i, r.prob});
    lexical_table_[lex_key(r.lhs, r.word)] += r.prob;
    lexical_mass_[r.lhs] += r.prob;
  }

  // Post-order over the unary graph; a grey node on the stack is a cycle.
  std::vector<int> mark(s, 0);
  std::vector<SymbolId> order;
  std::vector<std::vector<const UnaryRule*>> out(s);
  for (const UnaryRule& r : unary_) out[r.lhs].push_back(&r);
  auto visit = [&](auto&& self, SymbolId x) -> void {
    if (mark[x] == 2) return;
    if (mark[x] == 1) {
      throw Error(ErrorCode::kGrammarFormat,
                  "unary rules form a cycle through '" + symbols_[x] + "'");
    }
    mark[x] = 1;
    for (const UnaryRule* r : out[x]) self(self, r->child);
    mark[x] = 2;
    order.push_back(x);
  };
  for (SymbolId x = 0; x < static_cast<SymbolId>(s); ++x) visit(visit, x);

  closure_.assign(s * s, 0.0);
  best_chain_.assign(s * s, 0.0);
  best_hop_.assign(s * s, -1);
  for (SymbolId x : order) {
    closure_[x * s + x] = 1.0;
    best_chain_[x * s + x] = 1.0;
    for (const UnaryRule* r : out[x]) {
      for (std::size_t a = 0; a < s; ++a) {
        closure_[x * s + a] += r->prob * closure_[r->child * s + a];
        const double via = r->prob * best_chain_[r->child * s + a];
        if (via > best_chain_[x * s + a]) {
          best_chain_[x * s + a] = via;
          best_hop_[x * s + a] = r->child;
        }
      }
    }
  }
}

std::optional<SymbolId> Pcfg::find_symbol(std::string_view name) const {
  const auto it = symbol_index_.find(std::string(name));
  if (it == symbol_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<WordId> Pcfg::find_word(std::string_view word) const {
  const auto it = word_index_.find(std::string(word));
  if (it == word_index_.end()) return std::nullopt;
  return it->second;
}

double Pcfg::lexical(SymbolId pos, WordId word) const {
  const auto it = lexical_table_.find(lex_key(pos, word));
  return it == lexical_table_.end() ? 0.0 : it->second;
}

double Pcfg::unary(SymbolId lhs, SymbolId child) const {
  for (const UnaryRule& r : unary_) {
    if (r.lhs == lhs && r.child == child) return r.prob;
  }
  return 0.0;
}

double Pcfg::inside(std::span<const std::string> words) const {
  const std::size_t n = words.size();
  if (n == 0) return 0.0;
  const std::size_t s = symbols_.size();
  const SpanIndex at{n, s};
  std::vector<double> core(at.size(), 0.0), top(at.size(), 0.0);
  auto close = [&](std::size_t i, std::size_t j) {
    for (std::size_t x = 0; x < s; ++x) {
      double sum = 0.0;
      for (std::size_t a = 0; a < s; ++a) sum += closure_[x * s + a] * core[at(i, j, a)];
      top[at(i, j, x)] = sum;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = find_word(words[i]);
    if (!w) return 0.0;
    for (std::size_t p = 0; p < s; ++p) core[at(i, i + 1, p)] = lexical(static_cast<SymbolId>(p), *w);
    close(i, i + 1);
  }
  for (std::size_t width = 2; width <= n; ++width) {
    for (std::size_t i = 0; i + width <= n; ++i) {
      const std::size_t j = i + width;
      for (std::size_t k = i + 1; k < j; ++k) {
        for (const BinaryRule& r : binary_) {
          core[at(i, j, r.lhs)] += r.prob * top[at(i, k, r.left)] * top[at(k, j, r.right)];
        }
      }
      close(i, j);
    }
  }
  return top[at(0, n, start())];
}

std::optional<Tree> Pcfg::viterbi(std::span<const std::string> words) const {
  const std::size_t n = words.size();
  if (n == 0) return std::nullopt;
  const std::size_t s = symbols_.size();
  const SpanIndex at{n, s};
  std::vector<double> core(at.size(), 0.0), top(at.size(), 0.0);
  // core back-pointers: split and binary rule index; top: core symbol.
  std::vector<int> core_split(at.size(), -1), core_rule(at.size(), -1);
  std::vector<int> top_core(at.size(), -1);
  auto close = [&](std::size_t i, std::size_t j) {
    for (std::size_t x = 0; x < s; ++x) {
      double best = 0.0;
      int arg = -1;
      for (std::size_t a = 0; a < s; ++a) {
        const double v = best_chain_[x * s + a] * core[at(i, j, a)];
        if (v > best) {
          best = v;
          arg = static_cast<int>(a);
        }
      }
      top[at(i, j, x)] = best;
      top_core[at(i, j, x)] = arg;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const auto w = find_word(words[i]);
    if (!w) return std::nullopt;
    for (std::size_t p = 0; p < s; ++p) core[at(i, i + 1, p)] = lexical(static_cast<SymbolId>(p), *w);
    close(i, i + 1);
  }
  for (std::size_t width = 2; width <= n; ++width) {
    for (std::size_t i = 0; i + width <= n; ++i) {
      const std::size_t j = i + width;
      for (std::size_t k = i + 1; k < j; ++k) {
        for (std::size_t r = 0; r < binary_.size(); ++r) {
          const BinaryRule& rule = binary_[r];
          const double v = rule.prob * top[at(i, k, rule.left)] * top[at(k, j, rule.right)];
          const std::size_t cell = at(i, j, rule.lhs);
          if (v > core[cell]) {
            core[cell] = v;
            core_split[cell] = static_cast<int>(k);
            core_rule[cell] = static_cast<int>(r);
          }
        }
      }
      close(i, j);
    }
  }
  if (top[at(0, n, start())] <= 0.0) return std::nullopt;

  auto build_top = [&](auto&& self, std::size_t i, std::size_t j, SymbolId x) -> Tree {
    const SymbolId a = top_core[at(i, j, x)];
    // Unary chain from x down to a.
    std::vector<SymbolId> chain{x};
    while (chain.back() != a) chain.push_back(best_hop_[chain.back() * s + a]);
    Tree node;
    if (j - i == 1) {
      node = Tree(symbols_[a], {Tree::leaf(words[i])});
    } else {
      const std::size_t cell = at(i, j, a);
      const BinaryRule& rule = binary_[core_rule[cell]];
      const auto k = static_cast<std::size_t>(core_split[cell]);
      node = Tree(symbols_[a], {self(self, i, k, rule.left), self(self, k, j, rule.right)});
    }
    for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
      node = Tree(symbols_[*it], {std::move(node)});
    }
    return node;
  };
  return build_top(build_top, 0, n, start());
}

std::optional<Tree> Pcfg::sample_from(SymbolId symbol, std::mt19937_64& gen,
                                      int depth_left) const {
  if (depth_left <= 0) return std::nullopt;
  const auto& options = expansions_[symbol];
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
  const Expansion* pick = &options.back();
  for (const Expansion& e : options) {
    if (u < e.prob) {
      pick = &e;
      break;
    }
    u -= e.prob;
  }
  switch (pick->kind) {
    case Expansion::Kind::kLexical:
      return Tree(symbols_[symbol], {Tree::leaf(words_[lexical_[pick->index].word])});
    case Expansion::Kind::kUnary: {
      auto child = sample_from(unary_[pick->index].child, gen, depth_left - 1);
      if (!child) return std::nullopt;
      return Tree(symbols_[symbol], {std::move(*child)});
    }
    case Expansion::Kind::kBinary: {
      const BinaryRule& r = binary_[pick->index];
      auto left = sample_from(r.left, gen, depth_left - 1);
      if (!left) return std::nullopt;
      auto right = sample_from(r.right, gen, depth_left - 1);
      if (!right) return std::nullopt;
      return Tree(symbols_[symbol], {std::move(*left), std::move(*right)});
    }
  }
  return std::nullopt;
}

std::optional<Tree> Pcfg::sample(std::mt19937_64& gen, int max_depth) const {
  return sample_from(start(), gen, max_depth);
}

std::string Pcfg::to_string() const {
  std::string out;
  for (std::size_t x = 0; x < symbols_.size(); ++x) {
    for (const Expansion& e : expansions_[x]) {
      out += symbols_[x] + " ->";
      switch (e.kind) {
        case Expansion::Kind::kBinary:
          out += ' ' + symbols_[binary_[e.index].left] + ' ' + symbols_[binary_[e.index].right];
          break;
        case Expansion::Kind::kUnary:
          out += ' ' + symbols_[unary_[e.index].child];
          break;
        case Expansion::Kind::kLexical:
          out += ' ' + words_[lexical_[e.index].word];
          break;
      }
      out += ' ' + format_prob(e.prob) + '\n';
    }
  }
  return out;
}

}  // namespace syntax_smc
