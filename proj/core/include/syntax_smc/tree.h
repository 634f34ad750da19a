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

// Constituency trees, PTB bracketed I/O, binarization and templates.

#ifndef SYNTAX_SMC_TREE_H_
#define SYNTAX_SMC_TREE_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace syntax_smc {

// Label given to nodes introduced by binarization ("∅", UTF-8).
inline constexpr std::string_view kDummyLabel = "\xE2\x88\x85";
// Word placeholder used by templates.
inline constexpr std::string_view kPlaceholder = "?";
// Joins the labels of a collapsed unary chain.
inline constexpr char kChainSeparator = '+';

// A labeled ordered tree. A node without children is a leaf and its label
// is the word; every other node is a nonterminal. Immutable after
// construction apart from assignment.
class Tree {
 public:
  Tree() = default;
  explicit Tree(std::string label, std::vector<Tree> children = {})
      : label_(std::move(label)), children_(std::move(children)) {}

  static Tree leaf(std::string word) { return Tree(std::move(word)); }

  const std::string& label() const noexcept { return label_; }
  std::span<const Tree> children() const noexcept { return children_; }

  bool is_leaf() const noexcept { return children_.empty(); }
  // An internal node whose single child is a leaf.
  bool is_preterminal() const noexcept {
    return children_.size() == 1 && children_.front().is_leaf();
  }

  friend bool operator==(const Tree&, const Tree&) = default;

 private:
  std::string label_;
  std::vector<Tree> children_;
};

struct TreeStats {
  int height = 0;  // edges on the longest root-to-leaf path
  int leaf_count = 0;
  int size = 0;  // all nodes, leaves included

  friend bool operator==(const TreeStats&, const TreeStats&) = default;
};

// Parses one bracketed S-expression, e.g. "(S (NP (EX There)) ...)".
// Throws Error{kUnbalancedParens | kEmptyLabel | kEmptyTree | kInvalidTree}
// carrying the byte offset of the problem.
Tree parse_bracketed(std::string_view text);

// Parses a whitespace-separated sequence of bracketed trees (a treebank).
std::vector<Tree> parse_treebank(std::string_view text);

// Canonical rendering: "(label child ...)" with single spaces.
std::string serialize_bracketed(const Tree& tree);

// Right-branching binarization. Nodes added for parents with more than two
// children are labeled kDummyLabel; unary chains are collapsed into one
// node whose label joins the chain with '+'. A chain ending in a
// preterminal collapses into the preterminal, so the result has L fused
// leaves and L - 1 binary nodes. Throws Error{kInvalidLabel} for labels
// that would make the transform ambiguous.
Tree binarize(const Tree& tree);

// Inverse of binarize. Throws Error{kInvalidDummyPlacement} when a dummy
// node sits at the root or directly above a word.
Tree debinarize(const Tree& binary);

TreeStats tree_stats(const Tree& tree);

// Leaf words, left to right.
std::vector<std::string> leaf_words(const Tree& tree);

// Labels of the preterminals, left to right.
std::vector<std::string> pos_sequence(const Tree& tree);

// Replaces the words of `tree` left to right. Throws Error{kInvalidArgument}
// if the count differs from the number of leaves.
Tree with_words(const Tree& tree, std::span<const std::string> words);

// A tree whose every word is the placeholder "?".
class TreeTemplate {
 public:
  explicit TreeTemplate(const Tree& tree);

  static TreeTemplate parse(std::string_view text);

  const Tree& tree() const noexcept { return tree_; }
  std::size_t word_count() const noexcept { return word_count_; }
  std::vector<std::string> pos() const { return pos_sequence(tree_); }

  friend bool operator==(const TreeTemplate&, const TreeTemplate&) = default;

 private:
  Tree tree_;
  std::size_t word_count_ = 0;
};

TreeTemplate template_from_tree(const Tree& tree);

std::vector<std::string> split_chain(std::string_view label);

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_TREE_H_
