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

#include "syntax_smc/tree.h"

#include <algorithm>
#include <cctype>

#include "syntax_smc/error.h"

namespace syntax_smc {
namespace {

bool is_space(char c) {
  return std::isspace(static_cast<unsigned char>(c)) != 0;
}

class BracketParser {
 public:
  explicit BracketParser(std::string_view text) : text_(text) {}

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::size_t offset() const noexcept { return pos_; }

  Tree parse_one() {
    skip_space();
    if (pos_ >= text_.size()) {
      throw Error(ErrorCode::kEmptyTree, "no tree in input", pos_);
    }
    if (text_[pos_] == ')') {
      throw Error(ErrorCode::kUnbalancedParens, "unexpected ')'", pos_);
    }
    if (text_[pos_] != '(') {
      throw Error(ErrorCode::kEmptyTree, "expected '(' to start a tree", pos_);
    }
    Tree tree = parse_node();
    validate(tree);
    return tree;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  std::string_view read_symbol() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_]) &&
           text_[pos_] != '(' && text_[pos_] != ')') {
      ++pos_;
    }
    return text_.substr(start, pos_ - start);
  }

  Tree parse_node() {
    const std::size_t open = pos_;
    ++pos_;  // '('
    skip_space();
    if (pos_ >= text_.size()) {
      throw Error(ErrorCode::kUnbalancedParens, "unclosed '('", open);
    }
    if (text_[pos_] == '(' || text_[pos_] == ')') {
      throw Error(ErrorCode::kEmptyLabel, "node without a label", pos_);
    }
    std::string label(read_symbol());
    std::vector<Tree> children;
    for (;;) {
      skip_space();
      if (pos_ >= text_.size()) {
        throw Error(ErrorCode::kUnbalancedParens, "unclosed '('", open);
      }
      const char c = text_[pos_];
      if (c == ')') {
        ++pos_;
        break;
      }
      if (c == '(') {
        children.push_back(parse_node());
      } else {
        children.push_back(Tree::leaf(std::string(read_symbol())));
      }
    }
    if (children.empty()) {
      throw Error(ErrorCode::kEmptyTree, "node '" + label + "' has no children",
                  open);
    }
    return Tree(std::move(label), std::move(children));
  }

  // Every leaf must hang from a preterminal.
  static void validate(const Tree& node) {
    if (node.is_leaf()) return;
    if (node.is_preterminal()) return;
    for (const Tree& child : node.children()) {
      if (child.is_leaf()) {
        throw Error(ErrorCode::kInvalidTree,
                    "word '" + child.label() + "' under non-preterminal '" +
                        node.label() + "'");
      }
      validate(child);
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

void serialize_into(const Tree& tree, std::string& out) {
  if (tree.is_leaf()) {
    out += tree.label();
    return;
  }
  out += '(';
  out += tree.label();
  for (const Tree& child : tree.children()) {
    out += ' ';
    serialize_into(child, out);
  }
  out += ')';
}

void check_binarizable(const Tree& tree) {
  if (tree.is_leaf()) return;
  const std::string& label = tree.label();
  if (label == kDummyLabel ||
      label.find(kChainSeparator) != std::string::npos) {
    throw Error(ErrorCode::kInvalidLabel,
                "label '" + label + "' clashes with binarization markers");
  }
  for (const Tree& child : tree.children()) check_binarizable(child);
}

Tree binarize_node(const Tree& node);

std::vector<Tree> fold_right(std::vector<Tree> kids) {
  while (kids.size() > 2) {
    Tree last(std::string(kDummyLabel),
              {std::move(kids[kids.size() - 2]), std::move(kids.back())});
    kids.pop_back();
    kids.back() = std::move(last);
  }
  return kids;
}

Tree binarize_node(const Tree& node) {
  if (node.is_preterminal()) return node;
  std::string label = node.label();
  const Tree* cur = &node;
  while (cur->children().size() == 1) {
    const Tree& child = cur->children().front();
    label += kChainSeparator;
    label += child.label();
    if (child.is_preterminal()) return Tree(std::move(label), {child.children()[0]});
    cur = &child;
  }
  std::vector<Tree> kids;
  kids.reserve(cur->children().size());
  for (const Tree& child : cur->children()) kids.push_back(binarize_node(child));
  return Tree(std::move(label), fold_right(std::move(kids)));
}

void debinarize_into(const Tree& node, std::vector<Tree>& out) {
  if (node.is_leaf()) {
    out.push_back(node);
    return;
  }
  if (node.label() == kDummyLabel) {
    if (node.is_preterminal()) {
      throw Error(ErrorCode::kInvalidDummyPlacement,
                  "dummy node directly above word '" +
                      node.children()[0].label() + "'");
    }
    for (const Tree& child : node.children()) debinarize_into(child, out);
    return;
  }
  std::vector<Tree> kids;
  for (const Tree& child : node.children()) debinarize_into(child, kids);
  const std::vector<std::string> chain = split_chain(node.label());
  Tree built(chain.back(), std::move(kids));
  for (auto it = chain.rbegin() + 1; it != chain.rend(); ++it) {
    built = Tree(*it, {std::move(built)});
  }
  out.push_back(std::move(built));
}

int stats_into(const Tree& tree, TreeStats& stats) {
  ++stats.size;
  if (tree.is_leaf()) {
    ++stats.leaf_count;
    return 0;
  }
  int deepest = 0;
  for (const Tree& child : tree.children()) {
    deepest = std::max(deepest, stats_into(child, stats));
  }
  return deepest + 1;
}

void collect_words(const Tree& tree, std::vector<std::string>& out) {
  if (tree.is_leaf()) {
    out.push_back(tree.label());
    return;
  }
  for (const Tree& child : tree.children()) collect_words(child, out);
}

void collect_pos(const Tree& tree, std::vector<std::string>& out) {
  if (tree.is_leaf()) return;
  if (tree.is_preterminal()) {
    out.push_back(tree.label());
    return;
  }
  for (const Tree& child : tree.children()) collect_pos(child, out);
}

Tree replace_words(const Tree& tree, std::span<const std::string> words,
                   std::size_t& next) {
  if (tree.is_leaf()) return Tree::leaf(words[next++]);
  std::vector<Tree> kids;
  kids.reserve(tree.children().size());
  for (const Tree& child : tree.children()) {
    kids.push_back(replace_words(child, words, next));
  }
  return Tree(tree.label(), std::move(kids));
}

}  // namespace

Tree parse_bracketed(std::string_view text) {
  BracketParser parser(text);
  Tree tree = parser.parse_one();
  if (!parser.at_end()) {
    throw Error(ErrorCode::kUnbalancedParens, "trailing input after tree",
                parser.offset());
  }
  return tree;
}

std::vector<Tree> parse_treebank(std::string_view text) {
  BracketParser parser(text);
  std::vector<Tree> trees;
  while (!parser.at_end()) trees.push_back(parser.parse_one());
  return trees;
}

std::string serialize_bracketed(const Tree& tree) {
  std::string out;
  serialize_into(tree, out);
  return out;
}

Tree binarize(const Tree& tree) {
  check_binarizable(tree);
  return binarize_node(tree);
}

Tree debinarize(const Tree& binary) {
  if (binary.label() == kDummyLabel) {
    throw Error(ErrorCode::kInvalidDummyPlacement, "dummy node at the root");
  }
  std::vector<Tree> out;
  debinarize_into(binary, out);
  return std::move(out.front());
}

TreeStats tree_stats(const Tree& tree) {
  TreeStats stats;
  stats.height = stats_into(tree, stats);
  return stats;
}

std::vector<std::string> leaf_words(const Tree& tree) {
  std::vector<std::string> out;
  collect_words(tree, out);
  return out;
}

std::vector<std::string> pos_sequence(const Tree& tree) {
  std::vector<std::string> out;
  collect_pos(tree, out);
  return out;
}

Tree with_words(const Tree& tree, std::span<const std::string> words) {
  if (static_cast<int>(words.size()) != tree_stats(tree).leaf_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "word count does not match the number of leaves");
  }
  std::size_t next = 0;
  return replace_words(tree, words, next);
}

TreeTemplate::TreeTemplate(const Tree& tree) {
  const std::size_t leaves = static_cast<std::size_t>(tree_stats(tree).leaf_count);
  const std::vector<std::string> marks(leaves, std::string(kPlaceholder));
  tree_ = with_words(tree, marks);
  word_count_ = leaves;
}

TreeTemplate TreeTemplate::parse(std::string_view text) {
  return TreeTemplate(parse_bracketed(text));
}

TreeTemplate template_from_tree(const Tree& tree) { return TreeTemplate(tree); }

std::vector<std::string> split_chain(std::string_view label) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const std::size_t end = label.find(kChainSeparator, start);
    std::string_view part = label.substr(start, end == label.npos ? label.npos : end - start);
    if (part.empty()) {
      throw Error(ErrorCode::kInvalidLabel,
                  "empty element in chain label '" + std::string(label) + "'");
    }
    parts.emplace_back(part);
    if (end == label.npos) break;
    start = end + 1;
  }
  return parts;
}

}  // namespace syntax_smc
