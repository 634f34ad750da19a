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

#include "syntax_smc/tetratag.h"

#include <cctype>
#include <optional>

#include "syntax_smc/error.h"

namespace syntax_smc {
namespace {

void emit_in_order(const Tree& node, bool is_left, std::vector<Tetratag>& out) {
  if (node.is_preterminal()) {
    std::string chain;
    const std::string& label = node.label();
    if (const std::size_t cut = label.rfind(kChainSeparator);
        cut != std::string::npos) {
      chain = label.substr(0, cut);
    }
    out.push_back({is_left ? TagKind::kLeftLeaf : TagKind::kRightLeaf,
                   std::move(chain)});
    return;
  }
  // Binary node: left subtree, self, right subtree.
  emit_in_order(node.children()[0], true, out);
  out.push_back({is_left ? TagKind::kLeftInternal : TagKind::kRightInternal,
                 node.label() == kDummyLabel ? std::string() : node.label()});
  emit_in_order(node.children()[1], false, out);
}

// Left-to-right stack machine over tags. Stack entries are either complete
// subtrees, incomplete binary nodes waiting for a right child, or nodes whose
// right child is linked but still open (waiting).
class TagMachine {
 public:
  struct Node {
    std::string label;
    int left = -1;
    int right = -1;
    int parent = -1;
    int word = -1;
    std::size_t tag_index = 0;
  };

  void push(const Tetratag& tag, std::size_t index) {
    const bool leaf_slot = index % 2 == 0;
    if (tag.is_leaf() != leaf_slot) {
      fail(index, leaf_slot ? "expected a leaf tag (l/r)"
                            : "expected an internal tag (L/R)");
    }
    switch (tag.kind) {
      case TagKind::kLeftLeaf: {
        if (!stack_.empty() && stack_.back().state == State::kComplete) {
          fail(index, "leaf tag 'l' after a complete subtree");
        }
        stack_.push_back({new_leaf(tag, index), State::kComplete});
        break;
      }
      case TagKind::kRightLeaf: {
        if (stack_.empty() || stack_.back().state != State::kIncomplete) {
          fail(index, "tag 'r' without an open node");
        }
        const int leaf = new_leaf(tag, index);
        const int open = stack_.back().node;
        nodes_[open].right = leaf;
        nodes_[leaf].parent = open;
        complete_top();
        break;
      }
      case TagKind::kLeftInternal: {
        if (stack_.empty() || stack_.back().state != State::kComplete) {
          fail(index, "tag 'L' without a complete left subtree");
        }
        const int left = stack_.back().node;
        stack_.pop_back();
        stack_.push_back({new_internal(tag, index, left), State::kIncomplete});
        break;
      }
      case TagKind::kRightInternal: {
        if (stack_.size() < 2 || stack_.back().state != State::kComplete ||
            stack_[stack_.size() - 2].state != State::kIncomplete) {
          fail(index, "tag 'R' without an open node to attach to");
        }
        const int left = stack_.back().node;
        stack_.pop_back();
        const int node = new_internal(tag, index, left);
        const int open = stack_.back().node;
        nodes_[open].right = node;
        nodes_[node].parent = open;
        stack_.back().state = State::kWaiting;
        stack_.push_back({node, State::kIncomplete});
        break;
      }
    }
  }

  // Index of the root node; throws if items remain on the stack.
  int finish(std::size_t length) const {
    if (stack_.size() != 1 || stack_.back().state != State::kComplete) {
      fail(length, "sequence ends with " + std::to_string(stack_.size()) +
                       " unfinished stack items");
    }
    return stack_.back().node;
  }

  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  enum class State { kComplete, kIncomplete, kWaiting };
  struct Entry {
    int node;
    State state;
  };

  [[noreturn]] static void fail(std::size_t index, const std::string& what) {
    throw Error(ErrorCode::kMalformedSequence, what, index);
  }

  int new_leaf(const Tetratag& tag, std::size_t index) {
    nodes_.push_back({tag.label, -1, -1, -1, words_++, index});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int new_internal(const Tetratag& tag, std::size_t index, int left) {
    nodes_.push_back({tag.label, left, -1, -1, -1, index});
    const int id = static_cast<int>(nodes_.size()) - 1;
    nodes_[left].parent = id;
    return id;
  }

  // The top node just received its right child; close every linked ancestor.
  void complete_top() {
    int node = stack_.back().node;
    stack_.pop_back();
    while (!stack_.empty() && stack_.back().state == State::kWaiting &&
           nodes_[node].parent == stack_.back().node) {
      node = stack_.back().node;
      stack_.pop_back();
    }
    stack_.push_back({node, State::kComplete});
  }

  std::vector<Node> nodes_;
  std::vector<Entry> stack_;
  int words_ = 0;
};

Tree build_binary(const std::vector<TagMachine::Node>& nodes, int id,
                  std::span<const std::string> words,
                  std::span<const std::string> pos) {
  const TagMachine::Node& node = nodes[id];
  if (node.word >= 0) {
    std::string label = node.label;
    if (!label.empty()) label += kChainSeparator;
    label += pos[node.word];
    return Tree(std::move(label), {Tree::leaf(words[node.word])});
  }
  std::string label = node.label.empty() ? std::string(kDummyLabel) : node.label;
  return Tree(std::move(label), {build_binary(nodes, node.left, words, pos),
                                 build_binary(nodes, node.right, words, pos)});
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

}  // namespace

std::string Tetratag::to_string() const {
  std::string out(1, static_cast<char>(kind));
  if (!label.empty()) {
    out += '/';
    out += label;
  }
  return out;
}

Tetratag Tetratag::parse(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw Error(ErrorCode::kFormat, "empty tag");
  Tetratag tag;
  switch (text.front()) {
    case 'l': tag.kind = TagKind::kLeftLeaf; break;
    case 'r': tag.kind = TagKind::kRightLeaf; break;
    case 'L': tag.kind = TagKind::kLeftInternal; break;
    case 'R': tag.kind = TagKind::kRightInternal; break;
    default:
      throw Error(ErrorCode::kFormat, "unknown tag '" + std::string(text) + "'");
  }
  if (text.size() > 1) {
    if (text[1] != '/' || text.size() == 2) {
      throw Error(ErrorCode::kFormat, "bad tag '" + std::string(text) + "'");
    }
    tag.label = std::string(text.substr(2));
  }
  return tag;
}

TagSequence::TagSequence(std::vector<Tetratag> tags) : tags_(std::move(tags)) {
  TagMachine machine;
  for (std::size_t i = 0; i < tags_.size(); ++i) machine.push(tags_[i], i);
  machine.finish(tags_.size());
}

TagSequence encode(const Tree& tree) {
  const Tree binary = binarize(tree);
  std::vector<Tetratag> tags;
  emit_in_order(binary, true, tags);
  return TagSequence(std::move(tags));
}

Tree decode(std::span<const Tetratag> tags, std::span<const std::string> words,
            std::span<const std::string> pos) {
  TagMachine machine;
  for (std::size_t i = 0; i < tags.size(); ++i) machine.push(tags[i], i);
  const int root = machine.finish(tags.size());
  const std::size_t word_count = (tags.size() + 1) / 2;
  if (words.size() != word_count || pos.size() != word_count) {
    throw Error(ErrorCode::kInvalidArgument,
                "tag sequence has " + std::to_string(word_count) +
                    " words but got " + std::to_string(words.size()) +
                    " words and " + std::to_string(pos.size()) + " POS labels");
  }
  const auto& nodes = machine.nodes();
  if (nodes[root].word < 0 && nodes[root].label.empty()) {
    throw Error(ErrorCode::kMalformedSequence, "unlabeled root node",
                nodes[root].tag_index);
  }
  return debinarize(build_binary(nodes, root, words, pos));
}

bool is_valid_prefix(std::span<const Tetratag> tags) {
  TagMachine machine;
  try {
    for (std::size_t i = 0; i < tags.size(); ++i) machine.push(tags[i], i);
  } catch (const Error&) {
    return false;
  }
  return true;
}

std::string render_tags(std::span<const Tetratag> tags) {
  std::string out = "[";
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (i > 0) out += ", ";
    out += '\'';
    out += tags[i].to_string();
    out += '\'';
  }
  out += ']';
  return out;
}

std::vector<Tetratag> parse_tags(std::string_view text) {
  text = trim(text);
  if (text.size() < 2 || text.front() != '[' || text.back() != ']') {
    throw Error(ErrorCode::kFormat, "tag list must be enclosed in [ ]");
  }
  text = trim(text.substr(1, text.size() - 2));
  std::vector<Tetratag> tags;
  if (text.empty()) return tags;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = text.find(',', start);
    std::string_view item = trim(text.substr(
        start, comma == text.npos ? text.npos : comma - start));
    if (item.size() >= 2 && (item.front() == '\'' || item.front() == '"') &&
        item.back() == item.front()) {
      item = item.substr(1, item.size() - 2);
    }
    tags.push_back(Tetratag::parse(item));
    if (comma == text.npos) break;
    start = comma + 1;
  }
  return tags;
}

}  // namespace syntax_smc
