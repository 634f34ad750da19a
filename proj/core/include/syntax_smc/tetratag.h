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

// Tetratag linearization of binarized constituency trees.
//
// An in-order walk of the binarized tree emits one tag per node: words give
// `l`/`r` (left or right child of their parent) and binary nodes give
// `L`/`R`. The root counts as a left child. A tree over L words therefore
// yields 2L - 1 tags that alternate leaf, internal, leaf, ..., leaf.

#ifndef SYNTAX_SMC_TETRATAG_H_
#define SYNTAX_SMC_TETRATAG_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "syntax_smc/tree.h"

namespace syntax_smc {

enum class TagKind : char {
  kLeftLeaf = 'l',
  kRightLeaf = 'r',
  kLeftInternal = 'L',
  kRightInternal = 'R',
};

struct Tetratag {
  TagKind kind = TagKind::kLeftLeaf;
  // Leaf tags: the collapsed unary chain above the preterminal, '+'-joined.
  // Internal tags: the node label. Empty when absent (plain word, dummy).
  std::string label;

  bool is_leaf() const noexcept {
    return kind == TagKind::kLeftLeaf || kind == TagKind::kRightLeaf;
  }
  bool is_left() const noexcept {
    return kind == TagKind::kLeftLeaf || kind == TagKind::kLeftInternal;
  }

  // "kind" or "kind/label".
  std::string to_string() const;
  static Tetratag parse(std::string_view text);

  friend bool operator==(const Tetratag&, const Tetratag&) = default;
};

// A complete, well-formed tag sequence of length 2L - 1.
class TagSequence {
 public:
  TagSequence() = default;
  // Throws Error{kMalformedSequence} unless `tags` decodes to a tree.
  explicit TagSequence(std::vector<Tetratag> tags);

  std::span<const Tetratag> tags() const noexcept { return tags_; }
  std::size_t size() const noexcept { return tags_.size(); }
  std::size_t word_count() const noexcept { return (tags_.size() + 1) / 2; }
  const Tetratag& operator[](std::size_t i) const { return tags_[i]; }

  // Tag in the leaf (odd, 1-based 2i-1) slot of 0-based word i.
  const Tetratag& leaf_tag(std::size_t word) const { return tags_[2 * word]; }
  // Tag in the internal (even) slot of word i; word_count()-1 has none.
  const Tetratag& internal_tag(std::size_t word) const {
    return tags_[2 * word + 1];
  }

  friend bool operator==(const TagSequence&, const TagSequence&) = default;

 private:
  std::vector<Tetratag> tags_;
};

TagSequence encode(const Tree& tree);
inline TagSequence encode(const TreeTemplate& tmpl) { return encode(tmpl.tree()); }

// Rebuilds the tree from its tags, words and preterminal labels. Throws
// Error{kMalformedSequence} with the failing tag index, and
// Error{kInvalidArgument} if words/pos do not match the word count.
Tree decode(std::span<const Tetratag> tags,
            std::span<const std::string> words,
            std::span<const std::string> pos);

// True iff some continuation of `tags` decodes.
bool is_valid_prefix(std::span<const Tetratag> tags);

// "['l/NP', 'L/S', 'r']"
std::string render_tags(std::span<const Tetratag> tags);
std::vector<Tetratag> parse_tags(std::string_view text);

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_TETRATAG_H_
