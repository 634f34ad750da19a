# Copyright 2026 The syntax-smc Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Writes bridge_fixtures.jsonl: recorded exchanges with a tiny seeded
subword model speaking the language-model service protocol.

Every prefix a two-word generation can reach through the top-2 lists is
recorded, together with the tokenize and tags requests of its word
prefixes, so the client replays whole runs offline.
"""

import json
import math
import random
import sys

VOCAB = ["Ġthe", "Ġdog", "Ġcat", "s", "Ġran", "Ġsat", "Ġfish", "ed"]
TOP_K = 2
MAX_WORDS = 2
LEAF_TAGS = ["l/NP", "r/VP", "l", "r"]
INTERNAL_TAGS = ["L/S", "R", "R/VP", "DUMMY"]


def opens_word(token):
    return VOCAB[token].startswith("Ġ")


def rng_for(*key):
    return random.Random(json.dumps(key))


def next_token(prefix):
    rng = rng_for("next", prefix)
    weights = [rng.uniform(0.1, 1.0) for _ in VOCAB]
    eos = rng.uniform(0.2, 0.6) if prefix else 0.0
    total = sum(weights) + eos
    probs = [w / total for w in weights]
    # No continuation directly after another, nor at the start.
    candidates = [t for t in range(len(VOCAB))
                  if opens_word(t) or (prefix and opens_word(prefix[-1]))]
    top = sorted(candidates, key=lambda t: -probs[t])[:TOP_K]
    other = 1.0 - sum(probs[t] for t in top) - eos / total
    return {
        "top": [[t, repr(math.log(probs[t])), VOCAB[t]] for t in top],
        "eos_logprob": repr(math.log(eos / total)) if eos > 0 else "-inf",
        "other_mass_logprob": repr(math.log(other)),
    }, probs


def word_count(tokens):
    return sum(1 for i, t in enumerate(tokens) if i == 0 or opens_word(t))


def words_of(tokens):
    words = []
    for i, t in enumerate(tokens):
        text = VOCAB[t]
        if i == 0 or opens_word(t):
            words.append(text.lstrip("Ġ"))
        else:
            words[-1] += text
    return words


def tokenize(text):
    tokens, ends = [], []
    for word in text.split(" "):
        rest = "Ġ" + word
        while rest:
            match = max((t for t in range(len(VOCAB)) if rest.startswith(VOCAB[t])),
                        key=lambda t: len(VOCAB[t]), default=None)
            if match is None:
                raise ValueError("cannot tokenize " + repr(word))
            tokens.append(match)
            ends.append(False)
            rest = rest[len(VOCAB[match]):]
        ends[-1] = True
    return {"tokens": tokens, "word_ends": ends}


def tag_map(names, rng):
    weights = [rng.uniform(0.1, 1.0) for _ in names]
    total = sum(weights)
    return {n: repr(math.log(w / total)) for n, w in zip(names, weights)}


def tags(prefix):
    rng = rng_for("tags", prefix)
    return {"odd": tag_map(LEAF_TAGS, rng), "even": tag_map(INTERNAL_TAGS, rng)}


def main(path):
    records = {}

    def add(endpoint, request, response):
        records[endpoint + json.dumps(request, sort_keys=True)] = {
            "endpoint": endpoint, "request": request, "response": response}

    stack = [[]]
    while stack:
        prefix = stack.pop()
        reply, probs = next_token(prefix)
        add("/v1/next_token", {"prefix_tokens": prefix}, reply)
        words = words_of(prefix)
        for k in range(1, len(words) + 1):
            text = " ".join(words[:k])
            tok = tokenize(text)
            add("/v1/tokenize", {"text": text}, tok)
            for i, end in enumerate(tok["word_ends"]):
                if end:
                    cut = tok["tokens"][:i + 1]
                    add("/v1/tags", {"prefix_tokens": cut}, tags(cut))
        for entry in reply["top"]:
            child = prefix + [entry[0]]
            if word_count(child) <= MAX_WORDS:
                stack.append(child)
        if not prefix:
            for t in range(len(VOCAB)):
                add("/v1/score", {"prefix_tokens": [], "token_id": t},
                    {"logprob": repr(math.log(probs[t]))})

    with open(path, "w", encoding="utf-8") as out:
        for key in sorted(records):
            out.write(json.dumps(records[key], ensure_ascii=False, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "bridge_fixtures.jsonl")
