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

#ifndef SYNTAX_SMC_TOOLS_COMMANDS_H_
#define SYNTAX_SMC_TOOLS_COMMANDS_H_

#include <cstdint>
#include <string>

namespace syntax_smc::cli {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitRemote = 3;

struct TreeOptions {
  std::string action;
  std::string input = "-";
  bool json = false;
};

struct TrainOptions {
  std::string kind;
  std::string input;
  std::string output = "-";
  // ngram
  int order = 2;
  double k = 0.01;
  // bigram
  double floor = 1e-6;
  // tagger
  std::string context = "full";
  double learning_rate = 0.1;
  int epochs = 50;
  double l2 = 1e-4;
  // tabular
  std::string vocab;
  std::size_t max_words = 4;
  double eos_weight = 0.3;
  std::uint64_t seed = 0;
};

struct GenerateOptions {
  std::string tree;
  std::string method = "smc";
  std::size_t particles = 0;  // 0: 20 for the prior proposal, 6 for bigram
  double tau = 0.25;
  std::string proposal = "prior";
  std::string bigram;
  std::size_t top_k = 50;
  std::string lm;
  std::string remote_url;
  std::string replay;
  bool word_level = false;
  std::string potential = "grammar";
  std::string grammar;
  std::string tagger;
  std::string shaper_tagger;
  bool no_shaping = false;
  std::size_t max_words = 0;
  std::size_t samples = 1;
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string output = "-";
};

struct EvalOptions {
  std::string samples;
  std::string grammar;
  std::string lm;
  std::string parses;
  std::string reference = "grammar";
  std::string tagger;
  bool per_template = false;
  std::string output = "-";
};

struct OracleOptions {
  std::string lm;
  std::string grammar;
  std::string tree;
  std::string potential = "grammar";
  std::string tagger;
  std::size_t max_words = 0;
  std::string run;
  bool posterior = false;
  std::string output = "-";
};

struct CorpusOptions {
  std::string grammar;
  std::size_t count = 100;
  std::size_t min_words = 1;
  std::size_t max_words = 0;
  std::uint64_t seed = 0;
  std::string output = "-";
};

int cmd_tree(const TreeOptions& options);
int cmd_train(const TrainOptions& options);
int cmd_generate(const GenerateOptions& options);
int cmd_eval(const EvalOptions& options);
int cmd_oracle(const OracleOptions& options);
int cmd_corpus(const CorpusOptions& options);

}  // namespace syntax_smc::cli

#endif  // SYNTAX_SMC_TOOLS_COMMANDS_H_
