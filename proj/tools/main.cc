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

// syntax-smc: syntax-controlled generation by sequential Monte Carlo.
//
// Exit status: 0 ok, 2 bad input or configuration, 3 language-model service
// failure, 1 anything else.

#include <exception>
#include <functional>
#include <iostream>

#include "CLI11.hpp"
#include "commands.h"
#include "json.hpp"
#include "syntax_smc/error.h"

using namespace syntax_smc::cli;

int main(int argc, char** argv) {
  CLI::App app{"Syntax-controlled text generation with sequential Monte Carlo"};
  app.require_subcommand(1);
  app.set_config("--config", "", "INI file of option defaults (key=value, [subcommand] sections)")
      ->envname("SYNTAX_SMC_CONFIG");

  std::function<int()> action;

  TreeOptions tree;
  auto* tree_cmd = app.add_subcommand("tree", "Tree utilities");
  tree_cmd->add_option("action", tree.action, "parse | stats | template | encode | decode")
      ->required()
      ->check(CLI::IsMember({"parse", "stats", "template", "encode", "decode"}));
  tree_cmd->add_option("input", tree.input, "Treebank or tag file ('-' for stdin)");
  tree_cmd->add_flag("--json", tree.json, "encode: emit {tags, words, pos} records");
  tree_cmd->callback([&] { action = [&] { return cmd_tree(tree); }; });

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train or build a model file");
  train_cmd->add_option("kind", train.kind, "ngram | bigram | tagger | tabular")
      ->required()
      ->check(CLI::IsMember({"ngram", "bigram", "tagger", "tabular"}));
  train_cmd->add_option("input", train.input, "Corpus: treebank, plain text or tagged JSONL");
  train_cmd->add_option("-o,--output", train.output, "Model file ('-' for stdout)");
  train_cmd->add_option("--order", train.order, "n-gram order")->capture_default_str();
  train_cmd->add_option("--k", train.k, "Add-k smoothing constant")->capture_default_str();
  train_cmd->add_option("--floor", train.floor, "Bigram proposal floor")->capture_default_str();
  train_cmd->add_option("--context", train.context, "Tagger context: full | prefix")
      ->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate, "Tagger learning rate")->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "Tagger epochs")->capture_default_str();
  train_cmd->add_option("--l2", train.l2, "Tagger L2 penalty")->capture_default_str();
  train_cmd->add_option("--vocab", train.vocab, "Tabular: comma-separated vocabulary");
  train_cmd->add_option("--max-words", train.max_words, "Tabular: longest string")
      ->capture_default_str();
  train_cmd->add_option("--eos-weight", train.eos_weight, "Tabular: relative EOS weight")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "Random seed")->capture_default_str();
  train_cmd->callback([&] { action = [&] { return cmd_train(train); }; });

  GenerateOptions gen;
  auto* gen_cmd = app.add_subcommand("generate", "Fill the words of syntax templates");
  gen_cmd->add_option("--tree", gen.tree, "Template trees (bracketed; words are ignored)")
      ->required();
  gen_cmd->add_option("--method", gen.method, "sis | smc")->capture_default_str();
  gen_cmd->add_option("--M", gen.particles, "Particles (default 20, or 6 with --proposal bigram)");
  gen_cmd->add_option("--tau", gen.tau, "Resampling threshold on ESS / M (0 disables)")
      ->capture_default_str();
  gen_cmd->add_option("--proposal", gen.proposal, "prior | bigram")->capture_default_str();
  gen_cmd->add_option("--bigram", gen.bigram, "POS bigram model file");
  gen_cmd->add_option("--top-k", gen.top_k, "Floor candidates of the bigram proposal")
      ->capture_default_str();
  gen_cmd->add_option("--lm", gen.lm, "Language-model file, or 'remote'")->required();
  gen_cmd->add_option("--remote-url", gen.remote_url, "Language-model service base URL");
  gen_cmd->add_option("--replay", gen.replay, "Answer service requests from a recorded JSONL");
  gen_cmd->add_flag("--word-level", gen.word_level, "Remote tokens are whole words");
  gen_cmd->add_option("--potential", gen.potential, "grammar | tagger | remote | one")
      ->capture_default_str();
  gen_cmd->add_option("--grammar", gen.grammar, "PCFG file");
  gen_cmd->add_option("--tagger", gen.tagger, "Tagger model for the potential");
  gen_cmd->add_option("--shaper-tagger", gen.shaper_tagger,
                      "Tagger model for shaping (default: --tagger)");
  gen_cmd->add_flag("--no-shaping", gen.no_shaping, "Resample on prior weights only");
  gen_cmd->add_option("--max-words", gen.max_words, "Word budget (default: template length)");
  gen_cmd->add_option("--k", gen.samples, "Samples drawn per template")->capture_default_str();
  gen_cmd->add_option("--threads", gen.threads, "Worker threads")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  gen_cmd->add_option("-o,--output", gen.output, "Run JSONL ('-' for stdout)");
  gen_cmd->callback([&] { action = [&] { return cmd_generate(gen); }; });

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Score generated samples");
  eval_cmd->add_option("samples", eval.samples, "Run JSONL from generate")->required();
  eval_cmd->add_option("--grammar", eval.grammar, "PCFG used as parser and reference");
  eval_cmd->add_option("--lm", eval.lm, "Language model for log prior");
  eval_cmd->add_option("--parses", eval.parses, "Externally produced parses (treebank)");
  eval_cmd->add_option("--reference", eval.reference, "grammar | tagger")->capture_default_str();
  eval_cmd->add_option("--tagger", eval.tagger, "Tagger model for --reference tagger");
  eval_cmd->add_flag("--per-template", eval.per_template, "Add a per-template breakdown");
  eval_cmd->add_option("-o,--output", eval.output, "Report file ('-' for stdout)");
  eval_cmd->callback([&] { action = [&] { return cmd_eval(eval); }; });

  OracleOptions oracle;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact evidence and posterior by enumeration");
  oracle_cmd->add_option("--lm", oracle.lm, "Language-model file")->required();
  oracle_cmd->add_option("--tree", oracle.tree, "Template tree")->required();
  oracle_cmd->add_option("--potential", oracle.potential, "grammar | tagger | one")
      ->capture_default_str();
  oracle_cmd->add_option("--grammar", oracle.grammar, "PCFG file");
  oracle_cmd->add_option("--tagger", oracle.tagger, "Tagger model");
  oracle_cmd->add_option("--max-words", oracle.max_words, "Longest string (default: template)");
  oracle_cmd->add_option("--run", oracle.run, "Run JSONL to compare by total variation");
  oracle_cmd->add_flag("--posterior", oracle.posterior, "Include the exact posterior table");
  oracle_cmd->add_option("-o,--output", oracle.output, "Output file ('-' for stdout)");
  oracle_cmd->callback([&] { action = [&] { return cmd_oracle(oracle); }; });

  CorpusOptions corpus;
  auto* corpus_cmd = app.add_subcommand("corpus", "Sample a treebank from a PCFG");
  corpus_cmd->add_option("--grammar", corpus.grammar, "PCFG file")->required();
  corpus_cmd->add_option("--count", corpus.count, "Trees to emit")->capture_default_str();
  corpus_cmd->add_option("--min-words", corpus.min_words, "Shortest yield")->capture_default_str();
  corpus_cmd->add_option("--max-words", corpus.max_words, "Longest yield (0: any)");
  corpus_cmd->add_option("--seed", corpus.seed, "Random seed")->capture_default_str();
  corpus_cmd->add_option("-o,--output", corpus.output, "Treebank file ('-' for stdout)");
  corpus_cmd->callback([&] { action = [&] { return cmd_corpus(corpus); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    return action();
  } catch (const syntax_smc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == syntax_smc::ErrorCode::kRemote ? kExitRemote : kExitInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error [Format]: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
