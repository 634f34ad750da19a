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

#include "commands.h"

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "syntax_smc/error.h"
#include "syntax_smc/inference.h"
#include "syntax_smc/lm.h"
#include "syntax_smc/metrics.h"
#include "syntax_smc/oracle.h"
#include "syntax_smc/pcfg.h"
#include "syntax_smc/proposals.h"
#include "syntax_smc/remote.h"
#include "syntax_smc/taggers.h"
#include "syntax_smc/tetratag.h"
#include "syntax_smc/tree.h"

namespace syntax_smc::cli {

using nlohmann::json;

namespace {

[[noreturn]] void input_error(const std::string& what) {
  throw Error(ErrorCode::kInvalidArgument, what);
}

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) input_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::string& path) {
  try {
    return json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kFormat, path + ": " + e.what());
  }
}

// stdout for "-", else a file.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path != "-") {
      file_.open(path, std::ios::binary);
      if (!file_) input_error("cannot write '" + path + "'");
    }
  }
  std::ostream& out() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

bool looks_like_treebank(const std::string& text) {
  const auto p = text.find_first_not_of(" \t\r\n");
  return p != std::string::npos && text[p] == '(';
}

std::shared_ptr<const LanguageModel> load_lm(const std::string& path) {
  const json doc = read_json_file(path);
  const std::string format = doc.value("format", "");
  if (format == "syntax-smc-ngram") return std::make_shared<NgramLM>(NgramLM::from_json(doc));
  if (format == "syntax-smc-tabular") {
    return std::make_shared<TabularLM>(TabularLM::from_json(doc));
  }
  throw Error(ErrorCode::kFormat, path + ": unknown language-model format '" + format + "'");
}

std::shared_ptr<const Pcfg> load_grammar(const std::string& path) {
  if (path.empty()) input_error("--grammar is required");
  return std::make_shared<Pcfg>(Pcfg::parse(read_text(path)));
}

std::shared_ptr<const FeatureTagger> load_tagger(const std::string& path) {
  if (path.empty()) input_error("--tagger is required");
  return std::make_shared<FeatureTagger>(FeatureTagger::from_json(read_json_file(path)));
}

std::vector<TreeTemplate> load_templates(const std::string& path) {
  if (path.empty()) input_error("--tree is required");
  std::vector<TreeTemplate> out;
  for (const Tree& t : parse_treebank(read_text(path))) out.push_back(template_from_tree(t));
  if (out.empty()) input_error("no tree in '" + path + "'");
  return out;
}

json tags_json(std::span<const Tetratag> tags) {
  json out = json::array();
  for (const Tetratag& t : tags) out.push_back(t.to_string());
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream ss(text);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// The potential, and the shaper that goes with it.
struct Scoring {
  std::shared_ptr<const Potential> potential;
  std::shared_ptr<const Shaper> shaper;
};

Scoring make_scoring(const std::string& kind, const std::string& grammar_path,
                     const std::string& tagger_path, const std::string& shaper_tagger_path,
                     const RemoteLM* remote) {
  if (kind == "grammar") {
    auto oracle = std::make_shared<GrammarOracleTagger>(load_grammar(grammar_path));
    return {oracle, oracle};
  }
  if (kind == "tagger") {
    auto tagger = load_tagger(tagger_path);
    auto shaper_tagger = shaper_tagger_path.empty() ? tagger : load_tagger(shaper_tagger_path);
    return {std::make_shared<FactoredPotential>(tagger),
            std::make_shared<FactoredShaper>(shaper_tagger)};
  }
  if (kind == "remote") {
    if (!remote) input_error("--potential remote needs --lm remote");
    auto tagger = std::make_shared<RemoteTagger>(*remote);
    return {std::make_shared<FactoredPotential>(tagger), std::make_shared<FactoredShaper>(tagger)};
  }
  if (kind == "one") return {std::make_shared<UnitPotential>(), std::make_shared<UnitShaper>()};
  input_error("unknown potential '" + kind + "'");
}

}  // namespace

// ---------------------------------------------------------------------------

int cmd_tree(const TreeOptions& options) {
  const std::string text = read_text(options.input);
  std::ostream& out = std::cout;
  if (options.action == "decode") {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::vector<Tetratag> tags;
      std::vector<std::string> words;
      std::vector<std::string> pos;
      if (line.find('{') != std::string::npos) {
        json rec;
        try {
          rec = json::parse(line);
          for (const auto& t : rec.at("tags")) tags.push_back(Tetratag::parse(t.get<std::string>()));
          pos = rec.at("pos").get<std::vector<std::string>>();
          if (rec.contains("words")) words = rec["words"].get<std::vector<std::string>>();
        } catch (const json::exception& e) {
          throw Error(ErrorCode::kFormat, std::string("decode record: ") + e.what());
        }
      } else {
        tags = parse_tags(line);
      }
      const std::size_t n = (tags.size() + 1) / 2;
      if (words.empty()) words.assign(n, std::string(kPlaceholder));
      if (pos.empty()) pos.assign(n, std::string(kPlaceholder));
      out << serialize_bracketed(decode(tags, words, pos)) << '\n';
    }
    return kExitOk;
  }
  const std::vector<Tree> trees = parse_treebank(text);
  for (const Tree& tree : trees) {
    if (options.action == "parse") {
      out << serialize_bracketed(tree) << '\n';
    } else if (options.action == "stats") {
      const TreeStats s = tree_stats(tree);
      out << json{{"height", s.height}, {"leaf_count", s.leaf_count}, {"size", s.size}}.dump()
          << '\n';
    } else if (options.action == "template") {
      out << serialize_bracketed(template_from_tree(tree).tree()) << '\n';
    } else if (options.action == "encode") {
      const TagSequence tags = encode(tree);
      if (options.json) {
        out << json{{"tags", tags_json(tags.tags())},
                    {"words", leaf_words(tree)},
                    {"pos", pos_sequence(tree)}}
                   .dump()
            << '\n';
      } else {
        out << render_tags(tags.tags()) << '\n';
      }
    } else {
      input_error("unknown tree action '" + options.action + "'");
    }
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_train(const TrainOptions& options) {
  json model;
  if (options.kind == "tabular") {
    const std::vector<std::string> items = split_list(options.vocab);
    model = TabularLM::random(Vocabulary(items), options.max_words, options.seed,
                              options.eos_weight)
                .to_json();
  } else {
    if (options.input.empty()) input_error("an input corpus is required");
    const std::string text = read_text(options.input);
    const bool treebank = looks_like_treebank(text);
    std::vector<Tree> trees;
    if (treebank) trees = parse_treebank(text);

    if (options.kind == "ngram") {
      std::vector<std::vector<std::string>> corpus;
      if (treebank) {
        for (const Tree& t : trees) corpus.push_back(leaf_words(t));
      } else {
        std::istringstream in(text);
        corpus = read_corpus(in);
      }
      model = NgramLM::train(corpus, {options.order, options.k}).to_json();
    } else if (options.kind == "bigram") {
      if (!treebank) input_error("bigram training needs a bracketed treebank");
      std::vector<PosTaggedSentence> corpus;
      for (const Tree& t : trees) corpus.push_back(pos_tagged(t));
      model = PosBigramModel::train(corpus, options.floor).to_json();
    } else if (options.kind == "tagger") {
      std::vector<TaggedSentence> corpus;
      if (treebank) {
        for (const Tree& t : trees) corpus.push_back({leaf_words(t), encode(t)});
      } else {
        std::istringstream in(text);
        corpus = read_tagged_corpus(in);
      }
      FeatureTaggerOptions fo;
      if (options.context == "full") {
        fo.context = TaggerContext::kFull;
      } else if (options.context == "prefix") {
        fo.context = TaggerContext::kPrefix;
      } else {
        input_error("--context must be full or prefix");
      }
      fo.learning_rate = options.learning_rate;
      fo.epochs = options.epochs;
      fo.l2 = options.l2;
      fo.seed = options.seed;
      model = FeatureTagger::train(corpus, fo).to_json();
    } else {
      input_error("unknown model kind '" + options.kind + "'");
    }
  }
  Sink sink(options.output);
  sink.out() << model.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_generate(const GenerateOptions& options) {
  if (options.method != "sis" && options.method != "smc") {
    input_error("--method must be sis or smc");
  }
  if (options.proposal != "prior" && options.proposal != "bigram") {
    input_error("--proposal must be prior or bigram");
  }
  const std::vector<TreeTemplate> templates = load_templates(options.tree);

  std::shared_ptr<const LanguageModel> lm;
  std::unique_ptr<RemoteLM> remote;
  if (options.lm == "remote") {
    std::shared_ptr<const Transport> transport;
    if (!options.replay.empty()) {
      std::ifstream in(options.replay);
      if (!in) input_error("cannot open '" + options.replay + "'");
      transport = std::make_shared<ReplayTransport>(ReplayTransport::from_jsonl(in));
    } else if (!options.remote_url.empty()) {
      transport = std::make_shared<HttpTransport>(options.remote_url);
    } else {
      input_error("--lm remote needs --remote-url or --replay");
    }
    RemoteOptions ro;
    ro.word_level = options.word_level;
    remote = std::make_unique<RemoteLM>(transport, ro);
    if (options.proposal != "prior") input_error("a remote LM supports only --proposal prior");
  } else if (!options.lm.empty()) {
    lm = load_lm(options.lm);
  } else {
    input_error("--lm is required");
  }

  std::shared_ptr<const PosBigramModel> bigram;
  if (options.proposal == "bigram") {
    if (options.bigram.empty()) input_error("--proposal bigram needs --bigram");
    bigram = std::make_shared<PosBigramModel>(PosBigramModel::from_json(read_json_file(options.bigram)));
  }

  const Scoring scoring = make_scoring(options.potential, options.grammar, options.tagger,
                                       options.shaper_tagger, remote.get());
  const UnitShaper unit_shaper;
  const Shaper& shaper = options.no_shaping ? static_cast<const Shaper&>(unit_shaper)
                                            : *scoring.shaper;

  RunConfig config;
  config.particles = options.particles != 0 ? options.particles
                                            : (options.proposal == "bigram" ? 6 : 20);
  config.tau = options.tau;
  config.max_words = options.max_words;
  config.seed = options.seed;
  config.threads = options.threads;

  Sink sink(options.output);
  for (const TreeTemplate& tmpl : templates) {
    const TagSequence target = encode(tmpl);
    std::unique_ptr<Proposal> proposal;
    std::unique_ptr<Stepper> stepper;
    if (remote) {
      stepper = std::make_unique<RemoteStepper>(*remote);
    } else {
      if (bigram) {
        proposal = std::make_unique<BigramMixtureProposal>(lm, bigram, tmpl, options.top_k);
      } else {
        proposal = std::make_unique<PriorProposal>(lm);
      }
      stepper = std::make_unique<WordStepper>(*lm, *proposal);
    }
    const RunResult result = options.method == "sis"
                                 ? sis(*stepper, *scoring.potential, target, config)
                                 : smc(*stepper, *scoring.potential, shaper, target, config);
    std::vector<std::vector<std::string>> samples;
    if (result.degenerate()) {
      std::cerr << "warning: degenerate run for " << serialize_bracketed(tmpl.tree())
                << " (all weights zero)\n";
    } else {
      samples = sample_outputs(result, options.samples, CounterRng(options.seed));
    }
    const json extra = {{"template", serialize_bracketed(tmpl.tree())},
                        {"proposal", options.proposal},
                        {"potential", options.potential},
                        {"shaping", !options.no_shaping && options.method == "smc"}};
    write_run_jsonl(sink.out(), result, samples, extra);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_eval(const EvalOptions& options) {
  std::vector<RunRecord> runs;
  {
    const std::string text = read_text(options.samples);
    std::istringstream in(text);
    runs = read_run_jsonl(in);
  }
  std::size_t total = 0;
  for (const RunRecord& r : runs) total += r.samples.size();
  if (total == 0) throw Error(ErrorCode::kFormat, "no sample records in '" + options.samples + "'");

  const auto grammar = options.grammar.empty() ? nullptr : load_grammar(options.grammar);
  std::shared_ptr<const Potential> reference;
  if (options.reference == "grammar") {
    if (!grammar) input_error("--reference grammar needs --grammar");
    reference = std::make_shared<GrammarOracleTagger>(grammar);
  } else if (options.reference == "tagger") {
    reference = std::make_shared<FactoredPotential>(load_tagger(options.tagger));
  } else {
    input_error("unknown reference potential '" + options.reference + "'");
  }

  Parser parser;
  if (!options.parses.empty()) {
    auto table = std::make_shared<std::map<std::vector<std::string>, Tree>>();
    for (const Tree& t : parse_treebank(read_text(options.parses))) {
      table->emplace(leaf_words(t), t);
    }
    parser = [table](std::span<const std::string> words) -> std::optional<Tree> {
      const auto it = table->find(std::vector<std::string>(words.begin(), words.end()));
      if (it == table->end()) return std::nullopt;
      return it->second;
    };
  } else {
    if (!grammar) input_error("eval needs --grammar or --parses");
    parser = [grammar](std::span<const std::string> words) { return grammar->viterbi(words); };
  }

  const auto lm = options.lm.empty() ? nullptr : load_lm(options.lm);

  std::vector<OutputScore> pooled;
  json per_template = json::array();
  for (const RunRecord& run : runs) {
    if (!run.header.contains("template") || !run.header["template"].is_string()) {
      throw Error(ErrorCode::kFormat, "run header lacks a \"template\" string");
    }
    const TreeTemplate tmpl = TreeTemplate::parse(run.header["template"].get<std::string>());
    std::vector<OutputScore> scores =
        score_outputs(run.samples, tmpl, parser, *reference, lm.get());
    if (options.per_template) {
      json entry = aggregate(scores).to_json();
      entry["template"] = serialize_bracketed(tmpl.tree());
      per_template.push_back(std::move(entry));
    }
    pooled.insert(pooled.end(), std::make_move_iterator(scores.begin()),
                  std::make_move_iterator(scores.end()));
  }
  json report = aggregate(pooled).to_json();
  if (options.per_template) report = {{"overall", report}, {"per_template", per_template}};
  Sink sink(options.output);
  sink.out() << report.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_oracle(const OracleOptions& options) {
  if (options.lm.empty()) input_error("--lm is required");
  const auto lm = load_lm(options.lm);
  const std::vector<TreeTemplate> templates = load_templates(options.tree);
  const TreeTemplate& tmpl = templates.front();
  const TagSequence target = encode(tmpl);
  const Scoring scoring = make_scoring(options.potential, options.grammar, options.tagger, "",
                                       nullptr);
  const std::size_t max_words = options.max_words != 0 ? options.max_words : tmpl.word_count();

  const ExactPosterior posterior =
      enumerate_posterior(*lm, *scoring.potential, target, max_words);
  const auto shaping = OptimalShaping::build(lm, *scoring.potential, target, max_words);

  json out = {{"z", static_cast<double>(posterior.z)},
              {"phi_eps", static_cast<double>(shaping->z())},
              {"prior_mass", static_cast<double>(posterior.prior_mass)},
              {"support_size", posterior.table.size()},
              {"max_words", max_words}};
  if (!options.run.empty()) {
    std::ifstream in(options.run);
    if (!in) input_error("cannot open '" + options.run + "'");
    const Distribution exact = posterior.distribution();
    json tvds = json::array();
    for (const RunRecord& r : read_run_jsonl(in)) {
      Distribution p;
      for (const SupportEntry& e : r.support) p[e.words] += e.weight;
      tvds.push_back(tvd(p, exact));
    }
    out["tvd"] = tvds;
  }
  if (options.posterior) out["posterior"] = posterior_json(posterior);
  Sink sink(options.output);
  sink.out() << out.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

int cmd_corpus(const CorpusOptions& options) {
  const auto grammar = load_grammar(options.grammar);
  std::mt19937_64 gen(options.seed);
  Sink sink(options.output);
  std::size_t kept = 0;
  const std::size_t budget = std::max<std::size_t>(options.count * 1000, 1000);
  for (std::size_t attempt = 0; kept < options.count; ++attempt) {
    if (attempt == budget) {
      input_error("the grammar yields too few trees within the length bounds");
    }
    const auto tree = grammar->sample(gen);
    if (!tree) continue;
    const auto n = static_cast<std::size_t>(tree_stats(*tree).leaf_count);
    if (n < options.min_words || (options.max_words != 0 && n > options.max_words)) continue;
    sink.out() << serialize_bracketed(*tree) << '\n';
    ++kept;
  }
  return kExitOk;
}

}  // namespace syntax_smc::cli
