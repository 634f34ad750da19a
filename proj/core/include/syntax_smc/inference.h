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

// Sequential importance sampling and sequential Monte Carlo over words.
//
// Each particle grows one word per step. Incomplete particles multiply their
// weight by p_lm(x | y) / q(x | y) and, with shaping, by phi(y x) / phi(y).
// Completion multiplies by p_lm(eos | y) psi(y) / (q(eos | y) phi(y)). Once a
// particle holds the word budget N, EOS is forced with q = 1. All weights
// live in log space.

#ifndef SYNTAX_SMC_INFERENCE_H_
#define SYNTAX_SMC_INFERENCE_H_

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "syntax_smc/lm.h"
#include "syntax_smc/proposals.h"
#include "syntax_smc/taggers.h"
#include "syntax_smc/tetratag.h"
#include "syntax_smc/tree.h"

namespace syntax_smc {

// Stateless generator: every draw is a hash of (seed, domain, a, b, c), so
// results do not depend on the order in which particles are advanced.
class CounterRng {
 public:
  enum class Domain : std::uint64_t { kPropose = 1, kResample = 2, kOutput = 3 };

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(Domain domain, std::uint64_t a, std::uint64_t b = 0,
                     std::uint64_t c = 0) const;
  // Uniform on [0, 1) with 53 random bits.
  double uniform(Domain domain, std::uint64_t a, std::uint64_t b = 0,
                 std::uint64_t c = 0) const;
  std::uint64_t seed() const noexcept { return seed_; }

 private:
  std::uint64_t seed_;
};

// Index drawn from `dist` by inverting its CDF at u in [0, 1).
TokenId sample_token(const NextTokenDistribution& dist, double u);

// A token sampled past a word boundary; it opens the next word.
struct CarryToken {
  TokenId id = 0;
  std::string text;
  double log_p = 0.0;
  double log_q = 0.0;
  bool eos = false;
};

struct Particle {
  std::vector<std::string> words;
  std::vector<TokenId> tokens;
  double log_weight = 0.0;
  bool active = true;  // true while incomplete
  double log_prior = 0.0;     // sum of log p_lm, EOS included once complete
  double log_proposal = 0.0;  // sum of log q
  double log_shape = 0.0;     // log phi(words) while active
  double log_potential = kLogZero;  // log psi(words) once complete
  // Sum over resampling events of log(W / M) - log w, so that
  // log_weight = log_scale + log_prior - log_proposal
  //              + (active ? log_shape : log_potential).
  double log_scale = 0.0;
  std::optional<CarryToken> carry;
};

// One sampled word, or EOS.
struct WordStep {
  bool eos = false;
  std::string word;
  std::vector<TokenId> tokens;
  double log_p = 0.0;  // log p_lm of all sampled tokens
  double log_q = 0.0;  // log q of all sampled tokens
  std::optional<CarryToken> carry;
};

// Draws the next word for a particle. Implementations must be safe for
// concurrent const calls.
class Stepper {
 public:
  virtual ~Stepper() = default;
  virtual WordStep step(const Particle& particle, const CounterRng& rng,
                        std::size_t index, std::size_t step) const = 0;
  // log p_lm(EOS | particle) for a forced end.
  virtual double log_eos(const Particle& particle) const = 0;
};

// Word-level LM with a word-level proposal: one token per word.
class WordStepper final : public Stepper {
 public:
  WordStepper(const LanguageModel& lm, const Proposal& proposal)
      : lm_(lm), proposal_(proposal) {}
  WordStep step(const Particle& particle, const CounterRng& rng, std::size_t index,
                std::size_t step) const override;
  double log_eos(const Particle& particle) const override;

 private:
  const LanguageModel& lm_;
  const Proposal& proposal_;
};

struct StepDiagnostics {
  std::size_t step = 0;
  double ess = 0.0;
  bool resampled = false;
  std::size_t active_count = 0;
};

struct RunConfig {
  std::size_t particles = 20;  // M
  double tau = 0.25;
  std::size_t max_words = 0;   // N; 0 means the template length
  std::uint64_t seed = 0;
  unsigned threads = 1;
  // Called after every step (and after resampling) with the particles.
  std::function<void(std::size_t step, std::span<const Particle>)> observer;
};

struct SupportEntry {
  std::vector<std::string> words;
  double weight = 0.0;  // normalized
  double log_prior = kLogZero;
  double log_potential = kLogZero;
};

struct RunResult {
  std::string method;
  double log_z_hat = kLogZero;
  std::vector<SupportEntry> support;
  std::vector<StepDiagnostics> diagnostics;
  std::vector<Particle> particles;
  std::size_t particle_count = 0;
  double tau = 0.0;
  std::uint64_t seed = 0;

  double z_hat() const;
  bool degenerate() const noexcept { return support.empty(); }
};

// Algorithm without shaping or resampling.
RunResult sis(const Stepper& stepper, const Potential& potential,
              const TagSequence& target, const RunConfig& config);
// Shaped weights with ESS-triggered multinomial resampling after every step.
RunResult smc(const Stepper& stepper, const Potential& potential, const Shaper& shaper,
              const TagSequence& target, const RunConfig& config);

RunResult sis(const LanguageModel& lm, const Proposal& proposal, const Potential& potential,
              const TreeTemplate& tmpl, const RunConfig& config);
RunResult smc(const LanguageModel& lm, const Proposal& proposal, const Potential& potential,
              const Shaper& shaper, const TreeTemplate& tmpl, const RunConfig& config);

// (sum w)^2 / sum w^2. Throws Error{kAllZeroWeights}.
double ess(std::span<const double> weights);
double ess_from_log(std::span<const double> log_weights);

// No-op when ESS >= tau * M. Otherwise draws M ancestors with probability
// proportional to weight, keyed by (resample, step, m), and sets every
// weight to W / M. Returns whether resampling happened. Throws
// Error{kAllZeroWeights}.
bool resample(std::vector<Particle>& particles, double tau, const CounterRng& rng,
              std::size_t step);

// k independent draws from the normalized support. Throws
// Error{kDegenerateRun} when the support is empty.
std::vector<std::vector<std::string>> sample_outputs(const RunResult& result, std::size_t k,
                                                     const CounterRng& rng);

// JSONL: a header record, then one record per sample, then one per support
// entry. -infinity serializes as null.
void write_run_jsonl(std::ostream& out, const RunResult& result,
                     std::span<const std::vector<std::string>> samples,
                     const nlohmann::json& header_extra = nlohmann::json::object());

struct RunRecord {
  nlohmann::json header;
  std::vector<std::vector<std::string>> samples;
  std::vector<SupportEntry> support;
};

// Reads one or more concatenated runs. Throws Error{kFormat}.
std::vector<RunRecord> read_run_jsonl(std::istream& in);

}  // namespace syntax_smc

#endif  // SYNTAX_SMC_INFERENCE_H_
