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

#include "syntax_smc/inference.h"

#include <algorithm>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "syntax_smc/error.h"
#include "syntax_smc/logmath.h"

namespace syntax_smc {

using nlohmann::json;

namespace {

std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t CounterRng::bits(Domain domain, std::uint64_t a, std::uint64_t b,
                               std::uint64_t c) const {
  std::uint64_t h = splitmix(seed_);
  h = splitmix(h ^ static_cast<std::uint64_t>(domain));
  h = splitmix(h ^ a);
  h = splitmix(h ^ b);
  return splitmix(h ^ c);
}

double CounterRng::uniform(Domain domain, std::uint64_t a, std::uint64_t b,
                           std::uint64_t c) const {
  return static_cast<double>(bits(domain, a, b, c) >> 11) * 0x1.0p-53;
}

TokenId sample_token(const NextTokenDistribution& dist, double u) {
  double cum = 0.0;
  TokenId last = -1;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    const double p = dist.prob(static_cast<TokenId>(i));
    if (p <= 0.0) continue;
    cum += p;
    last = static_cast<TokenId>(i);
    if (u < cum) return last;
  }
  if (last < 0) throw Error(ErrorCode::kAllZeroWeights, "distribution has no mass");
  return last;  // rounding left u above the total
}

WordStep WordStepper::step(const Particle& particle, const CounterRng& rng,
                           std::size_t index, std::size_t step) const {
  const NextTokenDistribution q = proposal_.propose(particle.tokens);
  const TokenId x = sample_token(q, rng.uniform(CounterRng::Domain::kPropose, index, step));
  WordStep out;
  out.log_q = q.logprob(x);
  out.log_p = lm_.conditional(particle.tokens).logprob(x);
  out.eos = x == q.eos();
  if (!out.eos) {
    out.word = std::string(lm_.vocabulary().token(x));
    out.tokens = {x};
  }
  return out;
}

double WordStepper::log_eos(const Particle& particle) const {
  const NextTokenDistribution p = lm_.conditional(particle.tokens);
  return p.logprob(p.eos());
}

double RunResult::z_hat() const { return std::exp(log_z_hat); }

double ess_from_log(std::span<const double> log_weights) {
  double hi = kLogZero;
  for (double l : log_weights) hi = std::max(hi, l);
  if (hi == kLogZero) throw Error(ErrorCode::kAllZeroWeights, "all weights are zero");
  double s1 = 0.0, s2 = 0.0;
  for (double l : log_weights) {
    const double w = std::exp(l - hi);
    s1 += w;
    s2 += w * w;
  }
  return s1 * s1 / s2;
}

double ess(std::span<const double> weights) {
  std::vector<double> logs;
  logs.reserve(weights.size());
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "negative weight");
    logs.push_back(safe_log(w));
  }
  return ess_from_log(logs);
}

bool resample(std::vector<Particle>& particles, double tau, const CounterRng& rng,
              std::size_t step) {
  const std::size_t m = particles.size();
  std::vector<double> logs(m);
  for (std::size_t i = 0; i < m; ++i) logs[i] = particles[i].log_weight;
  const double total = log_sum_exp(logs);
  if (total == kLogZero) throw Error(ErrorCode::kAllZeroWeights, "all weights are zero");
  if (ess_from_log(logs) >= tau * static_cast<double>(m)) return false;

  std::vector<double> cum(m);
  double run = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    run += std::exp(logs[i] - total);
    cum[i] = run;
  }
  const double average = total - std::log(static_cast<double>(m));
  std::vector<Particle> next;
  next.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double u = rng.uniform(CounterRng::Domain::kResample, step, j) * run;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    Particle copy = particles[static_cast<std::size_t>(it - cum.begin())];
    copy.log_scale += average - copy.log_weight;
    copy.log_weight = average;
    next.push_back(std::move(copy));
  }
  particles = std::move(next);
  return true;
}

namespace {

class Engine {
 public:
  Engine(const Stepper& stepper, const Potential& potential, const Shaper* shaper,
         const TagSequence& target, const RunConfig& config)
      : stepper_(stepper),
        potential_(potential),
        shaper_(shaper),
        target_(target),
        config_(config),
        rng_(config.seed),
        budget_(config.max_words ? config.max_words : target.word_count()) {
    if (config.particles == 0) throw Error(ErrorCode::kInvalidArgument, "M must be >= 1");
    if (!(config.tau >= 0.0 && config.tau <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "tau must lie in [0, 1]");
    }
  }

  RunResult run(bool resampling, std::string method) {
    const double init = shaper_ ? shaper_->log_score({}, target_) : 0.0;
    std::vector<Particle> particles(config_.particles);
    for (Particle& p : particles) {
      p.log_weight = init;
      p.log_shape = init;
    }
    RunResult result;
    result.method = std::move(method);
    for (std::size_t step = 0;; ++step) {
      const auto active = std::count_if(particles.begin(), particles.end(),
                                        [](const Particle& p) { return p.active; });
      if (active == 0) break;
      advance_all(particles, step);

      StepDiagnostics diag;
      diag.step = step;
      std::vector<double> logs;
      for (const Particle& p : particles) {
        logs.push_back(p.log_weight);
        diag.active_count += p.active ? 1 : 0;
      }
      const bool alive = log_sum_exp(logs) != kLogZero;
      diag.ess = alive ? ess_from_log(logs) : 0.0;
      if (resampling && alive) diag.resampled = resample(particles, config_.tau, rng_, step);
      result.diagnostics.push_back(diag);
      if (config_.observer) config_.observer(step, particles);
    }
    finish(particles, result);
    result.particles = std::move(particles);
    return result;
  }

 private:
  void advance_all(std::vector<Particle>& particles, std::size_t step) {
    const std::size_t m = particles.size();
    const unsigned threads = std::max(1u, std::min<unsigned>(config_.threads, m));
    if (threads == 1) {
      for (std::size_t i = 0; i < m; ++i) advance(particles[i], i, step);
      return;
    }
    std::exception_ptr failure;
    std::mutex lock;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&, t] {
        try {
          for (std::size_t i = t; i < m; i += threads) advance(particles[i], i, step);
        } catch (...) {
          std::lock_guard<std::mutex> guard(lock);
          if (!failure) failure = std::current_exception();
        }
      });
    }
    for (std::thread& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  void advance(Particle& p, std::size_t index, std::size_t step) const {
    if (!p.active) return;
    if (p.words.size() >= budget_) {
      complete(p, stepper_.log_eos(p), 0.0);
      return;
    }
    WordStep next = stepper_.step(p, rng_, index, step);
    if (next.eos) {
      complete(p, next.log_p, next.log_q);
      return;
    }
    p.words.push_back(std::move(next.word));
    p.tokens.insert(p.tokens.end(), next.tokens.begin(), next.tokens.end());
    p.carry = std::move(next.carry);
    p.log_prior += next.log_p;
    p.log_proposal += next.log_q;
    if (p.log_weight == kLogZero) return;
    double shape = 0.0;
    if (shaper_) shape = shaper_->log_score(p.words, target_);
    p.log_weight += (next.log_p - next.log_q) + (shape - p.log_shape);
    p.log_shape = shape;
    if (std::isnan(p.log_weight)) p.log_weight = kLogZero;
  }

  void complete(Particle& p, double log_p, double log_q) const {
    p.log_prior += log_p;
    p.log_proposal += log_q;
    p.log_potential = potential_.log_likelihood(p.words, target_);
    if (p.log_weight != kLogZero) {
      p.log_weight += (log_p - log_q) + (p.log_potential - p.log_shape);
      if (std::isnan(p.log_weight)) p.log_weight = kLogZero;
    }
    p.active = false;
    p.carry.reset();
  }

  void finish(const std::vector<Particle>& particles, RunResult& result) const {
    result.particle_count = particles.size();
    result.tau = config_.tau;
    result.seed = config_.seed;
    std::vector<double> logs;
    for (const Particle& p : particles) logs.push_back(p.log_weight);
    const double total = log_sum_exp(logs);
    result.log_z_hat = total == kLogZero
                           ? kLogZero
                           : total - std::log(static_cast<double>(particles.size()));
    if (total == kLogZero) return;
    std::map<std::vector<std::string>, std::size_t> seen;
    for (const Particle& p : particles) {
      if (p.log_weight == kLogZero) continue;
      const double w = std::exp(p.log_weight - total);
      auto [it, fresh] = seen.emplace(p.words, result.support.size());
      if (fresh) {
        result.support.push_back({p.words, w, p.log_prior, p.log_potential});
      } else {
        result.support[it->second].weight += w;
      }
    }
  }

  const Stepper& stepper_;
  const Potential& potential_;
  const Shaper* shaper_;
  const TagSequence& target_;
  const RunConfig& config_;
  CounterRng rng_;
  std::size_t budget_;
};

}  // namespace

RunResult sis(const Stepper& stepper, const Potential& potential, const TagSequence& target,
              const RunConfig& config) {
  return Engine(stepper, potential, nullptr, target, config).run(false, "sis");
}

RunResult smc(const Stepper& stepper, const Potential& potential, const Shaper& shaper,
              const TagSequence& target, const RunConfig& config) {
  return Engine(stepper, potential, &shaper, target, config).run(true, "smc");
}

RunResult sis(const LanguageModel& lm, const Proposal& proposal, const Potential& potential,
              const TreeTemplate& tmpl, const RunConfig& config) {
  const WordStepper stepper(lm, proposal);
  const TagSequence target = encode(tmpl);
  return sis(stepper, potential, target, config);
}

RunResult smc(const LanguageModel& lm, const Proposal& proposal, const Potential& potential,
              const Shaper& shaper, const TreeTemplate& tmpl, const RunConfig& config) {
  const WordStepper stepper(lm, proposal);
  const TagSequence target = encode(tmpl);
  return smc(stepper, potential, shaper, target, config);
}

std::vector<std::vector<std::string>> sample_outputs(const RunResult& result, std::size_t k,
                                                     const CounterRng& rng) {
  if (result.support.empty()) {
    throw Error(ErrorCode::kDegenerateRun, "the run has no weighted support");
  }
  std::vector<double> cum;
  double run = 0.0;
  for (const SupportEntry& e : result.support) {
    run += e.weight;
    cum.push_back(run);
  }
  std::vector<std::vector<std::string>> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const double u = rng.uniform(CounterRng::Domain::kOutput, i) * run;
    auto it = std::upper_bound(cum.begin(), cum.end(), u);
    if (it == cum.end()) --it;
    out.push_back(result.support[static_cast<std::size_t>(it - cum.begin())].words);
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

json log_value(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double read_log(const json& v) { return v.is_null() ? kLogZero : v.get<double>(); }

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (const std::string& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

void write_run_jsonl(std::ostream& out, const RunResult& result,
                     std::span<const std::vector<std::string>> samples,
                     const json& header_extra) {
  json diagnostics = json::array();
  for (const StepDiagnostics& d : result.diagnostics) {
    diagnostics.push_back({{"step", d.step},
                           {"ess", d.ess},
                           {"resampled", d.resampled},
                           {"active", d.active_count}});
  }
  json header = {{"type", "header"},
                 {"method", result.method},
                 {"z_hat", result.z_hat()},
                 {"log_z_hat", log_value(result.log_z_hat)},
                 {"M", result.particle_count},
                 {"tau", result.tau},
                 {"seed", result.seed},
                 {"degenerate", result.degenerate()},
                 {"diagnostics", diagnostics}};
  header.update(header_extra);
  out << header.dump() << '\n';
  for (const auto& words : samples) {
    out << json{{"type", "sample"}, {"text", join_words(words)}, {"words", words}}.dump()
        << '\n';
  }
  for (const SupportEntry& e : result.support) {
    out << json{{"type", "support"},
                {"text", join_words(e.words)},
                {"words", e.words},
                {"weight", e.weight},
                {"logprior", log_value(e.log_prior)},
                {"logpotential", log_value(e.log_potential)}}
               .dump()
        << '\n';
  }
}

std::vector<RunRecord> read_run_jsonl(std::istream& in) {
  std::vector<RunRecord> runs;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json doc = json::parse(line);
      const std::string type = doc.at("type").get<std::string>();
      if (type == "header") {
        runs.push_back({doc, {}, {}});
        continue;
      }
      if (runs.empty()) throw Error(ErrorCode::kFormat, "record before any header", number);
      if (type == "sample") {
        runs.back().samples.push_back(doc.at("words").get<std::vector<std::string>>());
      } else if (type == "support") {
        runs.back().support.push_back({doc.at("words").get<std::vector<std::string>>(),
                                       doc.at("weight").get<double>(),
                                       read_log(doc.at("logprior")),
                                       read_log(doc.at("logpotential"))});
      } else {
        throw Error(ErrorCode::kFormat, "unknown record type '" + type + "'", number);
      }
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("run file: ") + e.what(), number);
    }
  }
  return runs;
}

}  // namespace syntax_smc
