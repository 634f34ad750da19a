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

#include "syntax_smc/remote.h"

#include <cctype>
#include <cmath>

#include "httplib.h"
#include "syntax_smc/error.h"
#include "syntax_smc/logmath.h"

namespace syntax_smc {

using nlohmann::json;

namespace {

[[noreturn]] void remote_error(const std::string& what) {
  throw Error(ErrorCode::kRemote, what);
}

// Log-probabilities arrive as numbers or decimal strings.
double read_logprob(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "-inf" || s == "-Infinity" || s == "-infinity") return kLogZero;
    std::size_t used = 0;
    double out = 0.0;
    try {
      out = std::stod(s, &used);
    } catch (const std::exception&) {
      remote_error("bad log-probability '" + s + "'");
    }
    if (used != s.size()) remote_error("bad log-probability '" + s + "'");
    return out;
  }
  if (v.is_null()) return kLogZero;
  remote_error("log-probability must be a number or string");
}

json token_list(std::span<const TokenId> tokens) {
  return json(std::vector<TokenId>(tokens.begin(), tokens.end()));
}

std::map<std::string, double> read_tag_map(const json& v, double tolerance) {
  std::map<std::string, double> out;
  double mass = 0.0;
  for (const auto& [tag, lp] : v.items()) {
    out[tag] = read_logprob(lp);
    mass += std::exp(out[tag]);
  }
  if (std::abs(mass - 1.0) > tolerance) {
    remote_error("tag distribution sums to " + std::to_string(mass));
  }
  return out;
}

std::string replay_key(const std::string& endpoint, const json& request) {
  return endpoint + '\n' + request.dump();
}

}  // namespace

// ---------------------------------------------------------------------------
// Transports

HttpTransport::HttpTransport(std::string base_url, double timeout_seconds)
    : base_url_(std::move(base_url)), timeout_(timeout_seconds) {}

json HttpTransport::post(const std::string& endpoint, const json& body) const {
  httplib::Client client(base_url_);
  if (!client.is_valid()) remote_error("invalid service URL '" + base_url_ + "'");
  const auto secs = static_cast<time_t>(timeout_);
  const auto usecs = static_cast<time_t>((timeout_ - static_cast<double>(secs)) * 1e6);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  const auto res = client.Post(endpoint, body.dump(), "application/json");
  if (!res) {
    remote_error("request to " + base_url_ + endpoint + " failed: " +
                 httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    remote_error(endpoint + " returned HTTP " + std::to_string(res->status) + ": " +
                 res->body);
  }
  try {
    return json::parse(res->body);
  } catch (const json::exception& e) {
    remote_error(endpoint + " returned malformed JSON: " + e.what());
  }
}

ReplayTransport ReplayTransport::from_jsonl(std::istream& in) {
  ReplayTransport t;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json doc = json::parse(line);
      t.add(doc.at("endpoint").get<std::string>(), doc.at("request"), doc.at("response"));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kFormat, std::string("fixture: ") + e.what(), number);
    }
  }
  return t;
}

void ReplayTransport::add(const std::string& endpoint, const json& request,
                          const json& response) {
  replies_[replay_key(endpoint, request)] = response;
}

json ReplayTransport::post(const std::string& endpoint, const json& body) const {
  const auto it = replies_.find(replay_key(endpoint, body));
  if (it == replies_.end()) remote_error("no recorded reply for " + endpoint + " " + body.dump());
  return it->second;
}

// ---------------------------------------------------------------------------
// Client

std::optional<double> NextTokenReply::find(TokenId id) const {
  for (const TopToken& t : top) {
    if (t.id == id) return t.logprob;
  }
  return std::nullopt;
}

NextTokenReply RemoteLM::next_token(std::span<const TokenId> prefix) const {
  const json reply = transport_->post("/v1/next_token", {{"prefix_tokens", token_list(prefix)}});
  NextTokenReply out;
  try {
    for (const json& entry : reply.at("top")) {
      if (!entry.is_array() || entry.size() < 2 || entry.size() > 3) {
        remote_error("top entries must be [id, logprob] or [id, logprob, text]");
      }
      TopToken t;
      t.id = entry[0].get<TokenId>();
      t.logprob = read_logprob(entry[1]);
      if (entry.size() == 3) t.text = entry[2].get<std::string>();
      out.top.push_back(std::move(t));
    }
    out.eos_logprob = read_logprob(reply.at("eos_logprob"));
    out.other_mass_logprob = read_logprob(reply.at("other_mass_logprob"));
  } catch (const json::exception& e) {
    remote_error(std::string("next_token reply: ") + e.what());
  }
  double mass = std::exp(out.eos_logprob) + std::exp(out.other_mass_logprob);
  for (const TopToken& t : out.top) mass += std::exp(t.logprob);
  if (std::abs(mass - 1.0) > options_.mass_tolerance) {
    remote_error("next_token mass sums to " + std::to_string(mass));
  }
  return out;
}

double RemoteLM::score(std::span<const TokenId> prefix, TokenId token) const {
  const json reply = transport_->post(
      "/v1/score", {{"prefix_tokens", token_list(prefix)}, {"token_id", token}});
  try {
    return read_logprob(reply.at("logprob"));
  } catch (const json::exception& e) {
    remote_error(std::string("score reply: ") + e.what());
  }
}

double RemoteLM::token_logprob(std::span<const TokenId> prefix, TokenId token) const {
  if (const auto hit = next_token(prefix).find(token)) return *hit;
  return score(prefix, token);
}

TagReply RemoteLM::tags(std::span<const TokenId> prefix) const {
  const json reply = transport_->post("/v1/tags", {{"prefix_tokens", token_list(prefix)}});
  try {
    return {read_tag_map(reply.at("odd"), options_.mass_tolerance),
            read_tag_map(reply.at("even"), options_.mass_tolerance)};
  } catch (const json::exception& e) {
    remote_error(std::string("tags reply: ") + e.what());
  }
}

TokenizeReply RemoteLM::tokenize(std::string_view text) const {
  const json reply = transport_->post("/v1/tokenize", {{"text", std::string(text)}});
  try {
    TokenizeReply out{reply.at("tokens").get<std::vector<TokenId>>(),
                      reply.at("word_ends").get<std::vector<bool>>()};
    if (out.tokens.size() != out.word_ends.size()) {
      remote_error("tokenize reply: tokens and word_ends differ in length");
    }
    return out;
  } catch (const json::exception& e) {
    remote_error(std::string("tokenize reply: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Word stepping

namespace {

std::size_t boundary_width(std::string_view text) {
  if (text.empty()) return 0;
  if (std::isspace(static_cast<unsigned char>(text.front()))) return 1;
  if (text.starts_with("\xC4\xA0")) return 2;      // Ġ
  if (text.starts_with("\xE2\x96\x81")) return 3;  // ▁
  return 0;
}

}  // namespace

bool starts_new_word(std::string_view text) { return boundary_width(text) > 0; }

std::string strip_boundary(std::string_view text) {
  while (const std::size_t w = boundary_width(text)) text.remove_prefix(w);
  return std::string(text);
}

AdvanceResult advance_word(const TokenSampler& sample, std::span<const TokenId> prefix,
                           std::optional<CarryToken> carry, bool word_level,
                           std::size_t max_tokens) {
  AdvanceResult out;
  std::vector<TokenId> context(prefix.begin(), prefix.end());
  std::size_t draw = 0;
  CarryToken next = carry ? std::move(*carry) : sample(context, draw++);
  auto take = [&](const CarryToken& t) {
    out.log_p += t.log_p;
    out.log_q += t.log_q;
    out.log_ratios.push_back(t.log_p - t.log_q);
  };
  if (next.eos) {
    take(next);
    out.eos = true;
    return out;
  }
  for (;;) {
    take(next);
    out.tokens.push_back(next.id);
    context.push_back(next.id);
    out.word += out.word.empty() ? strip_boundary(next.text) : next.text;
    if (word_level) return out;
    next = sample(context, draw++);
    // Boundary tokens that carry no text yet still belong to this word.
    if (next.eos || (starts_new_word(next.text) && !out.word.empty())) {
      out.carry = std::move(next);
      return out;
    }
    if (out.tokens.size() >= max_tokens) {
      throw Error(ErrorCode::kBoundaryUndetected,
                  "no word boundary after " + std::to_string(max_tokens) + " tokens");
    }
  }
}

WordStep RemoteStepper::step(const Particle& particle, const CounterRng& rng,
                             std::size_t index, std::size_t step) const {
  const TokenSampler sampler = [&](std::span<const TokenId> prefix, std::size_t draw) {
    const NextTokenReply reply = lm_.next_token(prefix);
    std::vector<double> logs;
    for (const TopToken& t : reply.top) logs.push_back(t.logprob);
    logs.push_back(reply.eos_logprob);
    const double total = log_sum_exp(logs);
    if (total == kLogZero) remote_error("next_token reply has no sampleable mass");
    const double u = rng.uniform(CounterRng::Domain::kPropose, index, step, draw);
    double cum = 0.0;
    std::size_t pick = logs.size() - 1;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      if (logs[i] == kLogZero) continue;
      cum += std::exp(logs[i] - total);
      pick = i;
      if (u < cum) break;
    }
    CarryToken t;
    t.log_p = logs[pick];
    t.log_q = logs[pick] - total;
    if (pick == reply.top.size()) {
      t.eos = true;
    } else {
      t.id = reply.top[pick].id;
      t.text = reply.top[pick].text;
    }
    return t;
  };
  const AdvanceResult r = advance_word(sampler, particle.tokens, particle.carry,
                                       lm_.options().word_level,
                                       lm_.options().max_tokens_per_word);
  WordStep out;
  out.eos = r.eos;
  out.word = r.word;
  out.tokens = r.tokens;
  out.log_p = r.log_p;
  out.log_q = r.log_q;
  out.carry = r.carry;
  return out;
}

double RemoteStepper::log_eos(const Particle& particle) const {
  return lm_.next_token(particle.tokens).eos_logprob;
}

std::pair<double, double> RemoteTagger::slot_logprobs(std::span<const std::string> words,
                                                      std::size_t index,
                                                      std::string_view leaf_tag,
                                                      std::string_view internal_tag) const {
  std::string text;
  for (std::size_t i = 0; i <= index && i < words.size(); ++i) {
    if (i > 0) text += ' ';
    text += words[i];
  }
  const TokenizeReply tok = lm_.tokenize(text);
  std::size_t end = tok.tokens.size();
  std::size_t seen = 0;
  for (std::size_t t = 0; t < tok.word_ends.size(); ++t) {
    if (tok.word_ends[t] && seen++ == index) {
      end = t + 1;
      break;
    }
  }
  const TagReply reply =
      lm_.tags(std::span<const TokenId>(tok.tokens).first(end));
  auto lookup = [](const std::map<std::string, double>& m, std::string_view tag) {
    const auto it = m.find(std::string(tag));
    return it == m.end() ? kLogZero : it->second;
  };
  return {lookup(reply.odd, leaf_tag), lookup(reply.even, internal_tag)};
}

}  // namespace syntax_smc
