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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "syntax_smc/error.h"
#include "syntax_smc/remote.h"
#include "test_util.h"

using namespace syntax_smc;
using nlohmann::json;
using syntax_smc::testing::data_path;

namespace {

std::shared_ptr<const ReplayTransport> fixtures() {
  std::ifstream in(data_path("bridge_fixtures.jsonl"));
  REQUIRE(in.good());
  return std::make_shared<ReplayTransport>(ReplayTransport::from_jsonl(in));
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kFormat;
}

// Scripted sampler: hands out `script` in order, ignoring the prefix.
TokenSampler scripted(std::vector<CarryToken> script) {
  auto pos = std::make_shared<std::size_t>(0);
  return [script = std::move(script), pos](std::span<const TokenId>, std::size_t) {
    return script.at((*pos)++);
  };
}

CarryToken tok(TokenId id, std::string text, double lp, double lq) {
  return {id, std::move(text), lp, lq, false};
}

}  // namespace

TEST_CASE("word boundaries") {
  CHECK(starts_new_word(" the"));
  CHECK(starts_new_word("\xC4\xA0the"));
  CHECK(starts_new_word("\xE2\x96\x81the"));
  CHECK_FALSE(starts_new_word("s"));
  CHECK(strip_boundary("\xC4\xA0the") == "the");
  CHECK(strip_boundary(" the") == "the");
  CHECK(strip_boundary("ed") == "ed");
}

TEST_CASE("advance_word over a scripted transcript") {
  const std::vector<TokenId> prefix = {7};
  const auto r = advance_word(scripted({tok(0, "ch", -1.0, -1.5), tok(1, "ance", -0.5, -0.25),
                                        tok(2, " ", -2.0, -2.0)}),
                              prefix, std::nullopt, false);
  CHECK_FALSE(r.eos);
  CHECK(r.word == "chance");
  CHECK(r.tokens == std::vector<TokenId>{0, 1});
  REQUIRE(r.log_ratios.size() == 2);
  CHECK(r.log_ratios[0] == doctest::Approx(0.5));
  CHECK(r.log_ratios[1] == doctest::Approx(-0.25));
  CHECK(r.log_p - r.log_q == doctest::Approx(r.log_ratios[0] + r.log_ratios[1]));
  REQUIRE(r.carry.has_value());
  CHECK(r.carry->text == " ");

  // The carried look-ahead opens the next word.
  const auto next = advance_word(scripted({tok(3, "x", -1.0, -1.0), {0, "", -0.1, -0.2, true}}),
                                 prefix, tok(4, "\xC4\xA0the", -0.3, -0.3), false);
  CHECK(next.word == "thex");
  CHECK(next.log_ratios.size() == 2);
  CHECK(next.carry->eos);

  const auto one = advance_word(scripted({tok(5, "dog", -1.0, -1.0)}), prefix, std::nullopt, true);
  CHECK(one.word == "dog");
  CHECK(one.tokens.size() == 1);
  CHECK_FALSE(one.carry.has_value());

  const auto end = advance_word(scripted({{0, "", -0.7, -0.2, true}}), prefix, std::nullopt, false);
  CHECK(end.eos);
  CHECK(end.log_p == -0.7);

  std::vector<CarryToken> endless(10, tok(1, "a", -1, -1));
  CHECK(code_of([&] { advance_word(scripted(endless), prefix, std::nullopt, false, 4); }) ==
        ErrorCode::kBoundaryUndetected);
}

TEST_CASE("replayed protocol exchanges") {
  const auto transport = fixtures();
  CHECK(transport->size() == 48);
  const RemoteLM lm(transport);

  const NextTokenReply root = lm.next_token({});
  CHECK(root.top.size() == 2);
  CHECK(root.eos_logprob == kLogZero);
  double mass = std::exp(root.other_mass_logprob);
  for (const TopToken& t : root.top) mass += std::exp(t.logprob);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(starts_new_word(root.top[0].text));

  // Tokens outside the top list fall back to the score endpoint.
  for (TokenId t = 0; t < 8; ++t) {
    const double lp = lm.token_logprob({}, t);
    CHECK(std::isfinite(lp));
    if (const auto top = root.find(t)) CHECK(lp == *top);
    CHECK(lp == doctest::Approx(lm.score({}, t)));
  }

  const auto first = root.top[0];
  const std::vector<TokenId> one = {first.id};
  CHECK(lm.next_token(one).eos_logprob > kLogZero);
  const TokenizeReply tk = lm.tokenize(strip_boundary(first.text));
  CHECK(tk.tokens == one);
  CHECK(tk.word_ends == std::vector<bool>{true});
  const TagReply tags = lm.tags(one);
  CHECK(tags.odd.count("l/NP") == 1);
  CHECK(tags.even.count("DUMMY") == 1);

  CHECK(code_of([&] { lm.next_token(std::vector<TokenId>{7, 7, 7}); }) == ErrorCode::kRemote);
}

TEST_CASE("malformed replies are rejected") {
  auto t = std::make_shared<ReplayTransport>();
  t->add("/v1/next_token", {{"prefix_tokens", json::array()}},
         {{"top", {{0, -0.1, "a"}}}, {"eos_logprob", -5.0}, {"other_mass_logprob", -5.0}});
  t->add("/v1/next_token", {{"prefix_tokens", {0}}}, {{"top", "nope"}});
  const RemoteLM lm(t);
  CHECK(code_of([&] { lm.next_token({}); }) == ErrorCode::kRemote);
  CHECK(code_of([&] { lm.next_token(std::vector<TokenId>{0}); }) == ErrorCode::kRemote);
}

TEST_CASE("sis and smc over the replayed service") {
  const auto transport = fixtures();
  const RemoteLM lm(transport);
  const RemoteStepper stepper(lm);
  const auto tagger = std::make_shared<RemoteTagger>(lm);
  const FactoredPotential potential(tagger);
  const FactoredShaper shaper(tagger);
  const TagSequence target = encode(parse_bracketed(
      syntax_smc::testing::read_file(data_path("two_word.tree"))));
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RunConfig cfg;
    cfg.particles = 8;
    cfg.seed = seed;
    const RunResult a = sis(stepper, potential, target, cfg);
    const RunResult b = smc(stepper, potential, shaper, target, cfg);
    cfg.tau = 0.0;
    const RunResult c = smc(stepper, potential, shaper, target, cfg);
    for (const RunResult* r : {&a, &b, &c}) {
      CHECK_FALSE(r->degenerate());
      for (const SupportEntry& e : r->support) CHECK(e.words.size() == 2);
    }
    for (std::size_t i = 0; i < a.particles.size(); ++i) {
      CHECK(a.particles[i].words == c.particles[i].words);
      CHECK(std::exp(a.particles[i].log_weight) ==
            doctest::Approx(std::exp(c.particles[i].log_weight)));
    }
    for (const Particle& p : a.particles) {
      // Telescoped weight: log p - log q + log psi.
      if (p.log_potential == kLogZero) {
        CHECK(p.log_weight == kLogZero);
        continue;
      }
      CHECK(p.log_weight ==
            doctest::Approx(p.log_prior - p.log_proposal + p.log_potential).epsilon(1e-12));
    }
  }
}

TEST_CASE("http transport against an in-process server") {
  const auto replay = fixtures();
  httplib::Server server;
  server.Post(R"(/v1/.*)", [&](const httplib::Request& req, httplib::Response& res) {
    try {
      const json reply = replay->post(req.path, json::parse(req.body));
      res.set_content(reply.dump(), "application/json");
    } catch (const Error&) {
      res.status = 404;
    }
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  REQUIRE(port > 0);
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  const auto http = std::make_shared<HttpTransport>("http://127.0.0.1:" + std::to_string(port), 5.0);
  const RemoteLM remote(http);
  const RemoteLM local(replay);
  const NextTokenReply a = remote.next_token({});
  const NextTokenReply b = local.next_token({});
  REQUIRE(a.top.size() == b.top.size());
  for (std::size_t i = 0; i < a.top.size(); ++i) {
    CHECK(a.top[i].id == b.top[i].id);
    CHECK(a.top[i].logprob == b.top[i].logprob);
  }
  CHECK(code_of([&] { remote.next_token(std::vector<TokenId>{7, 7, 7}); }) == ErrorCode::kRemote);
  server.stop();
  worker.join();

  const RemoteLM dead(std::make_shared<HttpTransport>("http://127.0.0.1:1", 1.0));
  CHECK(code_of([&] { dead.next_token({}); }) == ErrorCode::kRemote);
}
