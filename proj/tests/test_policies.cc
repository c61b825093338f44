// Copyright 2026 The GBS Harness Authors.
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


#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "doctest.h"
#include "gbs/analytics.h"
#include "gbs/orchestrator.h"
#include "gbs/policies.h"
#include "gbs/report.h"
#include "support.h"

using namespace gbs;
using gbs::testing::Scripted;

namespace {

// A service that answers from a fixed script, in order.
class ScriptedReplies : public CompletionService {
 public:
  explicit ScriptedReplies(std::vector<std::string> replies)
      : replies_(std::move(replies)) {}
  CompletionResult Complete(const CompletionRequest& request) override {
    requests.push_back(request);
    CompletionResult r;
    r.text = replies_.at(std::min(next_++, replies_.size() - 1));
    return r;
  }
  std::vector<CompletionRequest> requests;

 private:
  std::vector<std::string> replies_;
  size_t next_ = 0;
};

Observation FirstRound(int n, int seat) {
  Observation obs;
  obs.n_players = n;
  obs.seat_index = seat;
  obs.own_guesses = {{}};
  obs.own_replies = {{}};
  obs.feedback_text = {{}};
  obs.feedback = {{}};
  return obs;
}

}  // namespace

TEST_SUITE("policies") {

TEST_CASE("remainder rule corrects the whole error collectively") {
  for (int n = 2; n <= 17; ++n) {
    for (int error = -60; error <= 60; ++error) {
      int total = 0;
      for (int seat = 0; seat < n; ++seat) {
        const int c = ProportionalCorrection(1.0 / n, error, seat, n);
        CHECK(std::abs(c) <= std::abs(error) / n + 1);
        total += c;
      }
      REQUIRE(total == -error);
    }
  }
  // Other alphas round per agent.
  CHECK(ProportionalCorrection(0.3, 10, 0, 2) == -3);
  CHECK(ProportionalCorrection(0.3, -10, 1, 2) == 3);
}

TEST_CASE("proportional oracle: n = 2..17, 100 targets each, always 2 rounds") {
  std::mt19937_64 gen(77);
  std::vector<SessionLog> logs;
  const auto start = std::chrono::steady_clock::now();
  for (int n = 2; n <= 17; ++n) {
    SessionConfig session;
    session.session_id = "n" + std::to_string(n);
    session.condition = "proportional";
    session.target_policy = TargetPolicy::kFixedList;
    for (int i = 0; i < n; ++i) {
      session.agents.push_back(Scripted(PlayerLetter(i), "proportional"));
    }
    std::uniform_int_distribution<int> target(25 * n + 1, 50 * n);
    for (int g = 0; g < 100; ++g) {
      session.games.push_back({FeedbackMode::kNumerical, target(gen)});
    }
    DefaultAgentFactory factory;
    logs.push_back(RunSession(session, factory));
    for (const GameLog& game : logs.back().games) {
      REQUIRE(game.status == GameStatus::kSolved);
      REQUIRE(RoundsToSolution(game) == 2);
    }
  }
  CHECK(std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count() < 5.0);

  AnalysisOptions options;
  options.bootstrap.iterations = 200;
  const MetricsReport report = ComputeMetrics(logs, options);
  for (const RoundsCell& cell : report.rounds_table) {
    CHECK(cell.across_runs.mean == 2.0);
    CHECK(cell.across_runs.sd == 0.0);
    CHECK(cell.across_games.sd == 0.0);
  }
  const std::string grid = RoundsGridCsv(report);
  CHECK(grid.find("2.00 (0.00)") != std::string::npos);
  CHECK(grid.find("2.00 (0.00)*") == std::string::npos);
}

TEST_CASE("bisection oracle: partner fixed at 25, targets 51-75, at most 6 rounds") {
  SessionConfig session;
  session.session_id = "bisect";
  session.target_policy = TargetPolicy::kFixedList;
  session.agents = {Scripted("A", "constant", {{"value", "25"}}),
                    Scripted("B", "bisection_follower")};
  for (int t = 51; t <= 75; ++t) session.games.push_back({FeedbackMode::kDirectional, t});
  DefaultAgentFactory factory;
  const SessionLog log = RunSession(session, factory);
  REQUIRE(log.games.size() == 25);
  const int bound = static_cast<int>(std::ceil(std::log2(51.0)));
  CHECK(bound == 6);
  for (const GameLog& game : log.games) {
    CAPTURE(game.target);
    CHECK(game.status == GameStatus::kSolved);
    CHECK(RoundsToSolution(game) <= bound);
  }
}

TEST_CASE("proportional needs magnitude unless told to bisect") {
  GameConfig config = GameConfig::ForPlayers(2, FeedbackMode::kDirectional);
  Observation obs = FirstRound(2, 0);
  obs.round_index = 2;
  obs.own_guesses = {{25}};
  obs.feedback = {{FeedbackView{Direction::kTooLow}}};
  Rng rng(1);
  try {
    DecideScripted(Scripted("A", "proportional"), obs, config, rng);
    FAIL("expected PolicyNeedsNumericalFeedback");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kPolicyNeedsNumericalFeedback);
  }
  const Decision d = DecideScripted(
      Scripted("A", "proportional", {{"on_directional", "bisection"}}), obs, config, rng);
  CHECK(d.guess == 38);  // midpoint of [26, 50]
}

TEST_CASE("stay_prone repeats at about the configured rate") {
  GameConfig config = GameConfig::ForPlayers(2, FeedbackMode::kNumerical);
  Observation obs = FirstRound(2, 0);
  obs.round_index = 2;
  obs.own_guesses = {{25}};
  obs.feedback = {{FeedbackView{Direction::kTooLow, 20}}};
  Rng rng(5);
  const AgentSpec spec = Scripted("A", "stay_prone", {{"p", "0.8"}});
  int stays = 0;
  for (int i = 0; i < 10000; ++i) {
    if (DecideScripted(spec, obs, config, rng).guess == 25) ++stays;
  }
  CHECK(stays / 10000.0 == doctest::Approx(0.8).epsilon(0.02));
}

TEST_CASE("unknown policies and bad parameters fail validation") {
  CHECK_THROWS_AS(Scripted("A", "psychic").Validate(), Error);
  CHECK_THROWS_AS(Scripted("A", "constant").Validate(), Error);
  CHECK_THROWS_AS(Scripted("A", "proportional", {{"alpha", "lots"}}).Validate(), Error);
  CHECK_NOTHROW(Scripted("A", "proportional", {{"alpha", "1/3"}}).Validate());
}

TEST_CASE("uniform_random stays in range and follows its seed") {
  GameConfig config = GameConfig::ForPlayers(3);
  AgentSpec spec = Scripted("A", "uniform_random");
  spec.seed = 9;
  ScriptedAgent a(spec), b(spec);
  const Observation obs = FirstRound(3, 0);
  for (int i = 0; i < 200; ++i) {
    const int x = a.Decide(obs, config).guess;
    CHECK(x == b.Decide(obs, config).guess);
    CHECK(config.InGuessRange(x));
  }
}

TEST_CASE("replay agent serves its trace and detects length mismatch") {
  ReplayAgent agent(Scripted("A", ""), Trace{{10, 20}});
  Observation obs = FirstRound(2, 0);
  CHECK(agent.Decide(obs, GameConfig::ForPlayers(2)).guess == 10);
  obs.round_index = 3;
  CHECK_THROWS_AS(agent.Decide(obs, GameConfig::ForPlayers(2)), Error);
  CHECK_NOTHROW(agent.OnGameEnd(1, 2));
  CHECK_THROWS_AS(agent.OnGameEnd(1, 3), Error);
}

TEST_CASE("llm agent parses, re-prompts and falls back") {
  AgentSpec spec;
  spec.agent_id = "A";
  spec.kind = AgentKind::kLlm;
  spec.model_id = "m";
  const GameConfig config = GameConfig::ForPlayers(2);
  const Observation obs = FirstRound(2, 0);

  SUBCASE("first reply parses") {
    auto service = std::make_shared<ScriptedReplies>(
        std::vector<std::string>{"Thinking... {\"chosen_number\": 31}"});
    LlmAgent agent(spec, service);
    const Decision d = agent.Decide(obs, config);
    CHECK(d.guess == 31);
    CHECK(d.parse_attempts == 1);
    CHECK_FALSE(d.fallback);
  }
  SUBCASE("re-prompt carries the failed reply and a reminder") {
    auto service = std::make_shared<ScriptedReplies>(
        std::vector<std::string>{"no idea", "{\"chosen_number\": 12}"});
    LlmAgent agent(spec, service);
    const Decision d = agent.Decide(obs, config);
    CHECK(d.guess == 12);
    CHECK(d.parse_attempts == 2);
    REQUIRE(service->requests.size() == 2);
    const MessageList& retry = service->requests[1].messages;
    CHECK(retry[retry.size() - 2].role == Role::kAssistant);
    CHECK(retry[retry.size() - 2].content == "no idea");
    CHECK(retry.back().role == Role::kUser);
  }
  SUBCASE("unusable replies fall back to the midpoint in round 1") {
    auto service = std::make_shared<ScriptedReplies>(std::vector<std::string>{"?"});
    LlmAgent agent(spec, service);
    const Decision d = agent.Decide(obs, config);
    CHECK(d.fallback);
    CHECK(d.parse_attempts == 3);
    CHECK(d.guess == 25);
  }
  SUBCASE("out-of-range values are clamped on fallback") {
    auto service = std::make_shared<ScriptedReplies>(
        std::vector<std::string>{"{\"chosen_number\": 70}"});
    LlmAgent agent(spec, service);
    const Decision d = agent.Decide(obs, config);
    CHECK(d.fallback);
    CHECK(d.guess == 50);
  }
  SUBCASE("fallback repeats the previous guess later in a game") {
    auto service = std::make_shared<ScriptedReplies>(std::vector<std::string>{"?"});
    LlmAgent agent(spec, service);
    Observation later = obs;
    later.round_index = 2;
    later.own_guesses = {{17}};
    later.own_replies = {{"{\"chosen_number\":17}"}};
    later.feedback_text = {{"x"}};
    later.feedback = {{FeedbackView{Direction::kTooLow}}};
    CHECK(agent.Decide(later, config).guess == 17);
  }
}

TEST_CASE("human seat: submit, duplicates, wrong round, timeout") {
  const GameConfig config = GameConfig::ForPlayers(2);
  Observation obs = FirstRound(2, 0);

  SUBCASE("submission releases the waiting session") {
    auto seat = std::make_shared<HumanSeat>(std::chrono::milliseconds(0));
    seat->Open(1, 1);
    std::thread player([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      seat->Submit(1, 1, 33);
    });
    const Decision d = seat->Await(obs, config);
    player.join();
    CHECK(d.guess == 33);
    CHECK_FALSE(d.timed_out);
    CHECK_THROWS_AS(seat->Submit(1, 1, 34), Error);
    CHECK_THROWS_AS(seat->Submit(1, 2, 34), Error);
  }
  SUBCASE("deadline substitutes the previous guess") {
    auto seat = std::make_shared<HumanSeat>(std::chrono::milliseconds(30));
    const Decision d = seat->Await(obs, config);
    CHECK(d.timed_out);
    CHECK(d.guess == 25);
    CHECK(seat->submitted());
  }
  SUBCASE("closing the seat aborts the wait") {
    auto seat = std::make_shared<HumanSeat>(std::chrono::milliseconds(0));
    std::thread closer([&] {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
      seat->Close();
    });
    CHECK_THROWS_AS(seat->Await(obs, config), Error);
    closer.join();
  }
}

}  // TEST_SUITE
