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
#include <random>

#include "doctest.h"
#include "gbs/game.h"
#include "support.h"

using namespace gbs;
using gbs::testing::OracleFor;

TEST_SUITE("game") {

TEST_CASE("feedback follows the sum against the target") {
  CHECK(ComputeFeedback(40, 51).direction == Direction::kTooLow);
  CHECK(ComputeFeedback(40, 51).magnitude == 11);
  CHECK(ComputeFeedback(60, 51).direction == Direction::kTooHigh);
  CHECK(ComputeFeedback(51, 51).solved);
  CHECK(ComputeFeedback(51, 51).magnitude == 0);
  CHECK(ComputeFeedback(40, 51).SignedError() == -11);
}

TEST_CASE("default target range scales with the group") {
  for (int n = 2; n <= 17; ++n) {
    const GameConfig c = GameConfig::ForPlayers(n);
    CHECK(c.target_min == 25 * n + 1);
    CHECK(c.target_max == 50 * n);
    CHECK(c.max_rounds == 15);
    CHECK(c.Midpoint() == 25);
  }
}

TEST_CASE("invalid configurations are rejected") {
  GameConfig c = GameConfig::ForPlayers(2);
  c.max_rounds = 0;
  CHECK_THROWS_AS(c.Validate(), Error);
  c = GameConfig::ForPlayers(2);
  c.target_max = 101;  // unreachable with two guesses of at most 50
  CHECK_THROWS_AS(c.Validate(), Error);
  c = GameConfig::ForPlayers(2);
  c.guess_min = 60;
  CHECK_THROWS_AS(c.Validate(), Error);
}

TEST_CASE("resolve errors leave the state untouched") {
  GameState state(GameConfig::ForPlayers(2), 60);
  auto code_of = [&](auto&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInvalidConfig;
  };
  CHECK(code_of([&] { state.Resolve(std::vector<int>{10, 51}); }) ==
        ErrorCode::kGuessOutOfRange);
  CHECK(code_of([&] { state.Resolve(GuessMap{{"A", 10}}); }) ==
        ErrorCode::kMissingGuess);
  CHECK(code_of([&] { state.Resolve(GuessMap{{"A", 10}, {"B", 1}, {"C", 1}}); }) ==
        ErrorCode::kUnknownAgent);
  CHECK(state.rounds().empty());
  state.Resolve(std::vector<int>{30, 30});
  CHECK(state.status() == GameStatus::kSolved);
  CHECK(code_of([&] { state.Resolve(std::vector<int>{30, 30}); }) ==
        ErrorCode::kGameAlreadyOver);
}

TEST_CASE("pure resolve does not mutate its input") {
  GameState state(GameConfig::ForPlayers(2), 60);
  auto [next, feedback] = ResolveRound(state, {{"A", 20}, {"B", 20}});
  CHECK(state.rounds().empty());
  CHECK(next.rounds().size() == 1);
  CHECK(feedback.magnitude == 20);
}

TEST_CASE("rendered feedback text") {
  GameConfig c = GameConfig::ForPlayers(2, FeedbackMode::kDirectional);
  CHECK(RenderFeedback(ComputeFeedback(50, 60), c, 25) ==
        "In the previous round your choice was 25 and the total sum of guesses "
        "by all players was too low.");
  c.feedback_mode = FeedbackMode::kNumerical;
  CHECK(RenderFeedback(ComputeFeedback(70, 60), c, 35) ==
        "In the previous round your choice was 35 and the total sum of guesses "
        "by all players was too high by 10.");
  c.feedback_mode = FeedbackMode::kDirectional;
  c.include_group_sum_in_feedback = true;
  CHECK(RenderFeedback(ComputeFeedback(50, 60), c, 25) ==
        "In the previous round your choice was 25 and the total sum of guesses "
        "by all players was 50 which was too low.");
}

TEST_CASE("player letters") {
  CHECK(PlayerLetter(0) == "A");
  CHECK(PlayerLetter(25) == "Z");
  CHECK(PlayerLetter(26) == "A1");
  CHECK(DefaultAgentIds(3) == std::vector<std::string>{"A", "B", "C"});
}

TEST_CASE("property suite: 10000 random games against an independent oracle") {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20260101);
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(gen);
  };
  int solved = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int n = pick(2, 17);
    const int gmin = pick(0, 3);
    const int gmax = pick(gmin + 5, 60);
    GameConfig config = GameConfig::ForPlayers(
        n, pick(0, 1) ? FeedbackMode::kNumerical : FeedbackMode::kDirectional,
        gmin, gmax);
    config.max_rounds = pick(1, 15);
    Rng target_rng(gen());
    const int target = SampleTarget(target_rng, config);
    REQUIRE(target >= config.target_min);
    REQUIRE(target <= config.target_max);

    GameState state(config, target);
    int rounds = 0;
    bool oracle_solved = false;
    while (!state.terminal()) {
      std::vector<int> guesses(n);
      // Mostly random, sometimes an exact hit to exercise solving.
      const bool aim = pick(0, 5) == 0;
      int remaining = target;
      for (int i = 0; i < n; ++i) {
        if (aim) {
          const int left = n - i - 1;
          const int lo = std::max(gmin, remaining - left * gmax);
          const int hi = std::min(gmax, remaining - left * gmin);
          guesses[i] = pick(lo, hi);
          remaining -= guesses[i];
        } else {
          guesses[i] = pick(gmin, gmax);
        }
      }
      const auto expected = OracleFor(guesses, target);
      const FeedbackSignal got = state.Resolve(guesses);
      ++rounds;
      REQUIRE(std::string(DirectionName(got.direction)) == expected.direction);
      REQUIRE(got.magnitude == expected.magnitude);
      REQUIRE(got.solved == expected.solved);
      oracle_solved = expected.solved;
      if (expected.solved) break;
    }
    REQUIRE(state.terminal());
    REQUIRE(rounds <= config.max_rounds);
    REQUIRE(rounds <= 15);
    if (oracle_solved) {
      ++solved;
      REQUIRE(state.status() == GameStatus::kSolved);
    } else {
      REQUIRE(rounds == config.max_rounds);
      REQUIRE(state.status() == GameStatus::kExhausted);
    }
  }
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CHECK(solved > 0);
  CHECK(seconds < 10.0);
}

TEST_CASE("rng bounded draws are deterministic and in range") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) {
    const auto x = a.UniformInt(3, 9);
    CHECK(x == b.UniformInt(3, 9));
    CHECK(x >= 3);
    CHECK(x <= 9);
  }
  CHECK(MixSeed(1) != MixSeed(2));
}

}  // TEST_SUITE
