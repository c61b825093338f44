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

#ifndef GBS_GAME_H_
#define GBS_GAME_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gbs/common.h"

// Group Binary Search engine. Every player submits an integer each round;
// the group sum is compared against a hidden target and all players get the
// same feedback. A game ends on an exact hit or after max_rounds.
namespace gbs {

enum class FeedbackMode { kDirectional, kNumerical };
enum class Direction { kTooLow, kTooHigh, kJustRight };
enum class GameStatus { kInProgress, kSolved, kExhausted };

std::string_view FeedbackModeName(FeedbackMode mode);  // "directional", ...
FeedbackMode ParseFeedbackMode(std::string_view name);
std::string_view DirectionName(Direction direction);  // "too_low", ...
Direction ParseDirection(std::string_view name);
std::string_view GameStatusName(GameStatus status);
GameStatus ParseGameStatus(std::string_view name);

struct GameConfig {
  int n_players = 2;
  int guess_min = 0;
  int guess_max = 50;
  int target_min = 51;
  int target_max = 100;
  int max_rounds = 15;
  FeedbackMode feedback_mode = FeedbackMode::kDirectional;
  bool include_group_sum_in_feedback = false;

  // Default target range [n*(gmin+gmax)/2 + 1, n*gmax]. With the standard
  // [0, 50] guess range this is [25n+1, 50n], i.e. [51, 100] for two players.
  static GameConfig ForPlayers(int n_players,
                               FeedbackMode mode = FeedbackMode::kDirectional,
                               int guess_min = 0, int guess_max = 50);

  // Throws Error(kInvalidConfig) when an invariant is violated.
  void Validate() const;

  int Midpoint() const;
  bool InGuessRange(int guess) const {
    return guess >= guess_min && guess <= guess_max;
  }

  bool operator==(const GameConfig&) const = default;
};

struct FeedbackSignal {
  Direction direction = Direction::kJustRight;
  // |group_sum - target|; always populated, even in directional mode.
  int magnitude = 0;
  int group_sum = 0;
  bool solved = false;

  // group_sum - target.
  int SignedError() const {
    return direction == Direction::kTooLow ? -magnitude : magnitude;
  }

  bool operator==(const FeedbackSignal&) const = default;
};

FeedbackSignal ComputeFeedback(int group_sum, int target);

struct RoundRecord {
  int round_index = 0;  // 1-based
  // Guesses in agent order (aligned with GameState::agent_ids).
  std::vector<int> guesses;
  FeedbackSignal feedback;

  bool operator==(const RoundRecord&) const = default;
};

// Guesses keyed by agent id.
using GuessMap = std::map<std::string, int>;

class GameState {
 public:
  // Agent ids default to "A", "B", ... when empty.
  GameState(GameConfig config, int target,
            std::vector<std::string> agent_ids = {});

  const GameConfig& config() const { return config_; }
  const std::vector<std::string>& agent_ids() const { return agent_ids_; }
  int target() const { return target_; }
  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  GameStatus status() const { return status_; }
  bool terminal() const { return status_ != GameStatus::kInProgress; }
  int next_round_index() const { return static_cast<int>(rounds_.size()) + 1; }

  // Applies one round in place. Errors: GuessOutOfRange, MissingGuess,
  // UnknownAgent, GameAlreadyOver. On error the state is unchanged.
  FeedbackSignal Resolve(const GuessMap& guesses);
  // Same, with guesses given in agent order.
  FeedbackSignal Resolve(const std::vector<int>& guesses);

 private:
  GameConfig config_;
  std::vector<std::string> agent_ids_;
  int target_;
  std::vector<RoundRecord> rounds_;
  GameStatus status_ = GameStatus::kInProgress;
};

// Pure variant: returns the successor state and the round's feedback.
std::pair<GameState, FeedbackSignal> ResolveRound(const GameState& state,
                                                  const GuessMap& guesses);

// Uniform target in [target_min, target_max].
int SampleTarget(Rng& rng, const GameConfig& config);

// The feedback sentence shown to one player after a round, e.g.
// "In the previous round your choice was 25 and the total sum of guesses by
// all players was too low by 34."
std::string RenderFeedback(const FeedbackSignal& signal,
                           const GameConfig& config, int previous_own_guess);

// Letters A..Z for the first 26 seats, then A1..Z1, A2.. and so on.
std::string PlayerLetter(int seat_index);
std::vector<std::string> DefaultAgentIds(int n_players);

}  // namespace gbs

#endif  // GBS_GAME_H_
