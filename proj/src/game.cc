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

#include "gbs/game.h"

#include <algorithm>
#include <cstdlib>
#include <numeric>
#include <set>

namespace gbs {

std::string_view FeedbackModeName(FeedbackMode mode) {
  return mode == FeedbackMode::kDirectional ? "directional" : "numerical";
}

FeedbackMode ParseFeedbackMode(std::string_view name) {
  if (name == "directional") return FeedbackMode::kDirectional;
  if (name == "numerical") return FeedbackMode::kNumerical;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown feedback mode '" + std::string(name) + "'");
}

std::string_view DirectionName(Direction direction) {
  switch (direction) {
    case Direction::kTooLow: return "too_low";
    case Direction::kTooHigh: return "too_high";
    case Direction::kJustRight: return "just_right";
  }
  return "";
}

Direction ParseDirection(std::string_view name) {
  if (name == "too_low") return Direction::kTooLow;
  if (name == "too_high") return Direction::kTooHigh;
  if (name == "just_right") return Direction::kJustRight;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown direction '" + std::string(name) + "'");
}

std::string_view GameStatusName(GameStatus status) {
  switch (status) {
    case GameStatus::kInProgress: return "in_progress";
    case GameStatus::kSolved: return "solved";
    case GameStatus::kExhausted: return "exhausted";
  }
  return "";
}

GameStatus ParseGameStatus(std::string_view name) {
  if (name == "in_progress") return GameStatus::kInProgress;
  if (name == "solved") return GameStatus::kSolved;
  if (name == "exhausted") return GameStatus::kExhausted;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown game status '" + std::string(name) + "'");
}

GameConfig GameConfig::ForPlayers(int n_players, FeedbackMode mode,
                                  int guess_min, int guess_max) {
  GameConfig config;
  config.n_players = n_players;
  config.guess_min = guess_min;
  config.guess_max = guess_max;
  config.target_min = n_players * (guess_min + guess_max) / 2 + 1;
  config.target_max = n_players * guess_max;
  config.feedback_mode = mode;
  return config;
}

void GameConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, what);
  };
  if (n_players < 1) fail("n_players must be positive");
  if (guess_min > guess_max) fail("guess_min > guess_max");
  if (target_min > target_max) fail("target_min > target_max");
  if (max_rounds < 1) fail("max_rounds must be at least 1");
  const long long lowest = static_cast<long long>(n_players) * guess_min;
  const long long highest = static_cast<long long>(n_players) * guess_max;
  if (target_min < lowest || target_max > highest) {
    fail("target range [" + std::to_string(target_min) + ", " +
         std::to_string(target_max) + "] not reachable by " +
         std::to_string(n_players) + " players guessing in [" +
         std::to_string(guess_min) + ", " + std::to_string(guess_max) + "]");
  }
}

int GameConfig::Midpoint() const {
  // round-half-up of (min+max)/2 for non-negative ranges
  const int sum = guess_min + guess_max;
  return sum >= 0 ? (sum + 1) / 2 : -((-sum) / 2);
}

FeedbackSignal ComputeFeedback(int group_sum, int target) {
  FeedbackSignal signal;
  signal.group_sum = group_sum;
  signal.magnitude = std::abs(group_sum - target);
  if (group_sum < target) {
    signal.direction = Direction::kTooLow;
  } else if (group_sum > target) {
    signal.direction = Direction::kTooHigh;
  } else {
    signal.direction = Direction::kJustRight;
    signal.solved = true;
  }
  return signal;
}

GameState::GameState(GameConfig config, int target,
                     std::vector<std::string> agent_ids)
    : config_(std::move(config)),
      agent_ids_(std::move(agent_ids)),
      target_(target) {
  config_.Validate();
  if (agent_ids_.empty()) agent_ids_ = DefaultAgentIds(config_.n_players);
  if (static_cast<int>(agent_ids_.size()) != config_.n_players) {
    throw Error(ErrorCode::kInvalidConfig,
                "agent id count does not match n_players");
  }
  if (std::set<std::string>(agent_ids_.begin(), agent_ids_.end()).size() !=
      agent_ids_.size()) {
    throw Error(ErrorCode::kInvalidConfig, "duplicate agent id");
  }
  if (target_ < config_.target_min || target_ > config_.target_max) {
    throw Error(ErrorCode::kInvalidConfig,
                "target " + std::to_string(target_) + " outside [" +
                    std::to_string(config_.target_min) + ", " +
                    std::to_string(config_.target_max) + "]");
  }
}

FeedbackSignal GameState::Resolve(const GuessMap& guesses) {
  if (terminal()) throw Error(ErrorCode::kGameAlreadyOver, "");
  for (const auto& [id, value] : guesses) {
    if (std::find(agent_ids_.begin(), agent_ids_.end(), id) ==
        agent_ids_.end()) {
      throw Error(ErrorCode::kUnknownAgent, id);
    }
  }
  std::vector<int> ordered;
  ordered.reserve(agent_ids_.size());
  for (const auto& id : agent_ids_) {
    auto it = guesses.find(id);
    if (it == guesses.end()) throw Error(ErrorCode::kMissingGuess, id);
    ordered.push_back(it->second);
  }
  return Resolve(ordered);
}

FeedbackSignal GameState::Resolve(const std::vector<int>& guesses) {
  if (terminal()) throw Error(ErrorCode::kGameAlreadyOver, "");
  if (guesses.size() < agent_ids_.size()) {
    throw Error(ErrorCode::kMissingGuess, agent_ids_[guesses.size()]);
  }
  if (guesses.size() > agent_ids_.size()) {
    throw Error(ErrorCode::kUnknownAgent,
                "more guesses than agents (" + std::to_string(guesses.size()) +
                    ")");
  }
  for (size_t i = 0; i < guesses.size(); ++i) {
    if (!config_.InGuessRange(guesses[i])) {
      throw Error(ErrorCode::kGuessOutOfRange,
                  agent_ids_[i] + " guessed " + std::to_string(guesses[i]));
    }
  }
  RoundRecord record;
  record.round_index = next_round_index();
  record.guesses = guesses;
  record.feedback = ComputeFeedback(
      std::accumulate(guesses.begin(), guesses.end(), 0), target_);
  rounds_.push_back(record);
  // Checked after summation so that a hit on the last round counts.
  if (record.feedback.solved) {
    status_ = GameStatus::kSolved;
  } else if (static_cast<int>(rounds_.size()) >= config_.max_rounds) {
    status_ = GameStatus::kExhausted;
  }
  return record.feedback;
}

std::pair<GameState, FeedbackSignal> ResolveRound(const GameState& state,
                                                  const GuessMap& guesses) {
  GameState next = state;
  FeedbackSignal signal = next.Resolve(guesses);
  return {std::move(next), signal};
}

int SampleTarget(Rng& rng, const GameConfig& config) {
  return static_cast<int>(rng.UniformInt(config.target_min, config.target_max));
}

std::string RenderFeedback(const FeedbackSignal& signal,
                           const GameConfig& config, int previous_own_guess) {
  std::string text = "In the previous round your choice was " +
                     std::to_string(previous_own_guess) +
                     " and the total sum of guesses by all players was ";
  if (config.include_group_sum_in_feedback) {
    text += std::to_string(signal.group_sum) + " which was ";
  }
  switch (signal.direction) {
    case Direction::kTooLow: text += "too low"; break;
    case Direction::kTooHigh: text += "too high"; break;
    case Direction::kJustRight: text += "just right"; break;
  }
  if (config.feedback_mode == FeedbackMode::kNumerical && !signal.solved) {
    text += " by " + std::to_string(signal.magnitude);
  }
  text += ".";
  return text;
}

std::string PlayerLetter(int seat_index) {
  std::string letter(1, static_cast<char>('A' + seat_index % 26));
  if (seat_index >= 26) letter += std::to_string(seat_index / 26);
  return letter;
}

std::vector<std::string> DefaultAgentIds(int n_players) {
  std::vector<std::string> ids;
  for (int i = 0; i < n_players; ++i) ids.push_back(PlayerLetter(i));
  return ids;
}

}  // namespace gbs
