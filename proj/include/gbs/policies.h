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

#ifndef GBS_POLICIES_H_
#define GBS_POLICIES_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/common.h"
#include "gbs/game.h"
#include "gbs/gateway.h"
#include "gbs/prompts.h"

namespace gbs {

enum class AgentKind { kLlm, kScripted, kReplay, kHuman };

std::string_view AgentKindName(AgentKind kind);
AgentKind ParseAgentKind(std::string_view name);

struct AgentSpec {
  std::string agent_id;
  AgentKind kind = AgentKind::kScripted;
  std::optional<std::string> model_id;
  std::optional<double> temperature;
  // Unset seeds are derived from the session base seed.
  std::optional<int64_t> seed;
  PromptVariant prompt_variant = PromptVariant::kZeroShot;
  // Scripted policy name: proportional, stay_prone, bisection_follower,
  // uniform_random, constant.
  std::string policy;
  std::map<std::string, std::string> policy_params;

  void Validate() const;
  bool operator==(const AgentSpec&) const = default;
};

struct Decision {
  int guess = 0;
  std::optional<std::string> raw_text;
  int parse_attempts = 0;
  bool fallback = false;
  bool timed_out = false;
};

class Agent {
 public:
  explicit Agent(AgentSpec spec) : spec_(std::move(spec)) {}
  virtual ~Agent() = default;

  const AgentSpec& spec() const { return spec_; }

  virtual Decision Decide(const Observation& obs, const GameConfig& config) = 0;
  // Called once per finished game with the number of rounds played.
  virtual void OnGameEnd(int game_index, int rounds_played) {}

 private:
  AgentSpec spec_;
};

// Scripted decision rule. `seat_index` and obs.n_players drive the
// remainder rule of the collective proportional correction.
Decision DecideScripted(const AgentSpec& spec, const Observation& obs,
                        const GameConfig& config, Rng& rng);

// Per-agent correction for proportional(alpha) given the signed error
// (group_sum - target). With alpha == 1/n the integer remainder of |error|/n
// is spread one unit at a time over the lowest seats, so that n agents
// together correct by exactly -error.
int ProportionalCorrection(double alpha, int signed_error, int seat_index,
                           int n_players);

// Bisection over the agent's own guess using directional feedback from the
// current game.
int BisectionGuess(const Observation& obs, const GameConfig& config);

class ScriptedAgent : public Agent {
 public:
  explicit ScriptedAgent(AgentSpec spec);
  Decision Decide(const Observation& obs, const GameConfig& config) override;

 private:
  Rng rng_;
};

// Logged guesses per game (outer index game_index - 1).
using Trace = std::vector<std::vector<int>>;

Decision DecideReplay(const Trace& trace, const Observation& obs);

class ReplayAgent : public Agent {
 public:
  ReplayAgent(AgentSpec spec, Trace trace);
  Decision Decide(const Observation& obs, const GameConfig& config) override;
  // Throws TraceMismatch when the live game length differs from the trace.
  void OnGameEnd(int game_index, int rounds_played) override;

 private:
  Trace trace_;
};

struct LlmAgentOptions {
  int max_attempts = 3;
  std::optional<int> max_output_tokens;
};

// Prompt-driven agent. Replies that cannot be parsed are re-prompted with a
// format reminder; after max_attempts the agent clamps the last parsed but
// out-of-range value, or repeats its previous guess (midpoint in round 1),
// and flags the decision as a fallback.
class LlmAgent : public Agent {
 public:
  LlmAgent(AgentSpec spec, std::shared_ptr<CompletionService> service,
           LlmAgentOptions options = {});
  Decision Decide(const Observation& obs, const GameConfig& config) override;

 private:
  std::shared_ptr<CompletionService> service_;
  LlmAgentOptions options_;
};

// Mailbox between a live human player and the session thread. The service
// thread opens a round, the session thread blocks in Await, and the player's
// submission (or the deadline) releases it.
class HumanSeat {
 public:
  using Clock = std::chrono::steady_clock;

  // A zero timeout waits indefinitely.
  explicit HumanSeat(std::chrono::milliseconds round_timeout);

  void Open(int game_index, int round_index);
  // Errors: OutOfRange (via config check by caller), WrongRound,
  // AlreadySubmitted, LobbyNotRunning after Close().
  void Submit(int game_index, int round_index, int guess);
  Decision Await(const Observation& obs, const GameConfig& config);
  void Close();

  bool submitted() const;
  std::optional<Clock::time_point> deadline() const;
  std::chrono::milliseconds round_timeout() const { return round_timeout_; }

 private:
  std::chrono::milliseconds round_timeout_;
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int game_index_ = 0;
  int round_index_ = 0;
  std::optional<int> guess_;
  std::optional<Clock::time_point> deadline_;
  bool closed_ = false;
};

class HumanAgent : public Agent {
 public:
  HumanAgent(AgentSpec spec, std::shared_ptr<HumanSeat> seat);
  Decision Decide(const Observation& obs, const GameConfig& config) override;

 private:
  std::shared_ptr<HumanSeat> seat_;
};

}  // namespace gbs

#endif  // GBS_POLICIES_H_
