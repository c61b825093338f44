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

#ifndef GBS_ORCHESTRATOR_H_
#define GBS_ORCHESTRATOR_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gbs/game.h"
#include "gbs/gateway.h"
#include "gbs/log.h"
#include "gbs/policies.h"

namespace gbs {

enum class TargetPolicy { kScaledUniform, kFixedList };
std::string_view TargetPolicyName(TargetPolicy policy);
TargetPolicy ParseTargetPolicy(std::string_view name);

struct GameSpec {
  FeedbackMode mode = FeedbackMode::kDirectional;
  std::optional<int> target;

  bool operator==(const GameSpec&) const = default;
};

struct SessionConfig {
  std::string session_id;
  std::string condition;
  std::vector<AgentSpec> agents;
  // Explicit per-game list; when empty, game_count games alternate feedback
  // modes starting from first_feedback_mode.
  std::vector<GameSpec> games;
  uint64_t base_seed = 0;
  int game_count = 10;
  FeedbackMode first_feedback_mode = FeedbackMode::kDirectional;
  TargetPolicy target_policy = TargetPolicy::kScaledUniform;

  int guess_min = 0;
  int guess_max = 50;
  int max_rounds = 15;
  std::optional<int> target_min;
  std::optional<int> target_max;
  bool include_group_sum_in_feedback = false;

  // Labels copied into the log header.
  std::string experiment;
  int replication = 0;
  std::optional<SizeCategory> size_category;  // default by player count

  int n_players() const { return static_cast<int>(agents.size()); }
  std::vector<GameSpec> ResolvedGames() const;
  GameConfig GameConfigFor(FeedbackMode mode) const;
  // Throws Error(kInvalidConfig).
  void Validate() const;
};

// base_seed XOR (index+1)*0x9E3779B9, truncated to 31 bits.
int64_t DeriveAgentSeed(uint64_t base_seed, int agent_index);
// Fills unset agent seeds.
std::vector<AgentSpec> ResolveAgentSeeds(const SessionConfig& config);

struct ExperimentConfig {
  std::string name;
  std::vector<SessionConfig> sessions;
  int replications = 1;
  std::map<int, SizeCategory> size_categories;  // overrides by player count

  SizeCategory CategoryFor(int n_players) const;
  void Validate() const;
};

// The 18 group sizes of the reference experiment.
const std::vector<int>& ReferenceGroupSizes();

// Base seed for replication r; replication 0 keeps the configured seed.
uint64_t ReplicationSeed(uint64_t base_seed, int replication);

// Hooks called by the session loop. OnRoundStart fires before decisions are
// gathered; OnRound fires once the round is resolved (all guesses in).
class SessionObserver {
 public:
  virtual ~SessionObserver() = default;
  virtual void OnSessionStart(const SessionLog& log) {}
  virtual void OnGameStart(const GameLog& game) {}
  virtual void OnRoundStart(const GameLog& game, int round_index) {}
  virtual void OnRound(const GameLog& game, const RoundLog& round) {}
  virtual void OnGameEnd(const GameLog& game) {}
  virtual void OnSessionEnd(const SessionLog& log) {}
};

// Streams a session to a JSON-lines file.
class LogFileObserver : public SessionObserver {
 public:
  explicit LogFileObserver(const std::filesystem::path& path) : writer_(path) {}
  void OnSessionStart(const SessionLog& log) override { writer_.Header(log); }
  void OnGameStart(const GameLog& game) override { writer_.GameStart(game); }
  void OnRound(const GameLog& game, const RoundLog& round) override {
    writer_.Round(game, round);
  }
  void OnGameEnd(const GameLog& game) override { writer_.GameEnd(game); }
  void OnSessionEnd(const SessionLog& log) override { writer_.SessionEnd(log); }

 private:
  SessionLogWriter writer_;
};

enum class ClockKind { kWall, kLogical };

struct RunOptions {
  // Gather a round's decisions on separate threads.
  bool parallel_decisions = false;
  // kLogical stamps events with a per-session counter so logs are
  // reproducible byte for byte.
  ClockKind clock = ClockKind::kWall;
  size_t raw_text_cap = kDefaultRawTextCap;
  std::string source = "harness";  // log header provenance label
  std::vector<SessionObserver*> observers;
};

// Creates the agents of one session (specs already carry resolved seeds).
class AgentFactory {
 public:
  virtual ~AgentFactory() = default;
  virtual std::unique_ptr<Agent> Make(const AgentSpec& spec,
                                      const SessionConfig& session) = 0;
};

// Scripted agents out of the box; LLM agents when a completion service is
// supplied; replay agents from registered traces; human agents from
// registered seats.
class DefaultAgentFactory : public AgentFactory {
 public:
  using ServiceProvider =
      std::function<std::shared_ptr<CompletionService>(const SessionConfig&)>;

  DefaultAgentFactory() = default;
  explicit DefaultAgentFactory(ServiceProvider llm) : llm_(std::move(llm)) {}

  void SetTrace(const std::string& agent_id, Trace trace);
  void SetSeat(const std::string& agent_id, std::shared_ptr<HumanSeat> seat);
  LlmAgentOptions& llm_options() { return llm_options_; }

  std::unique_ptr<Agent> Make(const AgentSpec& spec,
                              const SessionConfig& session) override;

 private:
  ServiceProvider llm_;
  LlmAgentOptions llm_options_;
  std::map<std::string, Trace> traces_;
  std::map<std::string, std::shared_ptr<HumanSeat>> seats_;
};

// Per-agent accumulated view across the session.
struct AgentContext {
  Observation obs;
  PromptVariant variant = PromptVariant::kZeroShot;
};

// Plays one game to completion and appends it to `log`. Decisions for a
// round are all collected before the round is resolved. Agent exceptions
// become AgentFailure; the partial game stays in `log`.
void RunGame(const GameConfig& config, int target, int game_index,
             std::vector<std::unique_ptr<Agent>>& agents,
             std::vector<AgentContext>& contexts, SessionLog& log,
             const RunOptions& options, const std::function<int64_t()>& clock);

// Errors: propagates AgentFailure (partial log delivered to observers).
SessionLog RunSession(const SessionConfig& config, AgentFactory& factory,
                      const RunOptions& options = {});

struct SessionFailure {
  std::string session_id;
  std::string error;
};

struct ExperimentResult {
  std::vector<SessionLog> logs;  // completed sessions, manifest order
  std::vector<SessionFailure> failures;
};

struct ExperimentRunOptions {
  RunOptions run;
  int session_jobs = 1;
  // When set, each session streams to <out_dir>/<session_id>/log.jsonl and
  // <out_dir>/manifest.json lists every session and its outcome.
  std::optional<std::filesystem::path> out_dir;
};

// Expands replications (session ids gain an "-rN" suffix for N >= 1) and
// runs every session. Failures are isolated per session.
std::vector<SessionConfig> ExpandReplications(const ExperimentConfig& config);
ExperimentResult RunExperiment(
    const ExperimentConfig& config,
    const std::function<std::unique_ptr<AgentFactory>(const SessionConfig&)>&
        factory_for,
    const ExperimentRunOptions& options = {});

}  // namespace gbs

#endif  // GBS_ORCHESTRATOR_H_
