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

#include "gbs/orchestrator.h"

#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"

namespace gbs {
namespace {

constexpr uint64_t kTargetStream = 0x7461726765747321ULL;

Error InvalidConfig(const std::string& detail) {
  return Error(ErrorCode::kInvalidConfig, detail);
}

std::function<int64_t()> MakeClock(ClockKind kind) {
  if (kind == ClockKind::kLogical) {
    auto counter = std::make_shared<int64_t>(0);
    return [counter] { return (*counter)++; };
  }
  return [] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  };
}

template <typename F>
void Notify(const RunOptions& options, F&& f) {
  for (SessionObserver* observer : options.observers) f(*observer);
}

Decision DecideOrFail(Agent& agent, const Observation& obs,
                      const GameConfig& config) {
  try {
    return agent.Decide(obs, config);
  } catch (const Error& e) {
    throw Error(ErrorCode::kAgentFailure,
                agent.spec().agent_id + ": " + e.what());
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kAgentFailure,
                agent.spec().agent_id + ": " + e.what());
  }
}

}  // namespace

std::string_view TargetPolicyName(TargetPolicy policy) {
  return policy == TargetPolicy::kFixedList ? "fixed_list" : "scaled_uniform";
}

TargetPolicy ParseTargetPolicy(std::string_view name) {
  if (name == "scaled_uniform") return TargetPolicy::kScaledUniform;
  if (name == "fixed_list") return TargetPolicy::kFixedList;
  throw InvalidConfig("unknown target policy '" + std::string(name) + "'");
}

std::vector<GameSpec> SessionConfig::ResolvedGames() const {
  if (!games.empty()) return games;
  std::vector<GameSpec> out;
  FeedbackMode mode = first_feedback_mode;
  for (int g = 0; g < game_count; ++g) {
    out.push_back(GameSpec{mode, std::nullopt});
    mode = mode == FeedbackMode::kDirectional ? FeedbackMode::kNumerical
                                              : FeedbackMode::kDirectional;
  }
  return out;
}

GameConfig SessionConfig::GameConfigFor(FeedbackMode mode) const {
  GameConfig config =
      GameConfig::ForPlayers(n_players(), mode, guess_min, guess_max);
  config.max_rounds = max_rounds;
  if (target_min) config.target_min = *target_min;
  if (target_max) config.target_max = *target_max;
  config.include_group_sum_in_feedback = include_group_sum_in_feedback;
  return config;
}

void SessionConfig::Validate() const {
  if (session_id.empty()) throw InvalidConfig("session_id is empty");
  if (agents.empty()) throw InvalidConfig(session_id + ": no agents");
  std::set<std::string> ids;
  for (const AgentSpec& spec : agents) {
    spec.Validate();
    if (!ids.insert(spec.agent_id).second) {
      throw InvalidConfig(session_id + ": duplicate agent_id '" +
                          spec.agent_id + "'");
    }
  }
  if (games.empty() && (game_count < 2 || game_count % 2 != 0)) {
    throw InvalidConfig(session_id +
                        ": game_count must be a positive even number when "
                        "modes alternate");
  }
  GameConfigFor(FeedbackMode::kDirectional).Validate();
  if (target_policy == TargetPolicy::kFixedList) {
    if (games.empty()) {
      throw InvalidConfig(session_id + ": fixed_list needs an explicit games list");
    }
  }
  const auto resolved = ResolvedGames();
  for (size_t g = 0; g < resolved.size(); ++g) {
    const GameSpec& spec = resolved[g];
    if (target_policy == TargetPolicy::kFixedList && !spec.target) {
      throw InvalidConfig(session_id + ": game " + std::to_string(g + 1) +
                          " has no target under fixed_list");
    }
    if (spec.target) {
      GameConfig config = GameConfigFor(spec.mode);
      int lo = config.n_players * config.guess_min;
      int hi = config.n_players * config.guess_max;
      if (*spec.target < lo || *spec.target > hi) {
        throw InvalidConfig(session_id + ": game " + std::to_string(g + 1) +
                            " target " + std::to_string(*spec.target) +
                            " is not reachable");
      }
    }
  }
}

int64_t DeriveAgentSeed(uint64_t base_seed, int agent_index) {
  uint64_t mixed =
      base_seed ^ (static_cast<uint64_t>(agent_index + 1) * 0x9E3779B9ULL);
  return static_cast<int64_t>(mixed & 0x7FFFFFFFULL);
}

std::vector<AgentSpec> ResolveAgentSeeds(const SessionConfig& config) {
  std::vector<AgentSpec> out = config.agents;
  for (size_t i = 0; i < out.size(); ++i) {
    if (!out[i].seed) {
      out[i].seed = DeriveAgentSeed(config.base_seed, static_cast<int>(i));
    }
  }
  return out;
}

SizeCategory ExperimentConfig::CategoryFor(int n_players) const {
  auto it = size_categories.find(n_players);
  return it != size_categories.end() ? it->second
                                     : DefaultSizeCategory(n_players);
}

void ExperimentConfig::Validate() const {
  if (sessions.empty()) throw InvalidConfig("experiment has no sessions");
  if (replications < 1) throw InvalidConfig("replications must be >= 1");
  std::set<std::string> ids;
  for (const SessionConfig& session : sessions) {
    session.Validate();
    if (!ids.insert(session.session_id).second) {
      throw InvalidConfig("duplicate session_id '" + session.session_id + "'");
    }
  }
}

const std::vector<int>& ReferenceGroupSizes() {
  static const std::vector<int> sizes = {2, 2, 2, 2, 2, 2, 3,  3,  3,
                                         4, 4, 4, 6, 7, 10, 16, 17, 17};
  return sizes;
}

uint64_t ReplicationSeed(uint64_t base_seed, int replication) {
  if (replication == 0) return base_seed;
  return MixSeed(base_seed ^ MixSeed(static_cast<uint64_t>(replication)));
}

void DefaultAgentFactory::SetTrace(const std::string& agent_id, Trace trace) {
  traces_[agent_id] = std::move(trace);
}

void DefaultAgentFactory::SetSeat(const std::string& agent_id,
                                  std::shared_ptr<HumanSeat> seat) {
  seats_[agent_id] = std::move(seat);
}

std::unique_ptr<Agent> DefaultAgentFactory::Make(const AgentSpec& spec,
                                                 const SessionConfig& session) {
  switch (spec.kind) {
    case AgentKind::kScripted:
      return std::make_unique<ScriptedAgent>(spec);
    case AgentKind::kLlm: {
      if (!llm_) {
        throw InvalidConfig(spec.agent_id + ": no completion service for llm agents");
      }
      return std::make_unique<LlmAgent>(spec, llm_(session), llm_options_);
    }
    case AgentKind::kReplay: {
      auto it = traces_.find(spec.agent_id);
      if (it == traces_.end()) {
        throw InvalidConfig(spec.agent_id + ": no trace registered");
      }
      return std::make_unique<ReplayAgent>(spec, it->second);
    }
    case AgentKind::kHuman: {
      auto it = seats_.find(spec.agent_id);
      if (it == seats_.end()) {
        throw InvalidConfig(spec.agent_id + ": no seat registered");
      }
      return std::make_unique<HumanAgent>(spec, it->second);
    }
  }
  throw InvalidConfig("unknown agent kind");
}

void RunGame(const GameConfig& config, int target, int game_index,
             std::vector<std::unique_ptr<Agent>>& agents,
             std::vector<AgentContext>& contexts, SessionLog& log,
             const RunOptions& options, const std::function<int64_t()>& clock) {
  const size_t n = agents.size();
  std::vector<std::string> ids;
  for (const auto& agent : agents) ids.push_back(agent->spec().agent_id);
  GameState state(config, target, ids);

  GameLog started;
  started.game_index = game_index;
  started.config = config;
  started.target = target;
  started.started_at_ms = clock();
  log.games.push_back(started);
  GameLog& game = log.games.back();

  // Per-agent rendering: the strategy-sum variant always sees the sum.
  std::vector<GameConfig> shown(n, config);
  for (size_t i = 0; i < n; ++i) {
    AgentContext& ctx = contexts[i];
    if (ctx.variant == PromptVariant::kZeroShotStrategySum) {
      shown[i].include_group_sum_in_feedback = true;
    }
    ctx.obs.game_index = game_index;
    ctx.obs.round_index = 1;
    ctx.obs.feedback_mode = config.feedback_mode;
    ctx.obs.own_guesses.emplace_back();
    ctx.obs.own_replies.emplace_back();
    ctx.obs.feedback_text.emplace_back();
    ctx.obs.feedback.emplace_back();
  }
  Notify(options, [&](SessionObserver& o) { o.OnGameStart(game); });

  while (!state.terminal()) {
    const int r = state.next_round_index();
    for (AgentContext& ctx : contexts) ctx.obs.round_index = r;
    Notify(options, [&](SessionObserver& o) { o.OnRoundStart(game, r); });

    std::vector<Decision> decisions(n);
    if (options.parallel_decisions && n > 1) {
      std::vector<std::future<Decision>> futures;
      for (size_t i = 0; i < n; ++i) {
        futures.push_back(std::async(std::launch::async, [&, i] {
          return DecideOrFail(*agents[i], contexts[i].obs, config);
        }));
      }
      std::exception_ptr first;
      for (size_t i = 0; i < n; ++i) {
        try {
          decisions[i] = futures[i].get();
        } catch (...) {
          if (!first) first = std::current_exception();
        }
      }
      if (first) std::rethrow_exception(first);
    } else {
      for (size_t i = 0; i < n; ++i) {
        decisions[i] = DecideOrFail(*agents[i], contexts[i].obs, config);
      }
    }

    std::vector<int> guesses(n);
    for (size_t i = 0; i < n; ++i) {
      if (!config.InGuessRange(decisions[i].guess)) {
        throw Error(ErrorCode::kAgentFailure,
                    ids[i] + ": guess " + std::to_string(decisions[i].guess) +
                        " outside the guess range");
      }
      guesses[i] = decisions[i].guess;
    }
    const FeedbackSignal feedback = state.Resolve(guesses);

    RoundLog round;
    round.round_index = r;
    round.guesses = guesses;
    round.feedback = feedback;
    for (size_t i = 0; i < n; ++i) {
      const Decision& d = decisions[i];
      std::string text = RenderFeedback(feedback, shown[i], guesses[i]);
      round.rendered.push_back(text);

      DecisionRecord record;
      record.parse_attempts = d.parse_attempts;
      record.fallback = d.fallback;
      record.timed_out = d.timed_out;
      if (d.raw_text) {
        std::string raw = *d.raw_text;
        record.raw_truncated = CapRawText(raw, options.raw_text_cap);
        record.raw_text = std::move(raw);
      }
      round.decisions.push_back(std::move(record));

      FeedbackView view;
      view.direction = feedback.direction;
      if (config.feedback_mode == FeedbackMode::kNumerical) {
        view.magnitude = feedback.magnitude;
      }
      if (shown[i].include_group_sum_in_feedback) {
        view.group_sum = feedback.group_sum;
      }
      Observation& obs = contexts[i].obs;
      obs.own_guesses.back().push_back(guesses[i]);
      obs.own_replies.back().push_back(
          d.raw_text && !d.fallback ? *d.raw_text : std::string());
      obs.feedback_text.back().push_back(std::move(text));
      obs.feedback.back().push_back(view);
    }
    round.timestamp_ms = clock();
    game.rounds.push_back(std::move(round));
    Notify(options,
           [&](SessionObserver& o) { o.OnRound(game, game.rounds.back()); });
  }

  game.status = state.status();
  game.finished_at_ms = clock();
  const int played = static_cast<int>(game.rounds.size());
  for (auto& agent : agents) {
    try {
      agent->OnGameEnd(game_index, played);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kAgentFailure,
                  agent->spec().agent_id + ": " + e.what());
    }
  }
  Notify(options, [&](SessionObserver& o) { o.OnGameEnd(game); });
}

SessionLog RunSession(const SessionConfig& config, AgentFactory& factory,
                      const RunOptions& options) {
  config.Validate();
  const std::vector<AgentSpec> specs = ResolveAgentSeeds(config);
  const std::vector<GameSpec> games = config.ResolvedGames();
  auto clock = MakeClock(options.clock);

  SessionLog log;
  SessionMeta& meta = log.meta;
  meta.session_id = config.session_id;
  meta.experiment = config.experiment;
  meta.condition = config.condition;
  meta.source = options.source;
  meta.replication = config.replication;
  meta.base_seed = config.base_seed;
  meta.agents = specs;
  meta.n_players = config.n_players();
  meta.size_category =
      config.size_category.value_or(DefaultSizeCategory(config.n_players()));
  meta.game_count = static_cast<int>(games.size());

  SessionConfig resolved = config;
  resolved.agents = specs;
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<AgentContext> contexts;
  for (size_t i = 0; i < specs.size(); ++i) {
    agents.push_back(factory.Make(specs[i], resolved));
    AgentContext ctx;
    ctx.variant = specs[i].prompt_variant;
    ctx.obs.seat_index = static_cast<int>(i);
    ctx.obs.n_players = config.n_players();
    ctx.obs.game_count = meta.game_count;
    contexts.push_back(std::move(ctx));
  }

  meta.started_at_ms = clock();
  Notify(options, [&](SessionObserver& o) { o.OnSessionStart(log); });

  Rng target_rng(MixSeed(config.base_seed ^ kTargetStream));
  for (size_t g = 0; g < games.size(); ++g) {
    GameConfig game_config = config.GameConfigFor(games[g].mode);
    int target = games[g].target ? *games[g].target
                                 : SampleTarget(target_rng, game_config);
    RunGame(game_config, target, static_cast<int>(g) + 1, agents, contexts,
            log, options, clock);
  }

  log.complete = true;
  log.finished_at_ms = clock();
  Notify(options, [&](SessionObserver& o) { o.OnSessionEnd(log); });
  return log;
}

std::vector<SessionConfig> ExpandReplications(const ExperimentConfig& config) {
  std::vector<SessionConfig> out;
  for (int r = 0; r < config.replications; ++r) {
    for (const SessionConfig& base : config.sessions) {
      SessionConfig session = base;
      session.experiment = config.name;
      session.replication = r;
      if (!session.size_category) {
        session.size_category = config.CategoryFor(session.n_players());
      }
      if (r > 0) {
        session.session_id += "-r" + std::to_string(r);
        session.base_seed = ReplicationSeed(base.base_seed, r);
        for (AgentSpec& spec : session.agents) {
          if (spec.seed) {
            spec.seed = static_cast<int64_t>(
                (static_cast<uint64_t>(*spec.seed) ^
                 MixSeed(static_cast<uint64_t>(r))) &
                0x7FFFFFFFULL);
          }
        }
      }
      out.push_back(std::move(session));
    }
  }
  return out;
}

ExperimentResult RunExperiment(
    const ExperimentConfig& config,
    const std::function<std::unique_ptr<AgentFactory>(const SessionConfig&)>&
        factory_for,
    const ExperimentRunOptions& options) {
  config.Validate();
  const std::vector<SessionConfig> sessions = ExpandReplications(config);
  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    if (ec) {
      throw Error(ErrorCode::kSinkUnavailable,
                  options.out_dir->string() + ": " + ec.message());
    }
  }

  std::vector<std::optional<SessionLog>> logs(sessions.size());
  std::vector<std::string> errors(sessions.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t k = next++; k < sessions.size(); k = next++) {
      const SessionConfig& session = sessions[k];
      try {
        RunOptions run = options.run;
        std::unique_ptr<LogFileObserver> file;
        if (options.out_dir) {
          auto dir = *options.out_dir / session.session_id;
          std::filesystem::create_directories(dir);
          file = std::make_unique<LogFileObserver>(dir / "log.jsonl");
          run.observers.push_back(file.get());
        }
        auto factory = factory_for(session);
        logs[k] = RunSession(session, *factory, run);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int jobs = std::max(1, std::min<int>(options.session_jobs,
                                             static_cast<int>(sessions.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int j = 0; j < jobs; ++j) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }

  ExperimentResult result;
  nlohmann::json manifest;
  manifest["experiment"] = config.name;
  manifest["replications"] = config.replications;
  manifest["sessions"] = nlohmann::json::array();
  for (size_t k = 0; k < sessions.size(); ++k) {
    nlohmann::json entry;
    entry["session_id"] = sessions[k].session_id;
    entry["replication"] = sessions[k].replication;
    entry["path"] = sessions[k].session_id + "/log.jsonl";
    if (logs[k]) {
      entry["status"] = "ok";
      result.logs.push_back(std::move(*logs[k]));
    } else {
      entry["status"] = "failed";
      entry["error"] = errors[k];
      result.failures.push_back({sessions[k].session_id, errors[k]});
    }
    manifest["sessions"].push_back(std::move(entry));
  }
  if (options.out_dir) {
    std::ofstream out(*options.out_dir / "manifest.json");
    if (!out) {
      throw Error(ErrorCode::kSinkUnavailable,
                  (*options.out_dir / "manifest.json").string());
    }
    out << manifest.dump(2) << "\n";
  }
  return result;
}

}  // namespace gbs
