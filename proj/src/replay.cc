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

#include "gbs/replay.h"

#include <sstream>

#include "gbs/orchestrator.h"

namespace gbs {
namespace {

std::string Describe(const RoundLog& round) {
  std::ostringstream out;
  out << "guesses [";
  for (size_t i = 0; i < round.guesses.size(); ++i) {
    out << (i ? "," : "") << round.guesses[i];
  }
  out << "] sum " << round.feedback.group_sum << " "
      << DirectionName(round.feedback.direction) << " by "
      << round.feedback.magnitude;
  return out.str();
}

// First round where the two games differ, or nullopt.
std::optional<std::pair<int, std::string>> FirstDivergence(const GameLog& expected,
                                                           const GameLog& actual) {
  const size_t n = std::min(expected.rounds.size(), actual.rounds.size());
  for (size_t r = 0; r < n; ++r) {
    const RoundLog& a = expected.rounds[r];
    const RoundLog& b = actual.rounds[r];
    if (a.guesses != b.guesses || !(a.feedback == b.feedback)) {
      return std::make_pair(a.round_index, "logged " + Describe(a) +
                                               ", replayed " + Describe(b));
    }
    for (size_t i = 0; i < a.rendered.size() && i < b.rendered.size(); ++i) {
      if (a.rendered[i] != b.rendered[i]) {
        return std::make_pair(a.round_index,
                              "rendered feedback for seat " + std::to_string(i) +
                                  " differs: logged \"" + a.rendered[i] +
                                  "\", replayed \"" + b.rendered[i] + "\"");
      }
    }
  }
  if (expected.rounds.size() != actual.rounds.size()) {
    const int at = static_cast<int>(n) + 1;
    return std::make_pair(at, "logged " + std::to_string(expected.rounds.size()) +
                                  " rounds, replayed " +
                                  std::to_string(actual.rounds.size()));
  }
  return std::nullopt;
}

}  // namespace

VerifyResult VerifyLog(const SessionLog& log) {
  VerifyResult result;
  const int n = log.meta.n_players;
  DefaultAgentFactory factory;
  std::vector<std::unique_ptr<Agent>> agents;
  std::vector<AgentContext> contexts;
  SessionConfig session;
  session.session_id = log.meta.session_id;
  for (int i = 0; i < n; ++i) {
    AgentSpec spec = log.meta.agents[i];
    spec.kind = AgentKind::kReplay;
    factory.SetTrace(spec.agent_id, AgentTrace(log, i));
    agents.push_back(factory.Make(spec, session));
    AgentContext ctx;
    ctx.variant = spec.prompt_variant;
    ctx.obs.seat_index = i;
    ctx.obs.n_players = n;
    ctx.obs.game_count = log.meta.game_count;
    contexts.push_back(std::move(ctx));
  }

  SessionLog replayed;
  replayed.meta = log.meta;
  int64_t tick = 0;
  auto clock = [&tick] { return tick++; };
  for (const GameLog& game : log.games) {
    GameConfig config = game.config;
    if (log.meta.source == "external" && game.status == GameStatus::kExhausted &&
        static_cast<int>(game.rounds.size()) < config.max_rounds) {
      config.max_rounds = static_cast<int>(game.rounds.size());
    }
    std::string error;
    try {
      RunGame(config, game.target, game.game_index, agents, contexts, replayed,
              RunOptions{}, clock);
    } catch (const Error& e) {
      error = e.what();
    }
    const GameLog& actual = replayed.games.back();
    result.game_index = game.game_index;
    if (auto diverged = FirstDivergence(game, actual)) {
      if (error.empty() || diverged->first <= static_cast<int>(actual.rounds.size())) {
        result.round_index = diverged->first;
        result.detail = diverged->second;
        if (!error.empty()) result.detail += "; " + error;
        return result;
      }
    }
    if (!error.empty()) {
      result.round_index = static_cast<int>(actual.rounds.size()) + 1;
      result.detail = error;
      return result;
    }
    if (game.status != actual.status) {
      result.detail = std::string("status logged ") +
                      std::string(GameStatusName(game.status)) + ", replayed " +
                      std::string(GameStatusName(actual.status));
      return result;
    }
    ++result.games_checked;
    result.rounds_checked += static_cast<int>(game.rounds.size());
  }
  result.game_index.reset();
  if (!log.complete) {
    result.detail = "log is incomplete (no session_end)";
    return result;
  }
  result.ok = true;
  return result;
}

}  // namespace gbs
