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

#include "gbs/policies.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace gbs {
namespace {

std::optional<double> NumericParam(const AgentSpec& spec,
                                   const std::string& key) {
  auto it = spec.policy_params.find(key);
  if (it == spec.policy_params.end()) return std::nullopt;
  const std::string& text = it->second;
  // Accept plain reals and fractions such as "1/2".
  const auto slash = text.find('/');
  char* end = nullptr;
  if (slash != std::string::npos) {
    const double num = std::strtod(text.substr(0, slash).c_str(), &end);
    const double den = std::strtod(text.substr(slash + 1).c_str(), &end);
    if (den == 0.0) {
      throw Error(ErrorCode::kInvalidConfig, key + " has zero denominator");
    }
    return num / den;
  }
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') {
    throw Error(ErrorCode::kInvalidConfig,
                "policy parameter " + key + "='" + text + "' is not a number");
  }
  return value;
}

std::string StringParam(const AgentSpec& spec, const std::string& key,
                        const std::string& fallback) {
  auto it = spec.policy_params.find(key);
  return it == spec.policy_params.end() ? fallback : it->second;
}

int Clamp(long long value, const GameConfig& config) {
  return static_cast<int>(std::clamp<long long>(value, config.guess_min,
                                                config.guess_max));
}

int ProportionalStep(const AgentSpec& spec, const Observation& obs,
                     const GameConfig& config) {
  const int previous = *obs.PreviousGuess();
  const FeedbackView feedback = *obs.PreviousFeedback();
  if (feedback.direction == Direction::kJustRight) return previous;
  if (!feedback.magnitude) {
    if (StringParam(spec, "on_directional", "error") == "bisection") {
      return BisectionGuess(obs, config);
    }
    throw Error(ErrorCode::kPolicyNeedsNumericalFeedback,
                spec.agent_id + " (" + spec.policy + ")");
  }
  const int signed_error = feedback.direction == Direction::kTooLow
                               ? -*feedback.magnitude
                               : *feedback.magnitude;
  const double alpha =
      NumericParam(spec, "alpha").value_or(1.0 / obs.n_players);
  return Clamp(static_cast<long long>(previous) +
                   ProportionalCorrection(alpha, signed_error, obs.seat_index,
                                          obs.n_players),
               config);
}

}  // namespace

std::string_view AgentKindName(AgentKind kind) {
  switch (kind) {
    case AgentKind::kLlm: return "llm";
    case AgentKind::kScripted: return "scripted";
    case AgentKind::kReplay: return "replay";
    case AgentKind::kHuman: return "human";
  }
  return "";
}

AgentKind ParseAgentKind(std::string_view name) {
  if (name == "llm") return AgentKind::kLlm;
  if (name == "scripted") return AgentKind::kScripted;
  if (name == "replay") return AgentKind::kReplay;
  if (name == "human") return AgentKind::kHuman;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown agent kind '" + std::string(name) + "'");
}

void AgentSpec::Validate() const {
  if (agent_id.empty()) throw Error(ErrorCode::kInvalidConfig, "empty agent id");
  if (kind == AgentKind::kLlm && (!model_id || model_id->empty())) {
    throw Error(ErrorCode::kInvalidConfig,
                "llm agent " + agent_id + " needs a model id");
  }
  if (kind == AgentKind::kScripted) {
    static const char* kKnown[] = {"proportional", "stay_prone",
                                   "bisection_follower", "uniform_random",
                                   "constant"};
    if (std::find(std::begin(kKnown), std::end(kKnown), policy) ==
        std::end(kKnown)) {
      throw Error(ErrorCode::kUnknownPolicy,
                  "'" + policy + "' for agent " + agent_id);
    }
    if (policy == "constant" && !policy_params.count("value")) {
      throw Error(ErrorCode::kInvalidConfig,
                  "constant policy for " + agent_id + " needs 'value'");
    }
    // Parse numeric parameters eagerly so bad values fail at load time.
    for (const char* key : {"alpha", "p", "value"}) NumericParam(*this, key);
  }
}

int ProportionalCorrection(double alpha, int signed_error, int seat_index,
                           int n_players) {
  if (signed_error == 0) return 0;
  const int sign = signed_error > 0 ? -1 : 1;
  const int error = std::abs(signed_error);
  if (n_players > 0 && std::abs(alpha * n_players - 1.0) < 1e-9) {
    const int share = error / n_players;
    const int extra = seat_index < error % n_players ? 1 : 0;
    return sign * (share + extra);
  }
  return sign * static_cast<int>(std::lround(alpha * error));
}

int BisectionGuess(const Observation& obs, const GameConfig& config) {
  int lo = config.guess_min;
  int hi = config.guess_max;
  if (static_cast<size_t>(obs.game_index) <= obs.own_guesses.size()) {
    const auto& guesses = obs.own_guesses[obs.game_index - 1];
    const auto& feedback = obs.feedback[obs.game_index - 1];
    for (size_t k = 0; k < guesses.size() && k < feedback.size(); ++k) {
      const int guess = guesses[k];
      const Direction direction = feedback[k].direction;
      if (direction == Direction::kJustRight) continue;
      int next_lo = lo;
      int next_hi = hi;
      if (direction == Direction::kTooLow) next_lo = std::max(lo, guess + 1);
      if (direction == Direction::kTooHigh) next_hi = std::min(hi, guess - 1);
      if (next_lo > next_hi) {
        // Partners moved; restart from the full range with this step only.
        next_lo = config.guess_min;
        next_hi = config.guess_max;
        if (direction == Direction::kTooLow) next_lo = guess + 1;
        if (direction == Direction::kTooHigh) next_hi = guess - 1;
      }
      lo = next_lo;
      hi = next_hi;
    }
  }
  return Clamp(lo + (static_cast<long long>(hi) - lo) / 2, config);
}

Decision DecideScripted(const AgentSpec& spec, const Observation& obs,
                        const GameConfig& config, Rng& rng) {
  Decision decision;
  const std::string& policy = spec.policy;
  const bool first_round = !obs.PreviousGuess().has_value();
  if (policy == "uniform_random") {
    decision.guess = static_cast<int>(
        rng.UniformInt(config.guess_min, config.guess_max));
  } else if (policy == "constant") {
    decision.guess = Clamp(std::llround(*NumericParam(spec, "value")), config);
  } else if (policy == "bisection_follower") {
    decision.guess = BisectionGuess(obs, config);
  } else if (policy == "proportional") {
    decision.guess =
        first_round ? config.Midpoint() : ProportionalStep(spec, obs, config);
  } else if (policy == "stay_prone") {
    if (first_round) {
      decision.guess = config.Midpoint();
    } else {
      const double p = NumericParam(spec, "p").value_or(0.5);
      decision.guess = rng.Bernoulli(p) ? *obs.PreviousGuess()
                                        : ProportionalStep(spec, obs, config);
    }
  } else {
    throw Error(ErrorCode::kUnknownPolicy, policy);
  }
  return decision;
}

ScriptedAgent::ScriptedAgent(AgentSpec spec)
    : Agent(std::move(spec)),
      rng_(static_cast<uint64_t>(this->spec().seed.value_or(0))) {
  this->spec().Validate();
}

Decision ScriptedAgent::Decide(const Observation& obs,
                               const GameConfig& config) {
  return DecideScripted(spec(), obs, config, rng_);
}

Decision DecideReplay(const Trace& trace, const Observation& obs) {
  const size_t game = static_cast<size_t>(obs.game_index - 1);
  const size_t round = static_cast<size_t>(obs.round_index - 1);
  if (game >= trace.size() || round >= trace[game].size()) {
    throw Error(ErrorCode::kTraceExhausted,
                "game " + std::to_string(obs.game_index) + " round " +
                    std::to_string(obs.round_index));
  }
  Decision decision;
  decision.guess = trace[game][round];
  return decision;
}

ReplayAgent::ReplayAgent(AgentSpec spec, Trace trace)
    : Agent(std::move(spec)), trace_(std::move(trace)) {}

Decision ReplayAgent::Decide(const Observation& obs, const GameConfig&) {
  return DecideReplay(trace_, obs);
}

void ReplayAgent::OnGameEnd(int game_index, int rounds_played) {
  const size_t game = static_cast<size_t>(game_index - 1);
  const int logged =
      game < trace_.size() ? static_cast<int>(trace_[game].size()) : 0;
  if (logged != rounds_played) {
    throw Error(ErrorCode::kTraceMismatch,
                "game " + std::to_string(game_index) + ": trace has " +
                    std::to_string(logged) + " rounds, live game played " +
                    std::to_string(rounds_played));
  }
}

LlmAgent::LlmAgent(AgentSpec spec, std::shared_ptr<CompletionService> service,
                   LlmAgentOptions options)
    : Agent(std::move(spec)),
      service_(std::move(service)),
      options_(options) {
  this->spec().Validate();
}

Decision LlmAgent::Decide(const Observation& obs, const GameConfig& config) {
  const MessageList base = BuildMessages(spec().prompt_variant, obs, config);
  CompletionRequest request;
  request.model_id = *spec().model_id;
  request.messages = base;
  request.temperature = spec().temperature;
  request.seed = spec().seed;
  request.max_output_tokens = options_.max_output_tokens;

  Decision decision;
  std::optional<long long> rejected;
  const int attempts = std::max(1, options_.max_attempts);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    CompletionResult result = service_->Complete(request);
    decision.raw_text = result.text;
    decision.parse_attempts = attempt;
    ChoiceParse parse = ParseChoice(result.text, config);
    if (parse.ok()) {
      decision.guess = *parse.value;
      return decision;
    }
    if (parse.rejected_value) rejected = parse.rejected_value;

    // Re-prompt: the failed reply followed by a one-line reminder.
    request.messages = base;
    if (request.messages.back().role == Role::kAssistant) {
      request.messages.back().content += " " + result.text;  // CoT prefill
    } else {
      request.messages.push_back({Role::kAssistant, result.text});
    }
    request.messages.push_back(
        {Role::kUser,
         FormatReminder(config, std::string(ErrorCodeName(parse.error)))});
  }
  decision.fallback = true;
  if (rejected) {
    decision.guess = Clamp(*rejected, config);
  } else {
    decision.guess = obs.PreviousGuess().value_or(config.Midpoint());
  }
  return decision;
}

HumanSeat::HumanSeat(std::chrono::milliseconds round_timeout)
    : round_timeout_(round_timeout) {}

void HumanSeat::Open(int game_index, int round_index) {
  {
    std::lock_guard lock(mutex_);
    game_index_ = game_index;
    round_index_ = round_index;
    guess_.reset();
    deadline_.reset();
    if (round_timeout_.count() > 0) deadline_ = Clock::now() + round_timeout_;
  }
  cv_.notify_all();
}

void HumanSeat::Submit(int game_index, int round_index, int guess) {
  {
    std::lock_guard lock(mutex_);
    if (closed_) throw Error(ErrorCode::kLobbyNotRunning, "seat closed");
    if (game_index != game_index_ || round_index != round_index_) {
      throw Error(ErrorCode::kWrongRound,
                  "open round is game " + std::to_string(game_index_) +
                      " round " + std::to_string(round_index_));
    }
    if (guess_) throw Error(ErrorCode::kAlreadySubmitted, "");
    guess_ = guess;
  }
  cv_.notify_all();
}

Decision HumanSeat::Await(const Observation& obs, const GameConfig& config) {
  std::unique_lock lock(mutex_);
  if (game_index_ != obs.game_index || round_index_ != obs.round_index) {
    lock.unlock();
    Open(obs.game_index, obs.round_index);
    lock.lock();
  }
  auto ready = [&] { return guess_.has_value() || closed_; };
  if (deadline_) {
    cv_.wait_until(lock, *deadline_, ready);
  } else {
    cv_.wait(lock, ready);
  }
  if (closed_ && !guess_) {
    throw Error(ErrorCode::kAgentFailure, "human seat closed");
  }
  Decision decision;
  if (guess_) {
    decision.guess = *guess_;
    return decision;
  }
  decision.guess = obs.PreviousGuess().value_or(config.Midpoint());
  decision.timed_out = true;
  guess_ = decision.guess;  // later submissions for this round are duplicates
  return decision;
}

void HumanSeat::Close() {
  {
    std::lock_guard lock(mutex_);
    closed_ = true;
  }
  cv_.notify_all();
}

bool HumanSeat::submitted() const {
  std::lock_guard lock(mutex_);
  return guess_.has_value();
}

std::optional<HumanSeat::Clock::time_point> HumanSeat::deadline() const {
  std::lock_guard lock(mutex_);
  return deadline_;
}

HumanAgent::HumanAgent(AgentSpec spec, std::shared_ptr<HumanSeat> seat)
    : Agent(std::move(spec)), seat_(std::move(seat)) {}

Decision HumanAgent::Decide(const Observation& obs, const GameConfig& config) {
  return seat_->Await(obs, config);
}

}  // namespace gbs
