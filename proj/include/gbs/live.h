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

#ifndef GBS_LIVE_H_
#define GBS_LIVE_H_

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/orchestrator.h"

// Live sessions with human seats. A lobby is created from a session template
// holding at least one human agent; each human seat gets a single-use claim
// code. Claiming a seat yields a bearer token. When every human seat is
// claimed the session starts on its own thread, running the same
// orchestrator loop as batch mode.
namespace gbs {

enum class LobbyState { kWaiting, kRunning, kFinished };
std::string_view LobbyStateName(LobbyState state);

enum class RoundPhase { kAwaitingGuess, kAwaitingOthers, kFeedbackReady, kGameOver };
std::string_view RoundPhaseName(RoundPhase phase);

// Per-seat event. `data` is a JSON object; seq is strictly increasing per
// seat starting at 1.
struct LiveEvent {
  int64_t seq = 0;
  std::string type;  // session_started, round_started, feedback, game_over,
                     // session_over
  std::string data;
};

struct HistoryEntry {
  int guess = 0;
  std::string feedback;  // text exactly as rendered for this seat
  bool timed_out = false;
};

// What a human seat may see: its own guesses and feedback, never another
// seat's guess.
struct RoundView {
  std::string lobby_id;
  LobbyState state = LobbyState::kWaiting;
  int seat_index = 0;
  std::string agent_id;
  int n_players = 0;
  int game_count = 0;
  int guess_min = 0;
  int guess_max = 50;
  int game_index = 0;
  int round_index = 0;
  RoundPhase phase = RoundPhase::kAwaitingGuess;
  std::optional<FeedbackMode> feedback_mode;
  std::optional<int64_t> deadline_ms;  // unix epoch milliseconds
  std::vector<std::vector<HistoryEntry>> history;  // per game
  int64_t last_seq = 0;
};

std::string RoundViewJson(const RoundView& view);
std::string LiveEventJson(const LiveEvent& event);

struct SeatTicket {
  int seat_index = 0;
  std::string agent_id;
  AgentKind kind = AgentKind::kScripted;
  std::string claim_code;  // empty for non-human seats
};

struct LobbyCreated {
  std::string lobby_id;
  std::vector<SeatTicket> seats;
};

struct JoinResult {
  std::string token;
  int seat_index = 0;
  std::string agent_id;
};

struct LobbyStatus {
  std::string lobby_id;
  LobbyState state = LobbyState::kWaiting;
  int n_players = 0;
  int human_seats = 0;
  int claimed = 0;
  std::string error;  // set when the session aborted
};

struct LiveOptions {
  std::chrono::milliseconds round_timeout{60000};  // 0 waits indefinitely
  std::chrono::milliseconds lobby_ttl{std::chrono::minutes(30)};
  ClockKind clock = ClockKind::kWall;
  // When set, sessions stream to <log_dir>/<session_id>/log.jsonl.
  std::optional<std::filesystem::path> log_dir;
  // Builds agents for the non-human seats. Defaults to DefaultAgentFactory.
  std::function<std::unique_ptr<DefaultAgentFactory>(const SessionConfig&)>
      factory_for;
};

// Hex string of `bytes` random bytes from the OS CSPRNG.
std::string RandomToken(size_t bytes);

class LiveService {
 public:
  explicit LiveService(LiveOptions options = {});
  ~LiveService();
  LiveService(const LiveService&) = delete;
  LiveService& operator=(const LiveService&) = delete;

  // Errors: InvalidTemplate.
  LobbyCreated CreateLobby(SessionConfig session_template);
  // Errors: NotFound, LobbyExpired, AuthFailure (unknown or used code).
  JoinResult Join(const std::string& lobby_id, const std::string& claim_code);
  // Errors: NotFound, LobbyExpired.
  LobbyStatus Status(const std::string& lobby_id);
  // Errors: AuthFailure, LobbyExpired.
  RoundView View(const std::string& token);
  // Errors: AuthFailure, LobbyExpired, LobbyNotRunning, NotYourSeat (seat
  // given and not the token's), OutOfRange, WrongRound, AlreadySubmitted.
  RoundPhase SubmitGuess(const std::string& token, int game_index,
                         int round_index, int guess,
                         std::optional<int> seat_index = std::nullopt);
  // Events with seq > after_seq; blocks up to `wait` for the first one.
  // Errors: AuthFailure, LobbyExpired.
  std::vector<LiveEvent> Events(const std::string& token, int64_t after_seq,
                                std::chrono::milliseconds wait);

  // Completed log, once the lobby has finished.
  std::optional<SessionLog> Result(const std::string& lobby_id);
  // Blocks until the lobby finishes or `timeout` passes.
  bool WaitFinished(const std::string& lobby_id,
                    std::chrono::milliseconds timeout);
  // Drops lobbies idle for longer than the TTL; returns how many.
  int ExpireIdle();
  // Closes every seat and joins session threads.
  void Shutdown();

  struct Lobby;

 private:
  std::shared_ptr<Lobby> FindLobby(const std::string& lobby_id);
  std::shared_ptr<Lobby> LobbyForToken(const std::string& token, int* seat);
  void Start(const std::shared_ptr<Lobby>& lobby);

  LiveOptions options_;
  std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Lobby>> lobbies_;
  std::map<std::string, std::string> expired_;  // lobby id -> ""
  std::map<std::string, std::pair<std::string, int>> tokens_;  // -> lobby, seat
};

// HTTP front-end (JSON endpoints, long-poll and server-sent events).
//
//   POST /api/lobbies                 body: session template (YAML or JSON)
//   GET  /api/lobbies/{id}            lobby status
//   POST /api/lobbies/{id}/join       {"claim_code": ...} -> token
//   GET  /api/view                    RoundView for the bearer token
//   POST /api/guess                   {"game_index","round_index","guess"}
//   GET  /api/events?after=N&wait_ms=M   long-poll
//   GET  /api/stream?after=N          text/event-stream, honors Last-Event-ID
//   GET  /api/health
//
// Seat endpoints take "Authorization: Bearer <token>" (or ?token=).
class LiveServer {
 public:
  explicit LiveServer(LiveService& service);
  ~LiveServer();

  // Binds and serves on a background thread; port 0 picks a free port.
  // Returns the bound port. Errors: SinkUnavailable when binding fails.
  int Start(const std::string& host, int port);
  // Serves on the calling thread until Stop().
  void Listen(const std::string& host, int port);
  void Stop();
  // Serves files under `dir` at "/" (e.g. a browser client build).
  void SetStaticDir(const std::filesystem::path& dir);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Maps a library error to an HTTP status code.
int HttpStatusFor(ErrorCode code);

}  // namespace gbs

#endif  // GBS_LIVE_H_
