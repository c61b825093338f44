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

#include "gbs/live.h"

#include <openssl/rand.h>

#include <atomic>
#include <condition_variable>
#include <set>
#include <thread>

#include "gbs/manifest.h"
#include "httplib.h"
#include "json.hpp"

namespace gbs {

using json = nlohmann::json;
using SteadyClock = std::chrono::steady_clock;

namespace {

int64_t EpochMs(SteadyClock::time_point t) {
  const auto delta = t - SteadyClock::now();
  const auto wall = std::chrono::system_clock::now() + delta;
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             wall.time_since_epoch())
      .count();
}

json ViewHistoryJson(const std::vector<std::vector<HistoryEntry>>& history) {
  json games = json::array();
  for (const auto& game : history) {
    json rounds = json::array();
    for (const HistoryEntry& e : game) {
      rounds.push_back(
          {{"guess", e.guess}, {"feedback", e.feedback}, {"timeout", e.timed_out}});
    }
    games.push_back(rounds);
  }
  return games;
}

}  // namespace

std::string_view LobbyStateName(LobbyState state) {
  switch (state) {
    case LobbyState::kWaiting:
      return "waiting";
    case LobbyState::kRunning:
      return "running";
    case LobbyState::kFinished:
      return "finished";
  }
  return "unknown";
}

std::string_view RoundPhaseName(RoundPhase phase) {
  switch (phase) {
    case RoundPhase::kAwaitingGuess:
      return "awaiting_guess";
    case RoundPhase::kAwaitingOthers:
      return "awaiting_others";
    case RoundPhase::kFeedbackReady:
      return "feedback_ready";
    case RoundPhase::kGameOver:
      return "game_over";
  }
  return "unknown";
}

std::string RoundViewJson(const RoundView& view) {
  json j;
  j["lobby_id"] = view.lobby_id;
  j["state"] = LobbyStateName(view.state);
  j["seat"] = view.seat_index;
  j["agent_id"] = view.agent_id;
  j["n_players"] = view.n_players;
  j["game_count"] = view.game_count;
  j["guess_min"] = view.guess_min;
  j["guess_max"] = view.guess_max;
  j["game_index"] = view.game_index;
  j["round_index"] = view.round_index;
  j["phase"] = RoundPhaseName(view.phase);
  j["feedback_mode"] =
      view.feedback_mode ? json(FeedbackModeName(*view.feedback_mode)) : json();
  j["deadline_ms"] = view.deadline_ms ? json(*view.deadline_ms) : json();
  j["history"] = ViewHistoryJson(view.history);
  j["last_seq"] = view.last_seq;
  return j.dump();
}

std::string LiveEventJson(const LiveEvent& event) {
  json j = {{"seq", event.seq},
            {"type", event.type},
            {"data", json::parse(event.data)}};
  return j.dump();
}

std::string RandomToken(size_t bytes) {
  std::vector<unsigned char> buf(bytes);
  if (RAND_bytes(buf.data(), static_cast<int>(buf.size())) != 1) {
    throw Error(ErrorCode::kSinkUnavailable, "random source unavailable");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  for (unsigned char c : buf) {
    out += kHex[c >> 4];
    out += kHex[c & 15];
  }
  return out;
}

struct LiveService::Lobby {
  std::string id;
  SessionConfig config;
  std::vector<int> human_seats;
  std::map<std::string, int> claim_codes;  // unused codes
  std::set<int> claimed;
  std::map<int, std::shared_ptr<HumanSeat>> seats;

  std::mutex mutex;
  std::condition_variable cv;
  LobbyState state = LobbyState::kWaiting;
  SteadyClock::time_point last_activity = SteadyClock::now();

  std::map<int, std::vector<LiveEvent>> events;
  std::map<int, std::vector<std::vector<HistoryEntry>>> history;
  int game_index = 0;
  int round_index = 0;
  bool round_open = false;
  bool game_over = false;
  std::optional<FeedbackMode> mode;
  std::optional<SessionLog> result;
  std::string error;
  std::thread thread;

  // Requires `mutex`.
  void Emit(int seat, const std::string& type, const json& data) {
    auto& list = events[seat];
    LiveEvent e;
    e.seq = static_cast<int64_t>(list.size()) + 1;
    e.type = type;
    e.data = data.dump();
    list.push_back(std::move(e));
  }
  void EmitAll(const std::string& type, const json& data) {
    for (int seat : human_seats) Emit(seat, type, data);
    cv.notify_all();
  }
};

namespace {

class LobbyObserver : public SessionObserver {
 public:
  explicit LobbyObserver(LiveService::Lobby& lobby) : lobby_(lobby) {}

  void OnSessionStart(const SessionLog& log) override {
    std::lock_guard lock(lobby_.mutex);
    lobby_.EmitAll("session_started", {{"session_id", log.meta.session_id},
                                       {"n_players", log.meta.n_players},
                                       {"game_count", log.meta.game_count}});
  }

  void OnGameStart(const GameLog& game) override {
    std::lock_guard lock(lobby_.mutex);
    lobby_.game_index = game.game_index;
    lobby_.round_index = 0;
    lobby_.game_over = false;
    lobby_.round_open = false;
    lobby_.mode = game.mode();
    for (int seat : lobby_.human_seats) lobby_.history[seat].emplace_back();
  }

  void OnRoundStart(const GameLog& game, int round_index) override {
    std::lock_guard lock(lobby_.mutex);
    lobby_.round_index = round_index;
    lobby_.round_open = true;
    for (int seat : lobby_.human_seats) {
      auto& human = lobby_.seats.at(seat);
      human->Open(game.game_index, round_index);
      json data = {{"game_index", game.game_index},
                   {"round_index", round_index},
                   {"feedback_mode", FeedbackModeName(game.mode())}};
      auto deadline = human->deadline();
      data["deadline_ms"] = deadline ? json(EpochMs(*deadline)) : json();
      lobby_.Emit(seat, "round_started", data);
    }
    lobby_.cv.notify_all();
  }

  void OnRound(const GameLog& game, const RoundLog& round) override {
    std::lock_guard lock(lobby_.mutex);
    lobby_.round_open = false;
    for (int seat : lobby_.human_seats) {
      HistoryEntry entry{round.guesses[seat], round.rendered[seat],
                         round.decisions[seat].timed_out};
      lobby_.history[seat].back().push_back(entry);
      lobby_.Emit(seat, "feedback",
                  {{"game_index", game.game_index},
                   {"round_index", round.round_index},
                   {"guess", entry.guess},
                   {"feedback", entry.feedback},
                   {"timeout", entry.timed_out},
                   {"solved", round.feedback.solved}});
    }
    lobby_.cv.notify_all();
  }

  void OnGameEnd(const GameLog& game) override {
    std::lock_guard lock(lobby_.mutex);
    lobby_.game_over = true;
    lobby_.EmitAll("game_over", {{"game_index", game.game_index},
                                 {"status", GameStatusName(game.status)},
                                 {"rounds", game.rounds.size()}});
  }

 private:
  LiveService::Lobby& lobby_;
};

}  // namespace

LiveService::LiveService(LiveOptions options) : options_(std::move(options)) {}

LiveService::~LiveService() { Shutdown(); }

LobbyCreated LiveService::CreateLobby(SessionConfig session_template) {
  auto lobby = std::make_shared<Lobby>();
  lobby->id = RandomToken(8);
  if (session_template.session_id.empty()) {
    session_template.session_id = "live-" + lobby->id;
  }
  try {
    session_template.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidTemplate, e.what());
  }
  LobbyCreated created;
  created.lobby_id = lobby->id;
  for (int i = 0; i < session_template.n_players(); ++i) {
    const AgentSpec& spec = session_template.agents[i];
    SeatTicket ticket{i, spec.agent_id, spec.kind, ""};
    if (spec.kind == AgentKind::kHuman) {
      ticket.claim_code = RandomToken(16);
      lobby->human_seats.push_back(i);
      lobby->claim_codes[ticket.claim_code] = i;
      lobby->seats[i] = std::make_shared<HumanSeat>(options_.round_timeout);
    } else if (spec.kind == AgentKind::kReplay) {
      throw Error(ErrorCode::kInvalidTemplate,
                  "replay agents are not supported in live lobbies");
    }
    created.seats.push_back(ticket);
  }
  if (lobby->human_seats.empty()) {
    throw Error(ErrorCode::kInvalidTemplate, "template has no human seat");
  }
  lobby->config = std::move(session_template);
  ExpireIdle();
  std::lock_guard lock(mutex_);
  lobbies_[lobby->id] = lobby;
  return created;
}

std::shared_ptr<LiveService::Lobby> LiveService::FindLobby(
    const std::string& lobby_id) {
  ExpireIdle();
  std::lock_guard lock(mutex_);
  if (expired_.count(lobby_id)) {
    throw Error(ErrorCode::kLobbyExpired, lobby_id);
  }
  auto it = lobbies_.find(lobby_id);
  if (it == lobbies_.end()) throw Error(ErrorCode::kNotFound, "lobby " + lobby_id);
  return it->second;
}

std::shared_ptr<LiveService::Lobby> LiveService::LobbyForToken(
    const std::string& token, int* seat) {
  std::string lobby_id;
  {
    std::lock_guard lock(mutex_);
    auto it = tokens_.find(token);
    if (token.empty() || it == tokens_.end()) {
      throw Error(ErrorCode::kAuthFailure, "unknown token");
    }
    lobby_id = it->second.first;
    *seat = it->second.second;
  }
  try {
    return FindLobby(lobby_id);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kNotFound) {
      throw Error(ErrorCode::kLobbyExpired, lobby_id);
    }
    throw;
  }
}

JoinResult LiveService::Join(const std::string& lobby_id,
                             const std::string& claim_code) {
  auto lobby = FindLobby(lobby_id);
  JoinResult result;
  bool start = false;
  {
    std::lock_guard lock(lobby->mutex);
    auto it = lobby->claim_codes.find(claim_code);
    if (it == lobby->claim_codes.end()) {
      throw Error(ErrorCode::kAuthFailure, "invalid or used claim code");
    }
    result.seat_index = it->second;
    result.agent_id = lobby->config.agents[it->second].agent_id;
    result.token = RandomToken(32);
    lobby->claim_codes.erase(it);
    lobby->claimed.insert(result.seat_index);
    lobby->last_activity = SteadyClock::now();
    start = lobby->claimed.size() == lobby->human_seats.size() &&
            lobby->state == LobbyState::kWaiting;
    if (start) lobby->state = LobbyState::kRunning;
  }
  {
    std::lock_guard lock(mutex_);
    tokens_[result.token] = {lobby_id, result.seat_index};
  }
  if (start) Start(lobby);
  return result;
}

void LiveService::Start(const std::shared_ptr<Lobby>& lobby) {
  Lobby* raw = lobby.get();
  raw->thread = std::thread([this, raw] {
    std::unique_ptr<DefaultAgentFactory> factory =
        options_.factory_for ? options_.factory_for(raw->config)
                             : std::make_unique<DefaultAgentFactory>();
    for (const auto& [seat, human] : raw->seats) {
      factory->SetSeat(raw->config.agents[seat].agent_id, human);
    }
    LobbyObserver observer(*raw);
    RunOptions run;
    run.clock = options_.clock;
    run.source = "live";
    run.observers.push_back(&observer);
    std::unique_ptr<LogFileObserver> file;
    std::string error;
    std::optional<SessionLog> log;
    try {
      if (options_.log_dir) {
        auto dir = *options_.log_dir / raw->config.session_id;
        std::filesystem::create_directories(dir);
        file = std::make_unique<LogFileObserver>(dir / "log.jsonl");
        run.observers.push_back(file.get());
      }
      // The decision threads let agent latency overlap the human deadline.
      run.parallel_decisions = true;
      log = RunSession(raw->config, *factory, run);
    } catch (const std::exception& e) {
      error = e.what();
    }
    std::lock_guard lock(raw->mutex);
    raw->result = std::move(log);
    raw->error = error;
    raw->state = LobbyState::kFinished;
    raw->round_open = false;
    raw->last_activity = SteadyClock::now();
    json data = {{"status", error.empty() ? "complete" : "aborted"}};
    if (!error.empty()) data["error"] = error;
    raw->EmitAll("session_over", data);
  });
}

LobbyStatus LiveService::Status(const std::string& lobby_id) {
  auto lobby = FindLobby(lobby_id);
  std::lock_guard lock(lobby->mutex);
  LobbyStatus status;
  status.lobby_id = lobby->id;
  status.state = lobby->state;
  status.n_players = lobby->config.n_players();
  status.human_seats = static_cast<int>(lobby->human_seats.size());
  status.claimed = static_cast<int>(lobby->claimed.size());
  status.error = lobby->error;
  return status;
}

RoundView LiveService::View(const std::string& token) {
  int seat = 0;
  auto lobby = LobbyForToken(token, &seat);
  std::lock_guard lock(lobby->mutex);
  lobby->last_activity = SteadyClock::now();
  const SessionConfig& config = lobby->config;
  RoundView view;
  view.lobby_id = lobby->id;
  view.state = lobby->state;
  view.seat_index = seat;
  view.agent_id = config.agents[seat].agent_id;
  view.n_players = config.n_players();
  view.game_count = static_cast<int>(config.ResolvedGames().size());
  view.guess_min = config.guess_min;
  view.guess_max = config.guess_max;
  view.game_index = lobby->game_index;
  view.round_index = lobby->round_index;
  view.feedback_mode = lobby->mode;
  view.history = lobby->history[seat];
  view.last_seq = static_cast<int64_t>(lobby->events[seat].size());
  const auto& human = lobby->seats.at(seat);
  if (lobby->state == LobbyState::kFinished) {
    view.phase = RoundPhase::kGameOver;
  } else if (lobby->state == LobbyState::kWaiting) {
    view.phase = RoundPhase::kAwaitingOthers;
  } else if (lobby->round_open) {
    view.phase = human->submitted() ? RoundPhase::kAwaitingOthers
                                    : RoundPhase::kAwaitingGuess;
    if (auto deadline = human->deadline()) view.deadline_ms = EpochMs(*deadline);
  } else {
    view.phase = lobby->game_over ? RoundPhase::kGameOver
                                  : RoundPhase::kFeedbackReady;
  }
  return view;
}

RoundPhase LiveService::SubmitGuess(const std::string& token, int game_index,
                                    int round_index, int guess,
                                    std::optional<int> seat_index) {
  int seat = 0;
  auto lobby = LobbyForToken(token, &seat);
  std::lock_guard lock(lobby->mutex);
  if (seat_index && *seat_index != seat) {
    throw Error(ErrorCode::kNotYourSeat,
                "token holds seat " + std::to_string(seat));
  }
  if (lobby->state != LobbyState::kRunning) {
    throw Error(ErrorCode::kLobbyNotRunning,
                std::string(LobbyStateName(lobby->state)));
  }
  const SessionConfig& config = lobby->config;
  if (guess < config.guess_min || guess > config.guess_max) {
    throw Error(ErrorCode::kOutOfRange,
                std::to_string(guess) + " is outside [" +
                    std::to_string(config.guess_min) + ", " +
                    std::to_string(config.guess_max) + "]");
  }
  if (!lobby->round_open) {
    throw Error(ErrorCode::kWrongRound, "no round is open");
  }
  lobby->seats.at(seat)->Submit(game_index, round_index, guess);
  lobby->last_activity = SteadyClock::now();
  return RoundPhase::kAwaitingOthers;
}

std::vector<LiveEvent> LiveService::Events(const std::string& token,
                                           int64_t after_seq,
                                           std::chrono::milliseconds wait) {
  int seat = 0;
  auto lobby = LobbyForToken(token, &seat);
  std::unique_lock lock(lobby->mutex);
  lobby->last_activity = SteadyClock::now();
  auto available = [&] {
    return static_cast<int64_t>(lobby->events[seat].size()) > after_seq;
  };
  if (!available() && wait.count() > 0) {
    lobby->cv.wait_for(lock, wait, available);
  }
  const auto& list = lobby->events[seat];
  std::vector<LiveEvent> out;
  for (const LiveEvent& e : list) {
    if (e.seq > after_seq) out.push_back(e);
  }
  return out;
}

std::optional<SessionLog> LiveService::Result(const std::string& lobby_id) {
  auto lobby = FindLobby(lobby_id);
  std::lock_guard lock(lobby->mutex);
  return lobby->result;
}

bool LiveService::WaitFinished(const std::string& lobby_id,
                               std::chrono::milliseconds timeout) {
  auto lobby = FindLobby(lobby_id);
  std::unique_lock lock(lobby->mutex);
  return lobby->cv.wait_for(lock, timeout, [&] {
    return lobby->state == LobbyState::kFinished;
  });
}

int LiveService::ExpireIdle() {
  std::vector<std::shared_ptr<Lobby>> dropped;
  {
    std::lock_guard lock(mutex_);
    const auto now = SteadyClock::now();
    for (auto it = lobbies_.begin(); it != lobbies_.end();) {
      Lobby& lobby = *it->second;
      bool idle = false;
      {
        std::lock_guard lobby_lock(lobby.mutex);
        idle = lobby.state != LobbyState::kRunning &&
               now - lobby.last_activity > options_.lobby_ttl;
      }
      if (idle) {
        expired_[it->first] = "";
        dropped.push_back(it->second);
        it = lobbies_.erase(it);
      } else {
        ++it;
      }
    }
  }
  for (auto& lobby : dropped) {
    if (lobby->thread.joinable()) lobby->thread.join();
  }
  return static_cast<int>(dropped.size());
}

void LiveService::Shutdown() {
  std::vector<std::shared_ptr<Lobby>> all;
  {
    std::lock_guard lock(mutex_);
    for (auto& [id, lobby] : lobbies_) all.push_back(lobby);
  }
  for (auto& lobby : all) {
    for (auto& [seat, human] : lobby->seats) human->Close();
    if (lobby->thread.joinable()) lobby->thread.join();
  }
}

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidTemplate:
    case ErrorCode::kManifestError:
    case ErrorCode::kInvalidConfig:
      return 400;
    case ErrorCode::kAuthFailure:
      return 401;
    case ErrorCode::kNotYourSeat:
      return 403;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kWrongRound:
    case ErrorCode::kAlreadySubmitted:
    case ErrorCode::kLobbyNotRunning:
      return 409;
    case ErrorCode::kLobbyExpired:
      return 410;
    case ErrorCode::kOutOfRange:
    case ErrorCode::kGuessOutOfRange:
      return 422;
    default:
      return 500;
  }
}

struct LiveServer::Impl {
  explicit Impl(LiveService& s) : service(s) {}

  LiveService& service;
  httplib::Server server;
  std::thread thread;
  std::atomic<bool> stopping{false};
};

namespace {

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, const Error& e) {
  Reply(res, HttpStatusFor(e.code()),
        {{"error", ErrorCodeName(e.code())}, {"detail", e.detail()}});
}

std::string TokenOf(const httplib::Request& req) {
  const std::string auth = req.get_header_value("Authorization");
  const std::string prefix = "Bearer ";
  if (auth.rfind(prefix, 0) == 0) return auth.substr(prefix.size());
  return req.has_param("token") ? req.get_param_value("token") : "";
}

int64_t IntParam(const httplib::Request& req, const char* name, int64_t fallback) {
  if (!req.has_param(name)) return fallback;
  try {
    return std::stoll(req.get_param_value(name));
  } catch (const std::exception&) {
    throw Error(ErrorCode::kInvalidConfig,
                std::string("query parameter '") + name + "' is not an integer");
  }
}

template <typename F>
httplib::Server::Handler Guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      ReplyError(res, e);
    } catch (const json::exception& e) {
      Reply(res, 400, {{"error", "BadRequest"}, {"detail", e.what()}});
    }
  };
}

json StatusJson(const LobbyStatus& s) {
  json j = {{"lobby_id", s.lobby_id},
            {"state", LobbyStateName(s.state)},
            {"n_players", s.n_players},
            {"human_seats", s.human_seats},
            {"claimed", s.claimed}};
  if (!s.error.empty()) j["error"] = s.error;
  return j;
}

std::string SseFrame(const LiveEvent& e) {
  return "id: " + std::to_string(e.seq) + "\nevent: " + e.type +
         "\ndata: " + e.data + "\n\n";
}

}  // namespace

LiveServer::LiveServer(LiveService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto& server = impl_->server;
  LiveService& svc = impl_->service;
  Impl* impl = impl_.get();

  server.Get("/api/health", [](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, {{"ok", true}});
  });

  server.Post("/api/lobbies", Guarded([&svc](const httplib::Request& req,
                                             httplib::Response& res) {
    SessionConfig tmpl;
    try {
      tmpl = ParseSessionTemplate(req.body, "request");
    } catch (const Error& e) {
      throw Error(ErrorCode::kInvalidTemplate, e.detail());
    }
    LobbyCreated created = svc.CreateLobby(std::move(tmpl));
    json seats = json::array();
    for (const SeatTicket& t : created.seats) {
      json seat = {{"seat", t.seat_index},
                   {"agent_id", t.agent_id},
                   {"kind", AgentKindName(t.kind)}};
      if (!t.claim_code.empty()) {
        seat["claim_code"] = t.claim_code;
        seat["join_path"] = "/join/" + created.lobby_id + "/" + t.claim_code;
      }
      seats.push_back(seat);
    }
    Reply(res, 201, {{"lobby_id", created.lobby_id}, {"seats", seats}});
  }));

  server.Get(R"(/api/lobbies/([0-9a-f]+))",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               Reply(res, 200, StatusJson(svc.Status(req.matches[1])));
             }));

  server.Post(R"(/api/lobbies/([0-9a-f]+)/join)",
              Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = json::parse(req.body);
                JoinResult joined = svc.Join(req.matches[1],
                                             body.at("claim_code").get<std::string>());
                Reply(res, 200, {{"token", joined.token},
                                 {"seat", joined.seat_index},
                                 {"agent_id", joined.agent_id}});
              }));

  server.Get("/api/view",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               res.set_content(RoundViewJson(svc.View(TokenOf(req))),
                               "application/json");
             }));

  server.Post("/api/guess",
              Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
                const json body = json::parse(req.body);
                std::optional<int> seat;
                if (body.contains("seat")) seat = body["seat"].get<int>();
                if (!body.contains("guess") || !body["guess"].is_number_integer()) {
                  throw Error(ErrorCode::kOutOfRange, "guess must be an integer");
                }
                RoundPhase phase = svc.SubmitGuess(
                    TokenOf(req), body.at("game_index").get<int>(),
                    body.at("round_index").get<int>(), body["guess"].get<int>(),
                    seat);
                Reply(res, 200, {{"accepted", true}, {"phase", RoundPhaseName(phase)}});
              }));

  server.Get("/api/events",
             Guarded([&svc](const httplib::Request& req, httplib::Response& res) {
               const int64_t after = IntParam(req, "after", 0);
               const int64_t wait = std::clamp<int64_t>(IntParam(req, "wait_ms", 0), 0, 30000);
               json events = json::array();
               for (const LiveEvent& e :
                    svc.Events(TokenOf(req), after, std::chrono::milliseconds(wait))) {
                 events.push_back(json::parse(LiveEventJson(e)));
               }
               Reply(res, 200, {{"events", events}});
             }));

  server.Get("/api/stream", Guarded([&svc, impl](const httplib::Request& req,
                                                 httplib::Response& res) {
    const std::string token = TokenOf(req);
    int64_t after = IntParam(req, "after", 0);
    if (req.has_header("Last-Event-ID")) {
      try {
        after = std::stoll(req.get_header_value("Last-Event-ID"));
      } catch (const std::exception&) {
      }
    }
    svc.Events(token, after, std::chrono::milliseconds(0));  // auth check
    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "text/event-stream",
        [&svc, impl, token, after](size_t, httplib::DataSink& sink) mutable {
          if (impl->stopping) return false;
          std::vector<LiveEvent> events;
          try {
            events = svc.Events(token, after, std::chrono::milliseconds(250));
          } catch (const Error&) {
            return false;
          }
          if (events.empty()) {
            const std::string ping = ":\n\n";
            return sink.write(ping.data(), ping.size());
          }
          for (const LiveEvent& e : events) {
            const std::string frame = SseFrame(e);
            if (!sink.write(frame.data(), frame.size())) return false;
            after = e.seq;
            if (e.type == "session_over") {
              sink.done();
              return true;
            }
          }
          return true;
        });
  }));
}

LiveServer::~LiveServer() { Stop(); }

void LiveServer::SetStaticDir(const std::filesystem::path& dir) {
  impl_->server.set_mount_point("/", dir.string());
}

int LiveServer::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::kSinkUnavailable, "cannot bind " + host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::kSinkUnavailable,
                "cannot bind " + host + ":" + std::to_string(port));
  }
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void LiveServer::Listen(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    throw Error(ErrorCode::kSinkUnavailable,
                "cannot listen on " + host + ":" + std::to_string(port));
  }
}

void LiveServer::Stop() {
  impl_->stopping = true;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace gbs
