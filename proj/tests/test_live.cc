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

#include <algorithm>
#include <regex>
#include <thread>

#include "doctest.h"
#include "gbs/live.h"
#include "gbs/manifest.h"
#include "gbs/replay.h"
#include "httplib.h"
#include "json.hpp"
#include "support.h"

namespace gbs {
namespace {

using json = nlohmann::json;
using testing::Scripted;
using testing::TempDir;
using namespace std::chrono_literals;

AgentSpec Human() {
  AgentSpec spec;
  spec.kind = AgentKind::kHuman;
  return spec;
}

SessionConfig Template(std::vector<AgentSpec> agents) {
  SessionConfig s;
  s.session_id = "live";
  s.base_seed = 5;
  s.agents = std::move(agents);
  for (size_t i = 0; i < s.agents.size(); ++i) {
    s.agents[i].agent_id = std::string(1, static_cast<char>('A' + i));
  }
  return s;
}

ErrorCode CodeOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::kInvalidConfig;
}

// Waits for the next event of `type` after *seq, advancing *seq.
std::optional<LiveEvent> NextEvent(LiveService& svc, const std::string& token,
                                   int64_t* seq, const std::string& type) {
  for (int spins = 0; spins < 200; ++spins) {
    for (const LiveEvent& e : svc.Events(token, *seq, 100ms)) {
      *seq = e.seq;
      if (e.type == type) return e;
    }
  }
  return std::nullopt;
}

// Numerical: seat-0 share of the proportional correction. Directional: hold.
int HumanMove(int current, const std::string& feedback) {
  static const std::regex by(R"(too (low|high) by (\d+))");
  std::smatch m;
  if (!std::regex_search(feedback, m, by)) return current;
  const int k = std::stoi(m[2]);
  const int step = k / 2 + k % 2;
  const int next = m[1] == "low" ? current + step : current - step;
  return std::clamp(next, 0, 50);
}

}  // namespace

TEST_SUITE("live") {

TEST_CASE("HTTP status mapping") {
  CHECK(HttpStatusFor(ErrorCode::kAuthFailure) == 401);
  CHECK(HttpStatusFor(ErrorCode::kNotYourSeat) == 403);
  CHECK(HttpStatusFor(ErrorCode::kNotFound) == 404);
  CHECK(HttpStatusFor(ErrorCode::kWrongRound) == 409);
  CHECK(HttpStatusFor(ErrorCode::kLobbyExpired) == 410);
  CHECK(HttpStatusFor(ErrorCode::kOutOfRange) == 422);
  CHECK(HttpStatusFor(ErrorCode::kInvalidTemplate) == 400);
  CHECK(HttpStatusFor(ErrorCode::kAgentFailure) == 500);
}

TEST_CASE("lobby creation rejects templates without humans") {
  LiveService svc;
  CHECK(CodeOf([&] {
          svc.CreateLobby(Template({Scripted("A", "constant", {{"value", "25"}}),
                                    Scripted("B", "proportional")}));
        }) == ErrorCode::kInvalidTemplate);
  SessionConfig bad = Template({Human(), Scripted("B", "proportional")});
  bad.guess_max = -1;
  CHECK(CodeOf([&] { svc.CreateLobby(bad); }) == ErrorCode::kInvalidTemplate);
}

TEST_CASE("claim codes are single use and the session starts when seats fill") {
  LiveService svc;
  const LobbyCreated lobby = svc.CreateLobby(
      Template({Human(), Human(), Scripted("C", "constant", {{"value", "10"}})}));
  REQUIRE(lobby.seats.size() == 3);
  CHECK_FALSE(lobby.seats[0].claim_code.empty());
  CHECK(lobby.seats[2].claim_code.empty());
  CHECK(lobby.seats[0].claim_code != lobby.seats[1].claim_code);

  const JoinResult a = svc.Join(lobby.lobby_id, lobby.seats[0].claim_code);
  CHECK(a.seat_index == 0);
  CHECK(svc.Status(lobby.lobby_id).state == LobbyState::kWaiting);
  CHECK(svc.View(a.token).phase == RoundPhase::kAwaitingOthers);
  CHECK(CodeOf([&] { svc.Join(lobby.lobby_id, lobby.seats[0].claim_code); }) ==
        ErrorCode::kAuthFailure);
  CHECK(CodeOf([&] { svc.SubmitGuess(a.token, 1, 1, 10); }) ==
        ErrorCode::kLobbyNotRunning);

  const JoinResult b = svc.Join(lobby.lobby_id, lobby.seats[1].claim_code);
  CHECK(a.token != b.token);
  int64_t seq = 0;
  REQUIRE(NextEvent(svc, a.token, &seq, "round_started"));
  CHECK(svc.Status(lobby.lobby_id).state == LobbyState::kRunning);
  CHECK(svc.View(a.token).phase == RoundPhase::kAwaitingGuess);

  CHECK(CodeOf([&] { svc.SubmitGuess(a.token, 1, 1, 51); }) == ErrorCode::kOutOfRange);
  CHECK(CodeOf([&] { svc.SubmitGuess(a.token, 1, 1, 10, 1); }) ==
        ErrorCode::kNotYourSeat);
  CHECK(CodeOf([&] { svc.SubmitGuess(a.token, 1, 2, 10); }) == ErrorCode::kWrongRound);
  CHECK(svc.SubmitGuess(a.token, 1, 1, 13) == RoundPhase::kAwaitingOthers);
  CHECK(CodeOf([&] { svc.SubmitGuess(a.token, 1, 1, 14); }) ==
        ErrorCode::kAlreadySubmitted);
  CHECK(CodeOf([&] { svc.View("nope"); }) == ErrorCode::kAuthFailure);
  svc.Shutdown();
}

TEST_CASE("a seat's view never carries another seat's guess") {
  LiveService svc;
  const LobbyCreated lobby = svc.CreateLobby(Template({Human(), Human()}));
  const JoinResult a = svc.Join(lobby.lobby_id, lobby.seats[0].claim_code);
  const JoinResult b = svc.Join(lobby.lobby_id, lobby.seats[1].claim_code);
  int64_t seq_a = 0, seq_b = 0;
  REQUIRE(NextEvent(svc, a.token, &seq_a, "round_started"));
  REQUIRE(NextEvent(svc, b.token, &seq_b, "round_started"));
  svc.SubmitGuess(a.token, 1, 1, 13);
  svc.SubmitGuess(b.token, 1, 1, 37);
  const auto fa = NextEvent(svc, a.token, &seq_a, "feedback");
  const auto fb = NextEvent(svc, b.token, &seq_b, "feedback");
  REQUIRE(fa);
  REQUIRE(fb);
  CHECK(json::parse(fa->data)["guess"] == 13);
  CHECK(json::parse(fb->data)["guess"] == 37);

  const json view_a = json::parse(RoundViewJson(svc.View(a.token)));
  const json view_b = json::parse(RoundViewJson(svc.View(b.token)));
  REQUIRE(view_a["history"].size() == 1);
  REQUIRE(view_a["history"][0].size() == 1);
  CHECK(view_a["history"][0][0]["guess"] == 13);
  CHECK(view_b["history"][0][0]["guess"] == 37);
  // Nothing in A's payloads names B's number or the group sum.
  const std::string feedback_a = view_a["history"][0][0]["feedback"];
  CHECK(feedback_a.find("your choice was 13") != std::string::npos);
  CHECK(feedback_a.find("37") == std::string::npos);
  CHECK(feedback_a.find("50") == std::string::npos);
  const json event_a = json::parse(fa->data);
  for (const auto& [key, value] : event_a.items()) {
    if (key != "guess") CHECK(value != 37);
  }
  CHECK_FALSE(view_a.contains("guesses"));
  svc.Shutdown();
}

TEST_CASE("an unanswered round times out and the session continues") {
  LiveOptions options;
  options.round_timeout = 100ms;
  LiveService svc(options);
  SessionConfig tmpl = Template({Human(), Scripted("B", "constant", {{"value", "20"}})});
  tmpl.game_count = 2;
  tmpl.max_rounds = 3;
  tmpl.target_min = 90;
  tmpl.target_max = 100;
  const LobbyCreated lobby = svc.CreateLobby(tmpl);
  svc.Join(lobby.lobby_id, lobby.seats[0].claim_code);
  REQUIRE(svc.WaitFinished(lobby.lobby_id, 20s));
  const auto log = svc.Result(lobby.lobby_id);
  REQUIRE(log);
  REQUIRE(log->games.size() == 2);
  for (const GameLog& g : log->games) {
    CHECK(g.rounds.size() == 3);
    for (const RoundLog& r : g.rounds) CHECK(r.decisions[0].timed_out);
  }
  CHECK(VerifyLog(*log).ok);
}

TEST_CASE("idle lobbies expire") {
  LiveOptions options;
  options.lobby_ttl = 50ms;
  LiveService svc(options);
  const LobbyCreated lobby = svc.CreateLobby(Template({Human(), Scripted("B", "proportional")}));
  std::this_thread::sleep_for(120ms);
  CHECK(svc.ExpireIdle() == 1);
  CHECK(CodeOf([&] { svc.Join(lobby.lobby_id, lobby.seats[0].claim_code); }) ==
        ErrorCode::kLobbyExpired);
  CHECK(CodeOf([&] { svc.Status("ffff"); }) == ErrorCode::kNotFound);
}

TEST_CASE("HTTP end to end: a full session against a proportional partner") {
  TempDir logs("gbs-live");
  LiveOptions options;
  options.log_dir = logs.path();
  options.clock = ClockKind::kLogical;
  LiveService svc(options);
  LiveServer server(svc);
  const int port = server.Start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(10, 0);

  auto health = cli.Get("/api/health");
  REQUIRE(health);
  CHECK(health->status == 200);

  auto bad = cli.Post("/api/lobbies", "agents: 3\n", "application/yaml");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["error"] == "InvalidTemplate");

  const std::string tmpl =
      "id: http-session\n"
      "base_seed: 99\n"
      "agents:\n"
      "  - {kind: human}\n"
      "  - {kind: scripted, policy: proportional, params: {on_directional: bisection}}\n";
  auto created = cli.Post("/api/lobbies", tmpl, "application/yaml");
  REQUIRE(created);
  REQUIRE(created->status == 201);
  const json lobby = json::parse(created->body);
  const std::string id = lobby["lobby_id"];
  const std::string code = lobby["seats"][0]["claim_code"];
  CHECK(lobby["seats"][0]["join_path"] == "/join/" + id + "/" + code);
  CHECK_FALSE(lobby["seats"][1].contains("claim_code"));

  auto unauth = cli.Get("/api/view");
  REQUIRE(unauth);
  CHECK(unauth->status == 401);
  auto missing = cli.Post("/api/lobbies/" + id + "/join", "{}", "application/json");
  REQUIRE(missing);
  CHECK(missing->status == 400);

  auto joined = cli.Post("/api/lobbies/" + id + "/join",
                         json({{"claim_code", code}}).dump(), "application/json");
  REQUIRE(joined);
  REQUIRE(joined->status == 200);
  const std::string token = json::parse(joined->body)["token"];
  const httplib::Headers auth = {{"Authorization", "Bearer " + token}};

  int64_t after = 0;
  int guess = 25;
  bool over = false;
  bool checked_errors = false;
  std::vector<std::string> seen_feedback;
  while (!over) {
    auto res = cli.Get("/api/events?after=" + std::to_string(after) + "&wait_ms=2000",
                       auth);
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const json batch = json::parse(res->body);
    for (const json& e : batch["events"]) {
      after = e["seq"];
      const std::string type = e["type"];
      const json& d = e["data"];
      if (type == "game_over") guess = 25;
      if (type == "session_over") over = true;
      if (type == "feedback") {
        seen_feedback.push_back(d["feedback"]);
        guess = HumanMove(guess, d["feedback"]);
      }
      if (type != "round_started") continue;
      if (!checked_errors) {
        checked_errors = true;
        auto wrong_seat = cli.Post("/api/guess", auth,
                                   json({{"game_index", 1}, {"round_index", 1},
                                         {"guess", 1}, {"seat", 1}}).dump(),
                                   "application/json");
        REQUIRE(wrong_seat);
        CHECK(wrong_seat->status == 403);
        auto out_of_range = cli.Post("/api/guess", auth,
                                     json({{"game_index", 1}, {"round_index", 1},
                                           {"guess", 99}}).dump(),
                                     "application/json");
        REQUIRE(out_of_range);
        CHECK(out_of_range->status == 422);
        CHECK(json::parse(out_of_range->body)["error"] == "OutOfRange");
      }
      auto sent = cli.Post("/api/guess", auth,
                           json({{"game_index", d["game_index"]},
                                 {"round_index", d["round_index"]},
                                 {"guess", guess}}).dump(),
                           "application/json");
      REQUIRE(sent);
      REQUIRE(sent->status == 200);
      CHECK(json::parse(sent->body)["accepted"] == true);
    }
  }
  REQUIRE(svc.WaitFinished(id, 10s));

  // What the seat saw equals what the log recorded for it.
  auto view_res = cli.Get("/api/view", auth);
  REQUIRE(view_res);
  const json view = json::parse(view_res->body);
  CHECK(view["state"] == "finished");
  CHECK(view["phase"] == "game_over");

  const auto result = svc.Result(id);
  REQUIRE(result);
  const SessionLog log = ReadSessionLog(logs / "http-session/log.jsonl");
  CHECK(SerializeSessionLog(log) == SerializeSessionLog(*result));
  CHECK(log.meta.source == "live");
  REQUIRE(log.games.size() == 10);
  REQUIRE(view["history"].size() == 10);
  std::vector<std::string> logged;
  for (size_t g = 0; g < log.games.size(); ++g) {
    REQUIRE(view["history"][g].size() == log.games[g].rounds.size());
    for (size_t r = 0; r < log.games[g].rounds.size(); ++r) {
      const RoundLog& round = log.games[g].rounds[r];
      CHECK(view["history"][g][r]["feedback"] == round.rendered[0]);
      CHECK(view["history"][g][r]["guess"] == round.guesses[0]);
      logged.push_back(round.rendered[0]);
    }
    if (log.games[g].mode() == FeedbackMode::kNumerical) {
      CHECK(log.games[g].status == GameStatus::kSolved);
    }
  }
  CHECK(seen_feedback == logged);
  const VerifyResult verified = VerifyLog(log);
  CHECK_MESSAGE(verified.ok, verified.detail);

  // Server-sent events replay the stream, and resume after Last-Event-ID.
  std::string body;
  auto stream = cli.Get("/api/stream?token=" + token);
  REQUIRE(stream);
  CHECK(stream->get_header_value("Content-Type") == "text/event-stream");
  CHECK(stream->body.find("id: 1\nevent: session_started\n") == 0);
  CHECK(stream->body.find("event: session_over") != std::string::npos);
  httplib::Headers resume = {{"Authorization", "Bearer " + token},
                             {"Last-Event-ID", std::to_string(after - 1)}};
  auto tail = cli.Get("/api/stream", resume);
  REQUIRE(tail);
  CHECK(tail->body == "id: " + std::to_string(after) +
                          "\nevent: session_over\ndata: " +
                          json({{"status", "complete"}}).dump() + "\n\n");
  server.Stop();
}

TEST_CASE("HTTP expired lobby answers 410") {
  LiveOptions options;
  options.lobby_ttl = 50ms;
  LiveService svc(options);
  LiveServer server(svc);
  const int port = server.Start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);
  auto created = cli.Post("/api/lobbies",
                          "agents:\n  - {kind: human}\n  - {kind: scripted, policy: proportional}\n",
                          "application/yaml");
  REQUIRE(created);
  REQUIRE_MESSAGE(created->status == 201, created->body);
  const json lobby = json::parse(created->body);
  std::this_thread::sleep_for(120ms);
  auto status = cli.Get("/api/lobbies/" + lobby["lobby_id"].get<std::string>());
  REQUIRE(status);
  CHECK(status->status == 410);
  CHECK(json::parse(status->body)["error"] == "LobbyExpired");
  server.Stop();
}

}  // TEST_SUITE

}  // namespace gbs
