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
#include <set>

#include "doctest.h"
#include "gbs/analytics.h"
#include "gbs/orchestrator.h"
#include "gbs/replay.h"
#include "json.hpp"
#include "support.h"

using namespace gbs;
using gbs::testing::ReadFile;
using gbs::testing::Scripted;
using gbs::testing::TempDir;
using json = nlohmann::json;

namespace {

SessionConfig Pair(const std::string& id, uint64_t seed = 1) {
  SessionConfig s;
  s.session_id = id;
  s.base_seed = seed;
  s.agents = {Scripted("A", "proportional", {{"on_directional", "bisection"}}),
              Scripted("B", "stay_prone", {{"on_directional", "bisection"}})};
  return s;
}

class Recorder : public SessionObserver {
 public:
  void OnSessionStart(const SessionLog&) override { events.push_back("session"); }
  void OnGameStart(const GameLog& g) override {
    events.push_back("game" + std::to_string(g.game_index));
  }
  void OnRoundStart(const GameLog&, int r) override {
    events.push_back("open" + std::to_string(r));
  }
  void OnRound(const GameLog&, const RoundLog& r) override {
    events.push_back("round" + std::to_string(r.round_index));
  }
  void OnGameEnd(const GameLog&) override { events.push_back("end"); }
  void OnSessionEnd(const SessionLog&) override { events.push_back("done"); }
  std::vector<std::string> events;
};

// Throws on the given round of game 1.
class Exploding : public Agent {
 public:
  Exploding(AgentSpec spec, int round) : Agent(std::move(spec)), round_(round) {}
  Decision Decide(const Observation& obs, const GameConfig&) override {
    if (obs.round_index == round_) throw std::runtime_error("boom");
    Decision d;
    d.guess = 1;
    return d;
  }

 private:
  int round_;
};

class ExplodingFactory : public AgentFactory {
 public:
  std::unique_ptr<Agent> Make(const AgentSpec& spec, const SessionConfig& s) override {
    if (spec.agent_id == "B") return std::make_unique<Exploding>(spec, 3);
    return inner_.Make(spec, s);
  }

 private:
  DefaultAgentFactory inner_;
};

}  // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("sessions alternate modes starting with directional") {
  DefaultAgentFactory factory;
  const SessionLog log = RunSession(Pair("alt"), factory);
  REQUIRE(log.games.size() == 10);
  for (size_t g = 0; g < 10; ++g) {
    CHECK(log.games[g].game_index == static_cast<int>(g) + 1);
    CHECK(log.games[g].mode() ==
          (g % 2 == 0 ? FeedbackMode::kDirectional : FeedbackMode::kNumerical));
  }
  CHECK(log.complete);
  CHECK(log.meta.size_category == SizeCategory::kSmall);
}

TEST_CASE("targets come from the session seed") {
  SessionConfig s = Pair("targets", 1234);
  DefaultAgentFactory factory;
  const SessionLog log = RunSession(s, factory);
  Rng oracle(MixSeed(1234ULL ^ 0x7461726765747321ULL));
  for (const GameLog& g : log.games) {
    CHECK(g.target == SampleTarget(oracle, s.GameConfigFor(g.mode())));
    CHECK(g.target >= 51);
    CHECK(g.target <= 100);
  }
}

TEST_CASE("explicit games pin modes and targets") {
  SessionConfig s = Pair("fixed");
  s.target_policy = TargetPolicy::kFixedList;
  s.games = {{FeedbackMode::kNumerical, 77}, {FeedbackMode::kNumerical, 52},
             {FeedbackMode::kDirectional, 99}};
  DefaultAgentFactory factory;
  const SessionLog log = RunSession(s, factory);
  REQUIRE(log.games.size() == 3);
  CHECK(log.games[0].target == 77);
  CHECK(log.games[1].target == 52);
  CHECK(log.games[2].target == 99);
  CHECK(log.games[2].mode() == FeedbackMode::kDirectional);
}

TEST_CASE("session validation") {
  SessionConfig s = Pair("bad");
  s.game_count = 3;
  CHECK_THROWS_AS(s.Validate(), Error);
  s = Pair("bad");
  s.agents[1].agent_id = "A";
  CHECK_THROWS_AS(s.Validate(), Error);
  s = Pair("bad");
  s.target_policy = TargetPolicy::kFixedList;
  CHECK_THROWS_AS(s.Validate(), Error);
  s = Pair("bad");
  s.games = {{FeedbackMode::kNumerical, 101}};
  CHECK_THROWS_AS(s.Validate(), Error);
  CHECK_NOTHROW(Pair("good").Validate());
}

TEST_CASE("agent seeds follow the documented derivation") {
  SessionConfig s = Pair("seeds", 0xABCDEF);
  s.agents[1].seed = 42;
  const auto specs = ResolveAgentSeeds(s);
  const uint64_t expected = (0xABCDEFULL ^ (1ULL * 0x9E3779B9ULL)) & 0x7FFFFFFFULL;
  CHECK(*specs[0].seed == static_cast<int64_t>(expected));
  CHECK(*specs[1].seed == 42);
}

TEST_CASE("equal seeds give equal sessions; parallel decisions change nothing") {
  DefaultAgentFactory f1, f2;
  RunOptions sequential;
  sequential.clock = ClockKind::kLogical;
  RunOptions parallel = sequential;
  parallel.parallel_decisions = true;
  SessionConfig s = Pair("same", 99);
  s.agents.push_back(Scripted("C", "uniform_random"));
  const SessionLog a = RunSession(s, f1, sequential);
  const SessionLog b = RunSession(s, f2, parallel);
  CHECK(SerializeSessionLog(a) == SerializeSessionLog(b));
  DefaultAgentFactory f3;
  const SessionLog c = RunSession(Pair("same", 100), f3, sequential);
  CHECK(SerializeSessionLog(a) != SerializeSessionLog(c));
}

TEST_CASE("observers see every step in order") {
  Recorder recorder;
  RunOptions options;
  options.observers = {&recorder};
  SessionConfig s = Pair("obs");
  s.target_policy = TargetPolicy::kFixedList;
  s.agents[1] = Scripted("B", "proportional");
  s.games = {{FeedbackMode::kNumerical, 60}};  // 25 + 25 = 50, then 60
  DefaultAgentFactory factory;
  RunSession(s, factory, options);
  CHECK(recorder.events == std::vector<std::string>{"session", "game1", "open1",
                                                    "round1", "open2", "round2",
                                                    "end", "done"});
}

TEST_CASE("agent failures abort the session with the partial game kept") {
  Recorder recorder;
  RunOptions options;
  options.observers = {&recorder};
  ExplodingFactory factory;
  SessionConfig s = Pair("boom");
  try {
    RunSession(s, factory, options);
    FAIL("expected AgentFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kAgentFailure);
    CHECK(std::string(e.what()).find("B: boom") != std::string::npos);
  }
  CHECK(std::count(recorder.events.begin(), recorder.events.end(), "round2") == 1);
  CHECK(std::find(recorder.events.begin(), recorder.events.end(), "done") ==
        recorder.events.end());
}

TEST_CASE("group-sum variant sees the sum in its feedback") {
  SessionConfig s = Pair("sum");
  s.agents[0] = AgentSpec{};
  s.agents[0].agent_id = "A";
  s.agents[0].kind = AgentKind::kReplay;
  s.agents[0].prompt_variant = PromptVariant::kZeroShotStrategySum;
  s.agents[1] = Scripted("B", "constant", {{"value", "25"}});
  s.target_policy = TargetPolicy::kFixedList;
  s.games = {{FeedbackMode::kDirectional, 60}, {FeedbackMode::kDirectional, 60}};
  DefaultAgentFactory factory;
  factory.SetTrace("A", Trace{{20, 35}, {25, 35}});
  const SessionLog log = RunSession(s, factory);
  CHECK(log.games[0].rounds[0].rendered[0].find("was 45 which was too low") !=
        std::string::npos);
  CHECK(log.games[0].rounds[0].rendered[1].find("45") == std::string::npos);
}

TEST_CASE("replications get fresh seeds and suffixed ids") {
  ExperimentConfig config;
  config.name = "reps";
  config.replications = 3;
  config.sessions = {Pair("s1", 7), Pair("s2", 8)};
  config.sessions[0].agents[0].seed = 5;
  const auto expanded = ExpandReplications(config);
  REQUIRE(expanded.size() == 6);
  std::set<std::string> ids;
  std::set<uint64_t> seeds;
  for (const auto& s : expanded) {
    ids.insert(s.session_id);
    seeds.insert(s.base_seed);
    CHECK(s.experiment == "reps");
  }
  CHECK(ids == std::set<std::string>{"s1", "s2", "s1-r1", "s2-r1", "s1-r2", "s2-r2"});
  CHECK(seeds.size() == 6);
  CHECK(expanded[0].base_seed == 7);
  CHECK(expanded[2].base_seed == ReplicationSeed(7, 1));
  CHECK(*expanded[2].agents[0].seed ==
        static_cast<int64_t>((5ULL ^ MixSeed(1)) & 0x7FFFFFFFULL));
  CHECK(expanded[2].replication == 1);
}

TEST_CASE("experiments isolate failures and write a manifest") {
  TempDir dir;
  ExperimentConfig config;
  config.name = "mixed";
  config.sessions = {Pair("ok1"), Pair("bad"), Pair("ok2")};
  ExperimentRunOptions options;
  options.out_dir = dir.path();
  options.session_jobs = 2;
  options.run.clock = ClockKind::kLogical;
  const ExperimentResult result = RunExperiment(
      config,
      [](const SessionConfig& s) -> std::unique_ptr<AgentFactory> {
        if (s.session_id == "bad") return std::make_unique<ExplodingFactory>();
        return std::make_unique<DefaultAgentFactory>();
      },
      options);
  CHECK(result.logs.size() == 2);
  REQUIRE(result.failures.size() == 1);
  CHECK(result.failures[0].session_id == "bad");
  const json manifest = json::parse(ReadFile(dir / "manifest.json"));
  REQUIRE(manifest["sessions"].size() == 3);
  CHECK(manifest["sessions"][1]["status"] == "failed");
  CHECK(manifest["sessions"][0]["status"] == "ok");
  for (const char* id : {"ok1", "ok2"}) {
    const SessionLog log = ReadSessionLog(dir.path() / id / "log.jsonl");
    CHECK(VerifyLog(log).ok);
  }
  ReadOptions lenient;
  lenient.allow_incomplete = true;
  const SessionLog partial = ReadSessionLog(dir.path() / "bad" / "log.jsonl", lenient);
  CHECK_FALSE(partial.complete);
}

TEST_CASE("size categories and the reference group sizes") {
  ExperimentConfig config;
  CHECK(config.CategoryFor(3) == SizeCategory::kSmall);
  CHECK(config.CategoryFor(4) == SizeCategory::kMedium);
  CHECK(config.CategoryFor(7) == SizeCategory::kMedium);
  CHECK(config.CategoryFor(10) == SizeCategory::kLarge);
  config.size_categories[10] = SizeCategory::kMedium;
  CHECK(config.CategoryFor(10) == SizeCategory::kMedium);
  const auto& sizes = ReferenceGroupSizes();
  CHECK(sizes.size() == 18);
  CHECK(std::count(sizes.begin(), sizes.end(), 2) == 6);
  CHECK(*std::max_element(sizes.begin(), sizes.end()) == 17);
}

}  // TEST_SUITE
