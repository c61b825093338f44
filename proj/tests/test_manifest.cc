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
#include <map>
#include <set>

#include "doctest.h"
#include "gbs/manifest.h"
#include "support.h"

using namespace gbs;
using gbs::testing::SourcePath;

namespace {

std::string ErrorOf(const std::string& text) {
  try {
    ParseManifest(text, "m.yaml");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kManifestError);
    return e.what();
  }
  FAIL("expected ManifestError for:\n" << text);
  return "";
}

bool Contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_SUITE("manifest") {

TEST_CASE("templates fill seats and ids") {
  const Manifest m = ParseManifest(
      "experiment: demo\n"
      "base_seed: 7\n"
      "defaults:\n"
      "  agent: {kind: scripted, policy: proportional}\n"
      "sessions:\n"
      "  - id: s1\n"
      "    players: 3\n"
      "  - id: s2\n"
      "    condition: mixed\n"
      "    agents:\n"
      "      - {model: deepseek-chat, temperature: 0.6}\n"
      "      - {model: gemini-2.0-flash, temperature: 0.2, count: 2}\n",
      "m.yaml");
  CHECK(m.experiment.name == "demo");
  REQUIRE(m.experiment.sessions.size() == 2);
  const SessionConfig& s1 = m.experiment.sessions[0];
  REQUIRE(s1.agents.size() == 3);
  CHECK(s1.agents[2].agent_id == "C");
  CHECK(s1.agents[0].policy == "proportional");
  CHECK(s1.base_seed == SessionSeed(7, 0));
  CHECK(SessionSeed(7, 0) == MixSeed(8));
  const SessionConfig& s2 = m.experiment.sessions[1];
  REQUIRE(s2.agents.size() == 3);
  CHECK(s2.agents[0].kind == AgentKind::kLlm);
  CHECK(s2.agents[1].model_id == "gemini-2.0-flash");
  CHECK(*s2.agents[2].temperature == 0.2);
  CHECK(s2.condition == "mixed");
  std::set<std::string> ids;
  for (const auto& a : s2.agents) ids.insert(a.agent_id);
  CHECK(ids.size() == 3);
}

TEST_CASE("explicit games, fixed targets and size overrides") {
  const Manifest m = ParseManifest(
      "experiment: fixed\n"
      "size_categories: {10: medium}\n"
      "sessions:\n"
      "  - id: s\n"
      "    players: 10\n"
      "    agent: {policy: proportional}\n"
      "    target_policy: fixed_list\n"
      "    games:\n"
      "      - {mode: numerical, target: 400}\n"
      "      - {mode: directional, target: 260}\n",
      "m.yaml");
  const SessionConfig& s = m.experiment.sessions[0];
  REQUIRE(s.games.size() == 2);
  CHECK(s.games[0].target == 400);
  CHECK(s.games[1].mode == FeedbackMode::kDirectional);
  CHECK(m.experiment.CategoryFor(10) == SizeCategory::kMedium);
}

TEST_CASE("errors carry file, line and column") {
  std::string e = ErrorOf(
      "experiment: x\n"
      "sessions:\n"
      "  - id: a\n"
      "    players: 2\n"
      "    bogus: 1\n");
  CHECK(Contains(e, "m.yaml:5:5"));
  CHECK(Contains(e, "bogus"));

  e = ErrorOf(
      "experiment: x\n"
      "sessions:\n"
      "  - id: a\n"
      "    players: 2\n"
      "    agent: {policy: proportional}\n"
      "    game_count: 3\n");
  CHECK(Contains(e, "m.yaml:3:"));
  CHECK(Contains(e, "game_count"));

  e = ErrorOf(
      "experiment: x\n"
      "sessions:\n"
      "  - id: a\n"
      "    players: 2\n"
      "    agent: {policy: telepathy}\n");
  CHECK(Contains(e, "m.yaml:"));
  CHECK(Contains(e, "telepathy"));

  e = ErrorOf("experiment: x\nsessions:\n  - id: a\n    players: two\n");
  CHECK(Contains(e, "m.yaml:4:"));

  e = ErrorOf("experiment: [unclosed\n");
  CHECK(Contains(e, "m.yaml:"));

  e = ErrorOf(
      "experiment: x\n"
      "sessions:\n"
      "  - id: a\n"
      "    players: 2\n"
      "    agent: {policy: proportional, id: fixed}\n");
  CHECK(Contains(e, "m.yaml:"));
}

TEST_CASE("base seed overrides reach derived sessions only") {
  Manifest m = ParseManifest(
      "experiment: seeds\n"
      "base_seed: 1\n"
      "defaults: {agent: {policy: proportional}}\n"
      "sessions:\n"
      "  - {id: a, players: 2}\n"
      "  - {id: b, players: 2, base_seed: 99}\n",
      "m.yaml");
  m.SetBaseSeed(5);
  CHECK(m.experiment.sessions[0].base_seed == SessionSeed(5, 0));
  CHECK(m.experiment.sessions[1].base_seed == 99);
}

TEST_CASE("provider overrides merge with the built-ins") {
  const Manifest m = ParseManifest(
      "experiment: p\n"
      "providers:\n"
      "  - {name: ollama, base_url: 'http://gpu-box:11434'}\n"
      "defaults: {agent: {policy: proportional}}\n"
      "sessions: [{id: a, players: 2}]\n",
      "m.yaml");
  bool found = false;
  for (const auto& e : m.providers) {
    if (e.name == "ollama") {
      found = true;
      CHECK(e.base_url == "http://gpu-box:11434");
      CHECK_FALSE(e.models.empty());
    }
  }
  CHECK(found);
  CHECK(m.providers.size() == DefaultEndpoints().size());
}

TEST_CASE("session templates for lobbies") {
  const SessionConfig s = ParseSessionTemplate(
      "id: lobby\n"
      "agents:\n"
      "  - {kind: human}\n"
      "  - {kind: scripted, policy: proportional}\n",
      "template");
  REQUIRE(s.agents.size() == 2);
  CHECK(s.agents[0].kind == AgentKind::kHuman);
  CHECK(s.agents[1].agent_id == "B");
  CHECK_THROWS_AS(ParseSessionTemplate("agents: 3\n", "template"), Error);
}

TEST_CASE("shipped manifests load") {
  const Manifest oracle = LoadManifest(SourcePath("manifests/scripted-oracle.manifest"));
  REQUIRE(oracle.experiment.sessions.size() == 18);
  std::vector<int> sizes;
  for (const auto& s : oracle.experiment.sessions) sizes.push_back(s.n_players());
  CHECK(sizes == ReferenceGroupSizes());

  const Manifest llm = LoadManifest(SourcePath("manifests/llm-18-sessions.manifest"));
  CHECK(llm.experiment.sessions.size() == 7 * 18);
  std::map<std::string, int> per_condition;
  for (const auto& s : llm.experiment.sessions) ++per_condition[s.condition];
  CHECK(per_condition.size() == 7);
  for (const auto& [condition, count] : per_condition) CHECK(count == 18);

  const Manifest mixed = LoadManifest(SourcePath("manifests/mixed-models.manifest"));
  REQUIRE(mixed.experiment.sessions.size() == 18);
  for (size_t i = 0; i < 18; ++i) {
    CHECK(mixed.experiment.sessions[i].n_players() == ReferenceGroupSizes()[i]);
  }

  const Manifest sweep = LoadManifest(SourcePath("manifests/temperature-sweep.manifest"));
  CHECK(sweep.experiment.sessions.size() > 0);
  for (const auto& s : sweep.experiment.sessions) CHECK(s.n_players() <= 3);
}

}  // TEST_SUITE
