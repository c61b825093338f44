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

#include "gbs/manifest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace gbs {
namespace {

const std::set<std::string> kSessionKeys = {
    "id",         "condition",   "players",        "agent",
    "agents",     "base_seed",   "game_count",     "first_feedback_mode",
    "target_policy", "games",    "guess_min",      "guess_max",
    "max_rounds", "target_min",  "target_max",     "include_group_sum",
    "size_category"};
const std::set<std::string> kAgentKeys = {
    "id", "kind", "model", "temperature", "seed", "prompt_variant", "policy",
    "params", "count"};
const std::set<std::string> kProviderKeys = {
    "name", "base_url", "path", "api_key_env", "auth_header", "auth_scheme",
    "supports_seed", "supports_temperature", "timeout_ms", "models"};
const std::set<std::string> kTopKeys = {
    "experiment", "base_seed", "replications", "size_categories", "providers",
    "defaults", "sessions"};

class Parser {
 public:
  explicit Parser(std::string_view source) : source_(source) {}

  [[noreturn]] void Fail(const YAML::Mark& mark, const std::string& message) const {
    std::string where = source_;
    if (!mark.is_null()) {
      where += ":" + std::to_string(mark.line + 1) + ":" +
               std::to_string(mark.column + 1);
    }
    throw Error(ErrorCode::kManifestError, where + ": " + message);
  }
  [[noreturn]] void Fail(const YAML::Node& node, const std::string& message) const {
    Fail(node.Mark(), message);
  }

  YAML::Node Load(std::string_view text) const {
    try {
      return YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
      Fail(e.mark, e.msg);
    }
  }

  void ExpectMap(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) Fail(node, what + " must be a mapping");
  }

  void CheckKeys(const YAML::Node& node, const std::set<std::string>& allowed,
                 const std::string& what) const {
    ExpectMap(node, what);
    for (const auto& item : node) {
      const std::string key = item.first.Scalar();
      if (!allowed.count(key)) {
        Fail(item.first, "unknown key '" + key + "' in " + what);
      }
    }
  }

  template <typename T>
  T As(const YAML::Node& node, const std::string& field) const {
    if (!node.IsScalar()) Fail(node, "field '" + field + "' must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      Fail(node, "field '" + field + "' has an invalid value '" +
                     node.Scalar() + "'");
    }
  }

  // Runs `f`, turning configuration errors into located manifest errors.
  template <typename F>
  auto At(const YAML::Node& node, const std::string& field, F&& f) const {
    try {
      return f();
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kManifestError) throw;
      Fail(node, field + ": " + e.detail());
    }
  }

  AgentSpec ParseAgent(const YAML::Node& node, int* count) const {
    CheckKeys(node, kAgentKeys, "agent");
    AgentSpec spec;
    if (node["model"]) spec.model_id = As<std::string>(node["model"], "model");
    spec.kind = spec.model_id ? AgentKind::kLlm : AgentKind::kScripted;
    if (const auto n = node["kind"]) {
      spec.kind = At(n, "kind", [&] { return ParseAgentKind(As<std::string>(n, "kind")); });
    }
    if (node["id"]) spec.agent_id = As<std::string>(node["id"], "id");
    if (node["temperature"]) {
      spec.temperature = As<double>(node["temperature"], "temperature");
    }
    if (node["seed"]) spec.seed = As<int64_t>(node["seed"], "seed");
    if (const auto n = node["prompt_variant"]) {
      spec.prompt_variant = At(n, "prompt_variant", [&] {
        return ParsePromptVariant(As<std::string>(n, "prompt_variant"));
      });
    }
    if (node["policy"]) spec.policy = As<std::string>(node["policy"], "policy");
    if (const auto params = node["params"]) {
      ExpectMap(params, "params");
      for (const auto& item : params) {
        spec.policy_params[item.first.Scalar()] =
            As<std::string>(item.second, item.first.Scalar());
      }
    }
    *count = 1;
    if (const auto n = node["count"]) {
      *count = As<int>(n, "count");
      if (*count < 1) Fail(n, "field 'count' must be >= 1");
    }
    return spec;
  }

  // `session` keys win over `defaults` keys.
  SessionConfig ParseSession(const YAML::Node& session,
                             const YAML::Node& defaults,
                             bool* explicit_seed) const {
    CheckKeys(session, kSessionKeys, "session");
    auto get = [&](const char* key) -> YAML::Node {
      if (session[key]) return session[key];
      if (defaults && defaults.IsMap() && defaults[key]) return defaults[key];
      return YAML::Node(YAML::NodeType::Undefined);
    };

    SessionConfig config;
    const YAML::Node id = session["id"];
    if (!id) Fail(session, "session is missing 'id'");
    config.session_id = As<std::string>(id, "id");
    if (auto n = get("condition")) config.condition = As<std::string>(n, "condition");
    if (auto n = get("game_count")) config.game_count = As<int>(n, "game_count");
    if (auto n = get("first_feedback_mode")) {
      config.first_feedback_mode = At(n, "first_feedback_mode", [&] {
        return ParseFeedbackMode(As<std::string>(n, "first_feedback_mode"));
      });
    }
    if (auto n = get("target_policy")) {
      config.target_policy = At(n, "target_policy", [&] {
        return ParseTargetPolicy(As<std::string>(n, "target_policy"));
      });
    }
    if (auto n = get("guess_min")) config.guess_min = As<int>(n, "guess_min");
    if (auto n = get("guess_max")) config.guess_max = As<int>(n, "guess_max");
    if (auto n = get("max_rounds")) config.max_rounds = As<int>(n, "max_rounds");
    if (auto n = get("target_min")) config.target_min = As<int>(n, "target_min");
    if (auto n = get("target_max")) config.target_max = As<int>(n, "target_max");
    if (auto n = get("include_group_sum")) {
      config.include_group_sum_in_feedback = As<bool>(n, "include_group_sum");
    }
    if (auto n = get("size_category")) {
      config.size_category = At(n, "size_category", [&] {
        return ParseSizeCategory(As<std::string>(n, "size_category"));
      });
    }
    *explicit_seed = false;
    if (auto n = session["base_seed"]) {
      config.base_seed = As<uint64_t>(n, "base_seed");
      *explicit_seed = true;
    }
    if (auto games = get("games")) {
      if (!games.IsSequence()) Fail(games, "field 'games' must be a list");
      for (const auto& g : games) {
        CheckKeys(g, {"mode", "target"}, "game");
        GameSpec spec;
        if (!g["mode"]) Fail(g, "game is missing 'mode'");
        spec.mode = At(g["mode"], "mode", [&] {
          return ParseFeedbackMode(As<std::string>(g["mode"], "mode"));
        });
        if (g["target"]) spec.target = As<int>(g["target"], "target");
        config.games.push_back(spec);
      }
    }

    const YAML::Node agents = get("agents");
    const YAML::Node players = get("players");
    const YAML::Node tmpl = get("agent");
    if (agents) {
      if (!agents.IsSequence()) Fail(agents, "field 'agents' must be a list");
      for (const auto& a : agents) {
        int count = 1;
        AgentSpec spec = ParseAgent(a, &count);
        for (int k = 0; k < count; ++k) {
          AgentSpec seat = spec;
          if (seat.agent_id.empty()) {
            seat.agent_id = PlayerLetter(static_cast<int>(config.agents.size()));
          } else if (count > 1) {
            seat.agent_id += "-" + std::to_string(k + 1);
          }
          config.agents.push_back(std::move(seat));
        }
      }
      if (players && As<int>(players, "players") != config.n_players()) {
        Fail(players, "'players' is " + players.Scalar() + " but 'agents' fill " +
                          std::to_string(config.n_players()) + " seats");
      }
    } else {
      if (!players) Fail(session, "session needs 'agents' or 'players'");
      if (!tmpl) Fail(players, "'players' needs an 'agent' template");
      const int n = As<int>(players, "players");
      if (n < 1) Fail(players, "'players' must be >= 1");
      int count = 1;
      AgentSpec spec = ParseAgent(tmpl, &count);
      if (!spec.agent_id.empty()) Fail(tmpl, "an agent template cannot set 'id'");
      if (spec.seed) Fail(tmpl, "an agent template cannot set 'seed'");
      for (int i = 0; i < n; ++i) {
        AgentSpec seat = spec;
        seat.agent_id = PlayerLetter(i);
        config.agents.push_back(std::move(seat));
      }
    }
    At(session, "session " + config.session_id, [&] {
      config.Validate();
      return 0;
    });
    return config;
  }

  EndpointConfig ParseProvider(const YAML::Node& node,
                               const std::vector<EndpointConfig>& builtins) const {
    CheckKeys(node, kProviderKeys, "provider");
    if (!node["name"]) Fail(node, "provider is missing 'name'");
    EndpointConfig e;
    e.name = As<std::string>(node["name"], "name");
    for (const auto& b : builtins) {
      if (b.name == e.name) e = b;
    }
    if (auto n = node["base_url"]) e.base_url = As<std::string>(n, "base_url");
    if (auto n = node["path"]) e.path = As<std::string>(n, "path");
    if (auto n = node["api_key_env"]) e.api_key_env = As<std::string>(n, "api_key_env");
    if (auto n = node["auth_header"]) e.auth_header = As<std::string>(n, "auth_header");
    if (auto n = node["auth_scheme"]) e.auth_scheme = As<std::string>(n, "auth_scheme");
    if (auto n = node["supports_seed"]) e.supports_seed = As<bool>(n, "supports_seed");
    if (auto n = node["supports_temperature"]) {
      e.supports_temperature = As<bool>(n, "supports_temperature");
    }
    if (auto n = node["timeout_ms"]) e.timeout_ms = As<int>(n, "timeout_ms");
    if (auto n = node["models"]) {
      if (!n.IsSequence()) Fail(n, "field 'models' must be a list");
      e.models.clear();
      for (const auto& m : n) e.models.push_back(As<std::string>(m, "models"));
    }
    if (e.base_url.empty()) Fail(node, "provider '" + e.name + "' has no base_url");
    return e;
  }

  Manifest ParseManifest(std::string_view text) const {
    const YAML::Node root = Load(text);
    if (!root || root.IsNull()) Fail(YAML::Mark::null_mark(), "manifest is empty");
    CheckKeys(root, kTopKeys, "manifest");

    Manifest manifest;
    ExperimentConfig& experiment = manifest.experiment;
    if (!root["experiment"]) Fail(root, "manifest is missing 'experiment'");
    experiment.name = As<std::string>(root["experiment"], "experiment");
    if (auto n = root["base_seed"]) manifest.base_seed = As<uint64_t>(n, "base_seed");
    if (auto n = root["replications"]) {
      experiment.replications = As<int>(n, "replications");
      if (experiment.replications < 1) Fail(n, "'replications' must be >= 1");
    }
    if (auto n = root["size_categories"]) {
      ExpectMap(n, "size_categories");
      for (const auto& item : n) {
        const int players = As<int>(item.first, "size_categories");
        experiment.size_categories[players] = At(item.second, "size_categories", [&] {
          return ParseSizeCategory(As<std::string>(item.second, "size_categories"));
        });
      }
    }

    manifest.providers = DefaultEndpoints();
    if (auto n = root["providers"]) {
      if (!n.IsSequence()) Fail(n, "field 'providers' must be a list");
      for (const auto& p : n) {
        EndpointConfig e = ParseProvider(p, manifest.providers);
        auto it = std::find_if(manifest.providers.begin(), manifest.providers.end(),
                               [&](const EndpointConfig& b) { return b.name == e.name; });
        if (it != manifest.providers.end()) {
          *it = e;
        } else {
          manifest.providers.push_back(e);
        }
      }
    }

    const YAML::Node defaults = root["defaults"];
    if (defaults) {
      std::set<std::string> keys = kSessionKeys;
      keys.erase("id");
      keys.erase("base_seed");
      CheckKeys(defaults, keys, "defaults");
    }
    const YAML::Node sessions = root["sessions"];
    if (!sessions) Fail(root, "manifest is missing 'sessions'");
    if (!sessions.IsSequence() || sessions.size() == 0) {
      Fail(sessions, "field 'sessions' must be a non-empty list");
    }
    std::set<std::string> ids;
    for (const auto& s : sessions) {
      bool explicit_seed = false;
      SessionConfig config = ParseSession(s, defaults, &explicit_seed);
      if (!ids.insert(config.session_id).second) {
        Fail(s["id"], "duplicate session id '" + config.session_id + "'");
      }
      experiment.sessions.push_back(std::move(config));
      manifest.explicit_session_seed.push_back(explicit_seed);
    }
    manifest.SetBaseSeed(manifest.base_seed);
    return manifest;
  }

 private:
  std::string source_;
};

}  // namespace

uint64_t SessionSeed(uint64_t experiment_seed, int session_index) {
  return MixSeed(experiment_seed + static_cast<uint64_t>(session_index) + 1);
}

void Manifest::SetBaseSeed(uint64_t seed) {
  base_seed = seed;
  for (size_t i = 0; i < experiment.sessions.size(); ++i) {
    if (i < explicit_session_seed.size() && explicit_session_seed[i]) continue;
    experiment.sessions[i].base_seed = SessionSeed(seed, static_cast<int>(i));
  }
}

Manifest ParseManifest(std::string_view text, std::string_view source_name) {
  return Parser(source_name).ParseManifest(text);
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kManifestError, path.string() + ": cannot open file");
  }
  std::ostringstream text;
  text << in.rdbuf();
  return ParseManifest(text.str(), path.string());
}

SessionConfig ParseSessionTemplate(std::string_view text,
                                   std::string_view source_name) {
  Parser parser(source_name);
  const YAML::Node root = parser.Load(text);
  if (!root || !root.IsMap()) {
    parser.Fail(YAML::Mark::null_mark(), "template must be a mapping");
  }
  // Lobby templates may leave the id to the live service.
  YAML::Node session = YAML::Clone(root);
  const bool named = static_cast<bool>(session["id"]);
  if (!named) session["id"] = "lobby";
  bool explicit_seed = false;
  SessionConfig config = parser.ParseSession(session, YAML::Node(), &explicit_seed);
  if (!named) config.session_id.clear();
  return config;
}

}  // namespace gbs
