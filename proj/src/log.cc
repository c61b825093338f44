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

#include "gbs/log.h"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

#include "json.hpp"

namespace gbs {
namespace {

using nlohmann::json;

json AgentToJson(const AgentSpec& spec) {
  json j;
  j["agent_id"] = spec.agent_id;
  j["kind"] = AgentKindName(spec.kind);
  j["model_id"] = spec.model_id ? json(*spec.model_id) : json(nullptr);
  j["temperature"] = spec.temperature ? json(*spec.temperature) : json(nullptr);
  j["seed"] = spec.seed ? json(*spec.seed) : json(nullptr);
  j["prompt_variant"] = PromptVariantName(spec.prompt_variant);
  j["policy"] = spec.policy;
  j["params"] = spec.policy_params;
  return j;
}

AgentSpec AgentFromJson(const json& j) {
  AgentSpec spec;
  spec.agent_id = j.at("agent_id").get<std::string>();
  spec.kind = ParseAgentKind(j.at("kind").get<std::string>());
  if (!j.at("model_id").is_null()) spec.model_id = j["model_id"].get<std::string>();
  if (!j.at("temperature").is_null()) {
    spec.temperature = j["temperature"].get<double>();
  }
  if (!j.at("seed").is_null()) spec.seed = j["seed"].get<int64_t>();
  spec.prompt_variant =
      ParsePromptVariant(j.at("prompt_variant").get<std::string>());
  spec.policy = j.at("policy").get<std::string>();
  spec.policy_params =
      j.at("params").get<std::map<std::string, std::string>>();
  return spec;
}

json ConfigToJson(const GameConfig& config) {
  json j;
  j["n_players"] = config.n_players;
  j["guess_min"] = config.guess_min;
  j["guess_max"] = config.guess_max;
  j["target_min"] = config.target_min;
  j["target_max"] = config.target_max;
  j["max_rounds"] = config.max_rounds;
  j["feedback_mode"] = FeedbackModeName(config.feedback_mode);
  j["include_group_sum"] = config.include_group_sum_in_feedback;
  return j;
}

GameConfig ConfigFromJson(const json& j) {
  GameConfig config;
  config.n_players = j.at("n_players").get<int>();
  config.guess_min = j.at("guess_min").get<int>();
  config.guess_max = j.at("guess_max").get<int>();
  config.target_min = j.at("target_min").get<int>();
  config.target_max = j.at("target_max").get<int>();
  config.max_rounds = j.at("max_rounds").get<int>();
  config.feedback_mode = ParseFeedbackMode(j.at("feedback_mode").get<std::string>());
  config.include_group_sum_in_feedback = j.at("include_group_sum").get<bool>();
  return config;
}

json FeedbackToJson(const FeedbackSignal& signal) {
  return {{"direction", DirectionName(signal.direction)},
          {"magnitude", signal.magnitude},
          {"group_sum", signal.group_sum},
          {"solved", signal.solved}};
}

FeedbackSignal FeedbackFromJson(const json& j) {
  FeedbackSignal signal;
  signal.direction = ParseDirection(j.at("direction").get<std::string>());
  signal.magnitude = j.at("magnitude").get<int>();
  signal.group_sum = j.at("group_sum").get<int>();
  signal.solved = j.at("solved").get<bool>();
  return signal;
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) {
    const auto first = field.find_first_not_of(" \t\r");
    const auto last = field.find_last_not_of(" \t\r");
    fields.push_back(first == std::string::npos
                         ? ""
                         : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::optional<long long> ParseInteger(const std::string& text) {
  long long value = 0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (begin != end && *begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || begin == end) return std::nullopt;
  return value;
}

class LogParser {
 public:
  LogParser(std::string_view source, const ReadOptions& options)
      : source_(source), options_(options) {}

  void Line(const std::string& text) {
    ++line_;
    if (text.empty()) return;
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) Fail("malformed JSON");
    try {
      const std::string event = j.at("event").get<std::string>();
      if (!header_seen_ && event != "session") Fail("first event must be session");
      if (event == "session") {
        Header(j);
      } else if (event == "game_start") {
        GameStart(j);
      } else if (event == "round") {
        Round(j);
      } else if (event == "game_end") {
        GameEnd(j);
      } else if (event == "session_end") {
        log_.complete = true;
        log_.finished_at_ms = j.at("ts").get<int64_t>();
      } else {
        Fail("unknown event '" + event + "'");
      }
    } catch (const json::exception& e) {
      Fail(e.what());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kValidationFailed ||
          e.code() == ErrorCode::kSchemaMismatch) {
        throw;
      }
      Fail(e.what());
    }
  }

  SessionLog Finish() {
    if (!header_seen_) {
      throw Error(ErrorCode::kValidationFailed,
                  std::string(source_) + ": empty log");
    }
    if (!options_.allow_incomplete) {
      if (!log_.games.empty() &&
          log_.games.back().status == GameStatus::kInProgress) {
        throw Error(ErrorCode::kValidationFailed,
                    std::string(source_) + ": game " +
                        std::to_string(log_.games.back().game_index) +
                        " has no game_end");
      }
      if (!log_.complete) {
        throw Error(ErrorCode::kValidationFailed,
                    std::string(source_) + ": missing session_end");
      }
    }
    return std::move(log_);
  }

 private:
  [[noreturn]] void Fail(const std::string& what) {
    throw Error(ErrorCode::kValidationFailed,
                std::string(source_) + ":" + std::to_string(line_) + ": " + what);
  }

  void Header(const json& j) {
    if (header_seen_) Fail("duplicate session header");
    header_seen_ = true;
    log_.schema_version = j.at("schema_version").get<int>();
    if (log_.schema_version != kSchemaVersion) {
      throw Error(ErrorCode::kSchemaMismatch,
                  std::string(source_) + ": schema_version " +
                      std::to_string(log_.schema_version) + " (reader supports " +
                      std::to_string(kSchemaVersion) + ")");
    }
    auto& meta = log_.meta;
    meta.session_id = j.at("session_id").get<std::string>();
    meta.experiment = j.at("experiment").get<std::string>();
    meta.condition = j.at("condition").get<std::string>();
    meta.source = j.at("source").get<std::string>();
    meta.replication = j.at("replication").get<int>();
    meta.base_seed = j.at("base_seed").get<uint64_t>();
    meta.n_players = j.at("n_players").get<int>();
    meta.size_category = ParseSizeCategory(j.at("size_category").get<std::string>());
    meta.game_count = j.at("game_count").get<int>();
    meta.started_at_ms = j.at("started_at_ms").get<int64_t>();
    for (const auto& agent : j.at("agents")) meta.agents.push_back(AgentFromJson(agent));
    if (static_cast<int>(meta.agents.size()) != meta.n_players) {
      Fail("agent count does not match n_players");
    }
  }

  void GameStart(const json& j) {
    if (!log_.games.empty() &&
        log_.games.back().status == GameStatus::kInProgress) {
      Fail("game_start before previous game ended");
    }
    GameLog game;
    game.game_index = j.at("game").get<int>();
    if (game.game_index != static_cast<int>(log_.games.size()) + 1) {
      Fail("game index " + std::to_string(game.game_index) + " out of sequence");
    }
    game.config = ConfigFromJson(j.at("config"));
    game.config.Validate();
    if (game.config.n_players != log_.meta.n_players) {
      Fail("game config n_players differs from session");
    }
    game.target = j.at("target").get<int>();
    if (game.target < game.config.target_min ||
        game.target > game.config.target_max) {
      Fail("target outside configured range");
    }
    game.started_at_ms = j.at("ts").get<int64_t>();
    log_.games.push_back(std::move(game));
  }

  void Round(const json& j) {
    if (log_.games.empty()) Fail("round before game_start");
    GameLog& game = log_.games.back();
    const int game_index = j.at("game").get<int>();
    RoundLog round;
    round.round_index = j.at("round").get<int>();
    const std::string where = "game " + std::to_string(game_index) + " round " +
                              std::to_string(round.round_index) + ": ";
    if (game_index != game.game_index) Fail(where + "not the open game");
    if (game.status != GameStatus::kInProgress) Fail(where + "game already over");
    if (round.round_index != static_cast<int>(game.rounds.size()) + 1) {
      Fail(where + "round out of sequence");
    }
    if (round.round_index > game.config.max_rounds) {
      Fail(where + "exceeds max_rounds");
    }
    round.guesses = j.at("guesses").get<std::vector<int>>();
    if (static_cast<int>(round.guesses.size()) != game.config.n_players) {
      Fail(where + "expected " + std::to_string(game.config.n_players) +
           " guesses, found " + std::to_string(round.guesses.size()));
    }
    int sum = 0;
    for (int guess : round.guesses) {
      if (!game.config.InGuessRange(guess)) {
        Fail(where + "guess " + std::to_string(guess) + " out of range");
      }
      sum += guess;
    }
    round.feedback = FeedbackFromJson(j.at("feedback"));
    const FeedbackSignal expected = ComputeFeedback(sum, game.target);
    if (round.feedback.group_sum != expected.group_sum) {
      Fail(where + "stored group_sum " + std::to_string(round.feedback.group_sum) +
           " != recomputed " + std::to_string(expected.group_sum));
    }
    if (round.feedback != expected) {
      Fail(where + "stored feedback does not match guesses and target");
    }
    round.rendered = j.at("rendered").get<std::vector<std::string>>();
    if (round.rendered.size() != round.guesses.size()) {
      Fail(where + "rendered feedback count mismatch");
    }
    for (const auto& d : j.at("decisions")) {
      DecisionRecord record;
      if (!d.at("raw_text").is_null()) record.raw_text = d["raw_text"].get<std::string>();
      record.raw_truncated = d.at("raw_truncated").get<bool>();
      record.parse_attempts = d.at("parse_attempts").get<int>();
      record.fallback = d.at("fallback").get<bool>();
      record.timed_out = d.at("timeout").get<bool>();
      round.decisions.push_back(std::move(record));
    }
    if (round.decisions.size() != round.guesses.size()) {
      Fail(where + "decision count mismatch");
    }
    round.timestamp_ms = j.at("ts").get<int64_t>();
    game.rounds.push_back(std::move(round));
  }

  void GameEnd(const json& j) {
    if (log_.games.empty()) Fail("game_end before game_start");
    GameLog& game = log_.games.back();
    if (j.at("game").get<int>() != game.game_index) Fail("game_end for wrong game");
    const GameStatus stored = ParseGameStatus(j.at("status").get<std::string>());
    const bool solved = !game.rounds.empty() && game.rounds.back().feedback.solved;
    const bool full = static_cast<int>(game.rounds.size()) == game.config.max_rounds;
    bool consistent = false;
    if (stored == GameStatus::kSolved) consistent = solved;
    if (stored == GameStatus::kExhausted) {
      // External traces may stop short of the cap without a solution.
      consistent = !solved && (full || log_.meta.source == "external");
    }
    if (!consistent) {
      Fail("game " + std::to_string(game.game_index) + ": status " +
           std::string(GameStatusName(stored)) + " inconsistent with rounds");
    }
    if (j.at("rounds").get<int>() != static_cast<int>(game.rounds.size())) {
      Fail("game " + std::to_string(game.game_index) + ": round count mismatch");
    }
    game.status = stored;
    game.finished_at_ms = j.at("ts").get<int64_t>();
  }

  std::string_view source_;
  ReadOptions options_;
  SessionLog log_;
  int line_ = 0;
  bool header_seen_ = false;
};

}  // namespace

std::string_view SizeCategoryName(SizeCategory category) {
  switch (category) {
    case SizeCategory::kSmall: return "small";
    case SizeCategory::kMedium: return "medium";
    case SizeCategory::kLarge: return "large";
  }
  return "";
}

SizeCategory ParseSizeCategory(std::string_view name) {
  if (name == "small") return SizeCategory::kSmall;
  if (name == "medium") return SizeCategory::kMedium;
  if (name == "large") return SizeCategory::kLarge;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown size category '" + std::string(name) + "'");
}

SizeCategory DefaultSizeCategory(int n_players) {
  if (n_players <= 3) return SizeCategory::kSmall;
  if (n_players <= 7) return SizeCategory::kMedium;
  return SizeCategory::kLarge;
}

std::string SessionHeaderLine(const SessionLog& log) {
  const auto& meta = log.meta;
  json j;
  j["event"] = "session";
  j["schema_version"] = log.schema_version;
  j["session_id"] = meta.session_id;
  j["experiment"] = meta.experiment;
  j["condition"] = meta.condition;
  j["source"] = meta.source;
  j["replication"] = meta.replication;
  j["base_seed"] = meta.base_seed;
  j["n_players"] = meta.n_players;
  j["size_category"] = SizeCategoryName(meta.size_category);
  j["game_count"] = meta.game_count;
  j["started_at_ms"] = meta.started_at_ms;
  json agents = json::array();
  for (const auto& agent : meta.agents) agents.push_back(AgentToJson(agent));
  j["agents"] = std::move(agents);
  return j.dump();
}

std::string GameStartLine(const GameLog& game) {
  json j;
  j["event"] = "game_start";
  j["game"] = game.game_index;
  j["target"] = game.target;
  j["config"] = ConfigToJson(game.config);
  j["ts"] = game.started_at_ms;
  return j.dump();
}

std::string RoundLine(const GameLog& game, const RoundLog& round) {
  json j;
  j["event"] = "round";
  j["game"] = game.game_index;
  j["round"] = round.round_index;
  j["guesses"] = round.guesses;
  j["feedback"] = FeedbackToJson(round.feedback);
  j["rendered"] = round.rendered;
  json decisions = json::array();
  for (const auto& d : round.decisions) {
    decisions.push_back({{"raw_text", d.raw_text ? json(*d.raw_text) : json(nullptr)},
                         {"raw_truncated", d.raw_truncated},
                         {"parse_attempts", d.parse_attempts},
                         {"fallback", d.fallback},
                         {"timeout", d.timed_out}});
  }
  j["decisions"] = std::move(decisions);
  j["ts"] = round.timestamp_ms;
  return j.dump();
}

std::string GameEndLine(const GameLog& game) {
  json j;
  j["event"] = "game_end";
  j["game"] = game.game_index;
  j["status"] = GameStatusName(game.status);
  j["rounds"] = game.rounds.size();
  j["ts"] = game.finished_at_ms;
  return j.dump();
}

std::string SessionEndLine(const SessionLog& log) {
  json j;
  j["event"] = "session_end";
  j["games"] = log.games.size();
  j["ts"] = log.finished_at_ms;
  return j.dump();
}

std::string SerializeSessionLog(const SessionLog& log) {
  std::string out = SessionHeaderLine(log) + "\n";
  for (const auto& game : log.games) {
    out += GameStartLine(game) + "\n";
    for (const auto& round : game.rounds) out += RoundLine(game, round) + "\n";
    if (game.status != GameStatus::kInProgress) out += GameEndLine(game) + "\n";
  }
  if (log.complete) out += SessionEndLine(log) + "\n";
  return out;
}

void WriteSessionLog(const SessionLog& log, const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kSinkUnavailable, path.string());
  out << SerializeSessionLog(log);
  if (!out) throw Error(ErrorCode::kSinkUnavailable, path.string());
}

SessionLog ParseSessionLog(std::istream& in, std::string_view source_name,
                           const ReadOptions& options) {
  LogParser parser(source_name, options);
  std::string line;
  while (std::getline(in, line)) parser.Line(line);
  return parser.Finish();
}

SessionLog ReadSessionLog(const std::filesystem::path& path,
                          const ReadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kSinkUnavailable, "cannot open " + path.string());
  return ParseSessionLog(in, path.string(), options);
}

std::vector<std::filesystem::path> CollectLogFiles(
    const std::vector<std::filesystem::path>& inputs) {
  std::vector<std::filesystem::path> files;
  for (const auto& input : inputs) {
    if (std::filesystem::is_directory(input)) {
      for (const auto& entry :
           std::filesystem::recursive_directory_iterator(input)) {
        if (entry.is_regular_file() && entry.path().filename() == "log.jsonl") {
          files.push_back(entry.path());
        }
      }
    } else if (std::filesystem::exists(input)) {
      files.push_back(input);
    }
  }
  std::sort(files.begin(), files.end());
  return files;
}

SessionLogWriter::SessionLogWriter(const std::filesystem::path& path)
    : path_(path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(ErrorCode::kSinkUnavailable, path.string());
}

void SessionLogWriter::Line(const std::string& line) {
  out_ << line << '\n';
  out_.flush();
  if (!out_) throw Error(ErrorCode::kSinkUnavailable, path_.string());
}

void SessionLogWriter::Header(const SessionLog& log) { Line(SessionHeaderLine(log)); }
void SessionLogWriter::GameStart(const GameLog& game) { Line(GameStartLine(game)); }
void SessionLogWriter::Round(const GameLog& game, const RoundLog& round) {
  Line(RoundLine(game, round));
}
void SessionLogWriter::GameEnd(const GameLog& game) { Line(GameEndLine(game)); }
void SessionLogWriter::SessionEnd(const SessionLog& log) { Line(SessionEndLine(log)); }

bool CapRawText(std::string& text, size_t cap) {
  if (text.size() <= cap) return false;
  size_t cut = cap;
  // Do not split a UTF-8 sequence.
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  text.resize(cut);
  return true;
}

std::vector<SessionLog> ImportExternalTrace(std::istream& in,
                                            const ImportOptions& options) {
  std::string line;
  if (!std::getline(in, line)) {
    throw Error(ErrorCode::kSchemaMismatch, "missing header row");
  }
  const auto header = SplitCsvLine(line);
  const size_t required = std::size(kTraceColumns);
  for (size_t i = 0; i < required; ++i) {
    if (i >= header.size() || header[i] != kTraceColumns[i]) {
      throw Error(ErrorCode::kSchemaMismatch, std::string(kTraceColumns[i]));
    }
  }
  const bool has_condition = header.size() > required;
  if (has_condition && (header.size() != required + 1 || header[required] != "condition")) {
    throw Error(ErrorCode::kSchemaMismatch, header[required]);
  }

  struct GameRows {
    FeedbackMode mode = FeedbackMode::kDirectional;
    int target = 0;
    std::map<int, std::map<std::string, int>> rounds;
  };
  struct SessionRows {
    std::string condition;
    std::vector<std::string> players;
    std::map<int, GameRows> games;
  };
  std::vector<std::string> order;
  std::map<std::string, SessionRows> sessions;

  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = SplitCsvLine(line);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "row " + std::to_string(row) + " has " +
                      std::to_string(fields.size()) + " fields");
    }
    auto integer = [&](size_t column) {
      auto value = ParseInteger(fields[column]);
      if (!value) {
        throw Error(ErrorCode::kSchemaMismatch,
                    std::string(kTraceColumns[column]) + " at row " +
                        std::to_string(row));
      }
      return static_cast<int>(*value);
    };
    const std::string& session_id = fields[0];
    const int game_index = integer(1);
    const FeedbackMode mode = ParseFeedbackMode(fields[2]);
    const int target = integer(3);
    const int round_index = integer(4);
    const std::string& player = fields[5];
    const auto guess = ParseInteger(fields[6]);
    if (!guess) {
      throw Error(ErrorCode::kNonIntegerGuess, "row " + std::to_string(row));
    }
    if (!sessions.count(session_id)) order.push_back(session_id);
    SessionRows& session = sessions[session_id];
    if (has_condition) session.condition = fields[required];
    if (std::find(session.players.begin(), session.players.end(), player) ==
        session.players.end()) {
      session.players.push_back(player);
    }
    GameRows& game = session.games[game_index];
    if (game.rounds.empty()) {
      game.mode = mode;
      game.target = target;
    } else if (game.mode != mode || game.target != target) {
      throw Error(ErrorCode::kSchemaMismatch,
                  "feedback_mode/target change within game at row " +
                      std::to_string(row));
    }
    auto& round = game.rounds[round_index];
    if (round.count(player)) {
      throw Error(ErrorCode::kRaggedRound,
                  "game " + std::to_string(game_index) + " round " +
                      std::to_string(round_index) + ": duplicate player " + player);
    }
    round[player] = static_cast<int>(*guess);
  }

  std::vector<SessionLog> logs;
  for (const auto& session_id : order) {
    const SessionRows& rows = sessions[session_id];
    const int n = static_cast<int>(rows.players.size());
    SessionLog log;
    log.meta.session_id = session_id;
    log.meta.experiment = "external";
    log.meta.condition = rows.condition.empty() ? options.condition : rows.condition;
    log.meta.source = "external";
    log.meta.n_players = n;
    log.meta.size_category = DefaultSizeCategory(n);
    log.meta.game_count = static_cast<int>(rows.games.size());
    for (const auto& player : rows.players) {
      AgentSpec spec;
      spec.agent_id = player;
      spec.kind = AgentKind::kHuman;
      log.meta.agents.push_back(spec);
    }
    int expected_game = 1;
    for (const auto& [game_index, game_rows] : rows.games) {
      if (game_index != expected_game++) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "game_index sequence in session " + session_id);
      }
      GameLog game;
      game.game_index = game_index;
      game.config = GameConfig::ForPlayers(n, game_rows.mode, options.guess_min,
                                           options.guess_max);
      game.config.max_rounds =
          std::max(options.max_rounds, static_cast<int>(game_rows.rounds.size()));
      game.config.target_min = std::min(game.config.target_min, game_rows.target);
      game.config.target_max = std::max(game.config.target_max, game_rows.target);
      try {
        game.config.Validate();
      } catch (const Error& e) {
        throw Error(ErrorCode::kSchemaMismatch,
                    "session " + session_id + " game " +
                        std::to_string(game_index) + ": " + e.detail());
      }
      game.target = game_rows.target;
      int expected_round = 1;
      for (const auto& [round_index, guesses] : game_rows.rounds) {
        const std::string where = "game " + std::to_string(game_index) +
                                  " round " + std::to_string(round_index);
        if (round_index != expected_round++) {
          throw Error(ErrorCode::kRaggedRound, where + " (missing round)");
        }
        if (!game.rounds.empty() && game.rounds.back().feedback.solved) {
          throw Error(ErrorCode::kRaggedRound, where + " (after solution)");
        }
        RoundLog round;
        round.round_index = round_index;
        for (const auto& player : rows.players) {
          auto it = guesses.find(player);
          if (it == guesses.end()) {
            throw Error(ErrorCode::kRaggedRound, where + " (missing " + player + ")");
          }
          if (!game.config.InGuessRange(it->second)) {
            throw Error(ErrorCode::kNonIntegerGuess,
                        where + ": guess " + std::to_string(it->second) +
                            " outside [" + std::to_string(options.guess_min) +
                            ", " + std::to_string(options.guess_max) + "]");
          }
          round.guesses.push_back(it->second);
        }
        int sum = 0;
        for (int g : round.guesses) sum += g;
        round.feedback = ComputeFeedback(sum, game.target);
        for (int g : round.guesses) {
          round.rendered.push_back(RenderFeedback(round.feedback, game.config, g));
        }
        round.decisions.assign(round.guesses.size(), DecisionRecord{});
        game.rounds.push_back(std::move(round));
      }
      game.status = !game.rounds.empty() && game.rounds.back().feedback.solved
                        ? GameStatus::kSolved
                        : GameStatus::kExhausted;
      log.games.push_back(std::move(game));
    }
    log.complete = true;
    logs.push_back(std::move(log));
  }
  return logs;
}

std::vector<SessionLog> ImportExternalTraceFile(const std::filesystem::path& path,
                                                const ImportOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kSinkUnavailable, "cannot open " + path.string());
  return ImportExternalTrace(in, options);
}

void ExportExternalTrace(const std::vector<SessionLog>& logs, std::ostream& out) {
  for (size_t i = 0; i < std::size(kTraceColumns); ++i) {
    out << (i ? "," : "") << kTraceColumns[i];
  }
  out << ",condition\n";
  for (const auto& log : logs) {
    for (const auto& game : log.games) {
      for (const auto& round : game.rounds) {
        for (size_t a = 0; a < round.guesses.size(); ++a) {
          out << log.meta.session_id << ',' << game.game_index << ','
              << FeedbackModeName(game.mode()) << ',' << game.target << ','
              << round.round_index << ',' << log.meta.agents[a].agent_id << ','
              << round.guesses[a] << ',' << log.meta.condition << '\n';
        }
      }
    }
  }
}

Trace AgentTrace(const SessionLog& log, size_t agent_index) {
  Trace trace;
  for (const auto& game : log.games) {
    std::vector<int> guesses;
    for (const auto& round : game.rounds) guesses.push_back(round.guesses.at(agent_index));
    trace.push_back(std::move(guesses));
  }
  return trace;
}

}  // namespace gbs
