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

#ifndef GBS_LOG_H_
#define GBS_LOG_H_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/game.h"
#include "gbs/policies.h"

// Canonical session log. On disk a log is JSON lines:
//
//   {"event":"session", ...header...}
//   {"event":"game_start", ...}
//   {"event":"round", ...}            one per resolved round
//   {"event":"game_end", ...}
//   ...
//   {"event":"session_end", ...}
//
// Keys are emitted in sorted order, so equal logs serialize to equal bytes.
namespace gbs {

inline constexpr int kSchemaVersion = 1;
inline constexpr size_t kDefaultRawTextCap = 64 * 1024;

enum class SizeCategory { kSmall, kMedium, kLarge };
std::string_view SizeCategoryName(SizeCategory category);  // "small", ...
SizeCategory ParseSizeCategory(std::string_view name);
// 2-3 players small, 4-7 medium, 8 and up large.
SizeCategory DefaultSizeCategory(int n_players);

struct DecisionRecord {
  std::optional<std::string> raw_text;
  bool raw_truncated = false;
  int parse_attempts = 0;
  bool fallback = false;
  bool timed_out = false;

  bool operator==(const DecisionRecord&) const = default;
};

struct RoundLog {
  int round_index = 0;
  std::vector<int> guesses;  // agent order
  FeedbackSignal feedback;
  std::vector<std::string> rendered;  // feedback text as shown to each agent
  std::vector<DecisionRecord> decisions;
  int64_t timestamp_ms = 0;

  bool operator==(const RoundLog&) const = default;
};

struct GameLog {
  int game_index = 0;
  GameConfig config;
  int target = 0;
  GameStatus status = GameStatus::kInProgress;
  std::vector<RoundLog> rounds;
  int64_t started_at_ms = 0;
  int64_t finished_at_ms = 0;

  FeedbackMode mode() const { return config.feedback_mode; }
  bool operator==(const GameLog&) const = default;
};

struct SessionMeta {
  std::string session_id;
  std::string experiment;
  std::string condition;
  std::string source = "harness";  // harness | external | live
  int replication = 0;
  uint64_t base_seed = 0;
  std::vector<AgentSpec> agents;  // seeds resolved
  int n_players = 0;
  SizeCategory size_category = SizeCategory::kSmall;
  int game_count = 10;
  int64_t started_at_ms = 0;

  bool operator==(const SessionMeta&) const = default;
};

struct SessionLog {
  int schema_version = kSchemaVersion;
  SessionMeta meta;
  std::vector<GameLog> games;
  bool complete = false;  // session_end seen / written
  int64_t finished_at_ms = 0;

  bool operator==(const SessionLog&) const = default;
};

// Line serializers shared by the streaming writer and WriteSessionLog.
std::string SessionHeaderLine(const SessionLog& log);
std::string GameStartLine(const GameLog& game);
std::string RoundLine(const GameLog& game, const RoundLog& round);
std::string GameEndLine(const GameLog& game);
std::string SessionEndLine(const SessionLog& log);

std::string SerializeSessionLog(const SessionLog& log);
// Errors: SinkUnavailable.
void WriteSessionLog(const SessionLog& log, const std::filesystem::path& path);

struct ReadOptions {
  // Accept logs cut short (no session_end, a game without game_end).
  bool allow_incomplete = false;
};

// Parses and re-validates a log: every round's sum, direction, magnitude and
// solved flag are recomputed from the guesses and the target. Errors:
// ValidationFailed (naming the line and round), SchemaMismatch for an
// unsupported schema_version.
SessionLog ParseSessionLog(std::istream& in, std::string_view source_name,
                           const ReadOptions& options = {});
SessionLog ReadSessionLog(const std::filesystem::path& path,
                          const ReadOptions& options = {});

// Finds log.jsonl files under a directory (recursively) or takes files as-is.
std::vector<std::filesystem::path> CollectLogFiles(
    const std::vector<std::filesystem::path>& inputs);

// Appends events to a file as the session runs, flushing each line, so a
// crash loses at most the round in flight.
class SessionLogWriter {
 public:
  explicit SessionLogWriter(const std::filesystem::path& path);

  void Header(const SessionLog& log);
  void GameStart(const GameLog& game);
  void Round(const GameLog& game, const RoundLog& round);
  void GameEnd(const GameLog& game);
  void SessionEnd(const SessionLog& log);

 private:
  void Line(const std::string& line);

  std::filesystem::path path_;
  std::ofstream out_;
};

// Truncates raw model output to `cap` bytes; returns whether it was cut.
bool CapRawText(std::string& text, size_t cap);

// External traces: one row per (session, game, round, player), header
//   session_id,game_index,feedback_mode,target,round_index,player_id,guess
struct ImportOptions {
  int guess_min = 0;
  int guess_max = 50;
  int max_rounds = 15;
  std::string condition = "Humans";
};

inline constexpr std::string_view kTraceColumns[] = {
    "session_id", "game_index", "feedback_mode", "target",
    "round_index", "player_id", "guess"};

// Rebuilds session logs, recomputing all feedback. Errors: SchemaMismatch,
// RaggedRound, NonIntegerGuess.
std::vector<SessionLog> ImportExternalTrace(std::istream& in,
                                            const ImportOptions& options = {});
std::vector<SessionLog> ImportExternalTraceFile(
    const std::filesystem::path& path, const ImportOptions& options = {});
void ExportExternalTrace(const std::vector<SessionLog>& logs, std::ostream& out);

// Rebuilds a session-ordered guess trace for one agent.
Trace AgentTrace(const SessionLog& log, size_t agent_index);

}  // namespace gbs

#endif  // GBS_LOG_H_
