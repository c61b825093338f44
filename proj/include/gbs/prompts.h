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

#ifndef GBS_PROMPTS_H_
#define GBS_PROMPTS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/common.h"
#include "gbs/game.h"
#include "gbs/message.h"

namespace gbs {

enum class PromptVariant { kZeroShot, kZeroShotCoT, kZeroShotStrategySum };

std::string_view PromptVariantName(PromptVariant variant);
// Accepts "zero_shot", "zero_shot_cot", "zero_shot_strategy_sum".
PromptVariant ParsePromptVariant(std::string_view name);

// Structured view of one round's feedback, masked to what the player was
// shown: magnitude only under numerical feedback, group_sum only when the
// sum is part of the rendered text.
struct FeedbackView {
  Direction direction = Direction::kJustRight;
  std::optional<int> magnitude;
  std::optional<int> group_sum;

  bool operator==(const FeedbackView&) const = default;
};

// Everything one player knows when deciding. Per-game vectors cover every
// game played so far in the session, including the current one (whose
// entries hold the rounds already resolved). No other player's guess ever
// appears here.
struct Observation {
  int game_index = 1;   // 1-based
  int round_index = 1;  // 1-based
  int seat_index = 0;
  int n_players = 2;
  int game_count = 10;
  FeedbackMode feedback_mode = FeedbackMode::kDirectional;

  std::vector<std::vector<int>> own_guesses;
  // Assistant turn text for each past decision. ZeroShot transcripts replay
  // these verbatim; an empty entry falls back to the compact JSON form.
  std::vector<std::vector<std::string>> own_replies;
  std::vector<std::vector<std::string>> feedback_text;
  std::vector<std::vector<FeedbackView>> feedback;

  // Previous own guess in the current game, if any.
  std::optional<int> PreviousGuess() const;
  std::optional<FeedbackView> PreviousFeedback() const;

  bool operator==(const Observation&) const = default;
};

// Canonical compact assistant turn, e.g. {"chosen_number":25}.
std::string RenderChoiceJson(int guess);

std::string OutputSchemaJson(const GameConfig& config);
std::string FormatInstructions(const GameConfig& config);
std::string SystemPrompt(PromptVariant variant, const GameConfig& config,
                         int seat_index, int game_count);

inline constexpr std::string_view kCotPrefill = "Let's think step by step:";

// Reconstructs the full chat transcript for one decision: the system prompt,
// then one user/assistant pair per past decision in the session, then the
// current user turn. ZeroShotCoT compacts past assistant turns to the bare
// JSON choice and ends with the step-by-step assistant prefill.
MessageList BuildMessages(PromptVariant variant, const Observation& obs,
                          const GameConfig& config);

// One-line reminder appended when a reply could not be used.
std::string FormatReminder(const GameConfig& config, std::string_view reason);

struct ChoiceParse {
  std::optional<int> value;  // set on success
  ErrorCode error = ErrorCode::kNoJsonFound;
  // The parsed integer when error == kOutOfRange.
  std::optional<long long> rejected_value;
  std::string detail;

  bool ok() const { return value.has_value(); }
};

// Extracts the last well-formed JSON object with an integer "chosen_number"
// and range-checks it. Errors: NoJsonFound, NotAnInteger, OutOfRange.
ChoiceParse ParseChoice(std::string_view raw, const GameConfig& config);

// Human-readable transcript dump used for golden files:
//   [system]\n<content>\n\n[user]\n<content>\n\n...
std::string RenderTranscript(const MessageList& messages);

}  // namespace gbs

#endif  // GBS_PROMPTS_H_
