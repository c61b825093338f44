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

#include "gbs/prompts.h"

#include "json.hpp"

namespace gbs {
namespace {

constexpr std::string_view kStrategyParagraph =
    "It will help if you try, over successive rounds of play, to develop a "
    "consistent role in terms of how much you react to the feedback, while "
    "also trying to make your role unique compared to others in your group. "
    "For example, if you think that others in your group are reacting too "
    "much to the feedback (your group often guesses numbers that are too high "
    "and then too low), then you would want to react less. If others are "
    "reacting too little to the feedback (your group is always guessing "
    "number that are too high, or always guessing numbers that are too low) "
    "then you would want to react more.";

std::string Range(int lo, int hi) {
  return "between " + std::to_string(lo) + " and " + std::to_string(hi);
}

std::string PartnerClause(int seat_index, int n_players) {
  std::vector<std::string> letters;
  for (int i = 0; i < n_players; ++i) {
    if (i != seat_index) letters.push_back(PlayerLetter(i));
  }
  if (letters.empty()) return "";
  std::string clause = ", and you will be playing with ";
  if (letters.size() == 1) return clause + "player " + letters[0];
  // "players B and C" / "players B, C, and D"
  clause += "players ";
  for (size_t i = 0; i < letters.size(); ++i) {
    if (i > 0 && letters.size() == 2) {
      clause += " and ";
    } else if (i > 0) {
      clause += i + 1 == letters.size() ? ", and " : ", ";
    }
    clause += letters[i];
  }
  return clause;
}

std::string UserTurn(const Observation& obs, const GameConfig& config,
                     int game_index, int round_index) {
  std::string text;
  if (game_index == 1 && round_index == 1) {
    text = "This is Game 1 Round 1. There is no history yet. Please provide "
           "your answer in the specified format. ";
  } else {
    // Round 1 of a later game opens with the last feedback of the previous
    // game.
    const auto& history = round_index == 1
                              ? obs.feedback_text.at(game_index - 2)
                              : obs.feedback_text.at(game_index - 1);
    const size_t idx = round_index == 1 ? history.size() - 1
                                        : static_cast<size_t>(round_index - 2);
    text = history.at(idx) + " This is Game " + std::to_string(game_index) +
           " Round " + std::to_string(round_index) +
           ". You need to choose a number to help your group converge to the "
           "mystery number. Provide your answer in the specified format. ";
  }
  return text + FormatInstructions(config);
}

}  // namespace

std::string_view PromptVariantName(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::kZeroShot: return "zero_shot";
    case PromptVariant::kZeroShotCoT: return "zero_shot_cot";
    case PromptVariant::kZeroShotStrategySum: return "zero_shot_strategy_sum";
  }
  return "";
}

PromptVariant ParsePromptVariant(std::string_view name) {
  if (name == "zero_shot") return PromptVariant::kZeroShot;
  if (name == "zero_shot_cot") return PromptVariant::kZeroShotCoT;
  if (name == "zero_shot_strategy_sum") {
    return PromptVariant::kZeroShotStrategySum;
  }
  throw Error(ErrorCode::kUnknownVariant, std::string(name));
}

std::optional<int> Observation::PreviousGuess() const {
  if (own_guesses.size() < static_cast<size_t>(game_index)) return std::nullopt;
  const auto& current = own_guesses[game_index - 1];
  if (current.empty()) return std::nullopt;
  return current.back();
}

std::optional<FeedbackView> Observation::PreviousFeedback() const {
  if (feedback.size() < static_cast<size_t>(game_index)) return std::nullopt;
  const auto& current = feedback[game_index - 1];
  if (current.empty()) return std::nullopt;
  return current.back();
}

std::string RenderChoiceJson(int guess) {
  return "{\"chosen_number\":" + std::to_string(guess) + "}";
}

std::string OutputSchemaJson(const GameConfig& config) {
  return "{\"description\": \"The player's chosen number for the guessing "
         "game.\", \"properties\": {\"chosen_number\": {\"description\": "
         "\"The player's chosen number for the next round (" +
         Range(config.guess_min, config.guess_max) +
         ")\", \"title\": \"Chosen Number\", \"type\": \"integer\"}}, "
         "\"required\": [\"chosen_number\"]}";
}

std::string FormatInstructions(const GameConfig& config) {
  return "The output should be formatted as a JSON instance that conforms to "
         "the JSON schema below.\n\n"
         "As an example, for the schema {\"properties\": {\"foo\": "
         "{\"title\": \"Foo\", \"description\": \"a list of strings\", "
         "\"type\": \"array\", \"items\": {\"type\": \"string\"}}}, "
         "\"required\": [\"foo\"]}\n"
         "the object {\"foo\": [\"bar\", \"baz\"]} is a well-formatted "
         "instance of the schema. The object {\"properties\": {\"foo\": "
         "[\"bar\", \"baz\"]}} is not well-formatted.\n\n"
         "Here is the output schema:\n```\n" +
         OutputSchemaJson(config) + "\n```";
}

std::string SystemPrompt(PromptVariant variant, const GameConfig& config,
                         int seat_index, int game_count) {
  const std::string targets = Range(config.target_min, config.target_max);
  std::string text =
      "You will now play a game with a group of players. You are player " +
      PlayerLetter(seat_index) + PartnerClause(seat_index, config.n_players) +
      ". You will play " + std::to_string(game_count) +
      " games, where each game contains " + std::to_string(config.max_rounds) +
      " rounds after which the game ends. Each game will have a different "
      "mystery number " + targets +
      ". In each round, each player submits their own number. All of the "
      "players' numbers are summed together and compared to the mystery "
      "number that has a value " + targets +
      ". All of the players are given identical feedback on whether their "
      "group's total sum was too low, too high, or just right, and each "
      "player decides for themselves whether and how to adjust their number "
      "for the next round. Your goal as a member of the group is to help the "
      "group converge to the mystery number as soon as possible in each game. "
      "You will be provided the guesses made by you in the all the previous "
      "rounds and the total sum of the group for the respective rounds. ";
  if (variant == PromptVariant::kZeroShotStrategySum) {
    text += std::string(kStrategyParagraph) + " ";
  }
  text += "Provide the chosen integer " +
          Range(config.guess_min, config.guess_max) + ".";
  return text;
}

MessageList BuildMessages(PromptVariant variant, const Observation& obs,
                          const GameConfig& config) {
  if (variant != PromptVariant::kZeroShot &&
      variant != PromptVariant::kZeroShotCoT &&
      variant != PromptVariant::kZeroShotStrategySum) {
    throw Error(ErrorCode::kUnknownVariant,
                std::to_string(static_cast<int>(variant)));
  }
  MessageList messages;
  messages.push_back(
      {Role::kSystem,
       SystemPrompt(variant, config, obs.seat_index, obs.game_count)});
  for (int g = 1; g <= obs.game_index; ++g) {
    const auto& guesses = obs.own_guesses.at(g - 1);
    const int past = g < obs.game_index ? static_cast<int>(guesses.size())
                                        : obs.round_index - 1;
    for (int r = 1; r <= past; ++r) {
      messages.push_back({Role::kUser, UserTurn(obs, config, g, r)});
      std::string reply;
      if (variant != PromptVariant::kZeroShotCoT && g - 1 <
          static_cast<int>(obs.own_replies.size()) &&
          r - 1 < static_cast<int>(obs.own_replies[g - 1].size())) {
        reply = obs.own_replies[g - 1][r - 1];
      }
      if (reply.empty()) reply = RenderChoiceJson(guesses.at(r - 1));
      messages.push_back({Role::kAssistant, std::move(reply)});
    }
  }
  messages.push_back(
      {Role::kUser, UserTurn(obs, config, obs.game_index, obs.round_index)});
  if (variant == PromptVariant::kZeroShotCoT) {
    messages.push_back({Role::kAssistant, std::string(kCotPrefill)});
  }
  return messages;
}

std::string FormatReminder(const GameConfig& config, std::string_view reason) {
  return "Your previous reply could not be used (" + std::string(reason) +
         "). Respond with a JSON object of the form {\"chosen_number\": "
         "<integer " + Range(config.guess_min, config.guess_max) + ">}.";
}

ChoiceParse ParseChoice(std::string_view raw, const GameConfig& config) {
  using nlohmann::json;
  ChoiceParse result;
  // Walk opening braces from the end; the first balanced, parseable object
  // carrying "chosen_number" is the last one in the text.
  for (size_t start = raw.rfind('{'); start != std::string_view::npos;
       start = start == 0 ? std::string_view::npos : raw.rfind('{', start - 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    size_t end = std::string_view::npos;
    for (size_t i = start; i < raw.size(); ++i) {
      const char c = raw[i];
      if (in_string) {
        if (escaped) {
          escaped = false;
        } else if (c == '\\') {
          escaped = true;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) {
          end = i;
          break;
        }
      }
    }
    if (end == std::string_view::npos) continue;
    json object = json::parse(raw.substr(start, end - start + 1), nullptr,
                              /*allow_exceptions=*/false);
    if (object.is_discarded() || !object.is_object()) continue;
    auto it = object.find("chosen_number");
    if (it == object.end()) continue;
    if (!it->is_number_integer()) {
      result.error = ErrorCode::kNotAnInteger;
      result.detail = it->dump();
      return result;
    }
    const long long value = it->get<long long>();
    if (value < config.guess_min || value > config.guess_max) {
      result.error = ErrorCode::kOutOfRange;
      result.rejected_value = value;
      result.detail = std::to_string(value);
      return result;
    }
    result.value = static_cast<int>(value);
    return result;
  }
  result.error = ErrorCode::kNoJsonFound;
  return result;
}

std::string RenderTranscript(const MessageList& messages) {
  std::string out;
  for (const auto& message : messages) {
    out += "[";
    out += RoleName(message.role);
    out += "]\n";
    out += message.content;
    out += "\n\n";
  }
  return out;
}

std::string_view RoleName(Role role) {
  switch (role) {
    case Role::kSystem: return "system";
    case Role::kUser: return "user";
    case Role::kAssistant: return "assistant";
  }
  return "";
}

Role ParseRole(std::string_view name) {
  if (name == "system") return Role::kSystem;
  if (name == "user") return Role::kUser;
  if (name == "assistant") return Role::kAssistant;
  throw Error(ErrorCode::kInvalidConfig, "unknown role '" + std::string(name) +
                                             "'");
}

}  // namespace gbs
