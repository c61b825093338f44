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

#include "gbs/common.h"

#include <cmath>
#include <numbers>

namespace gbs {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kGuessOutOfRange: return "GuessOutOfRange";
    case ErrorCode::kMissingGuess: return "MissingGuess";
    case ErrorCode::kUnknownAgent: return "UnknownAgent";
    case ErrorCode::kGameAlreadyOver: return "GameAlreadyOver";
    case ErrorCode::kUnknownVariant: return "UnknownVariant";
    case ErrorCode::kUnknownPolicy: return "UnknownPolicy";
    case ErrorCode::kNoJsonFound: return "NoJsonFound";
    case ErrorCode::kNotAnInteger: return "NotAnInteger";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kPolicyNeedsNumericalFeedback:
      return "PolicyNeedsNumericalFeedback";
    case ErrorCode::kTraceExhausted: return "TraceExhausted";
    case ErrorCode::kTraceMismatch: return "TraceMismatch";
    case ErrorCode::kAgentFailure: return "AgentFailure";
    case ErrorCode::kTransportExhausted: return "TransportExhausted";
    case ErrorCode::kAuthFailure: return "AuthFailure";
    case ErrorCode::kContextTooLong: return "ContextTooLong";
    case ErrorCode::kCassetteMiss: return "CassetteMiss";
    case ErrorCode::kGameNotTerminal: return "GameNotTerminal";
    case ErrorCode::kInsufficientGames: return "InsufficientGames";
    case ErrorCode::kEmptySamples: return "EmptySamples";
    case ErrorCode::kInsufficientPoints: return "InsufficientPoints";
    case ErrorCode::kDegenerateX: return "DegenerateX";
    case ErrorCode::kNoLogs: return "NoLogs";
    case ErrorCode::kMixedSchemaVersions: return "MixedSchemaVersions";
    case ErrorCode::kSinkUnavailable: return "SinkUnavailable";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
    case ErrorCode::kSchemaMismatch: return "SchemaMismatch";
    case ErrorCode::kRaggedRound: return "RaggedRound";
    case ErrorCode::kNonIntegerGuess: return "NonIntegerGuess";
    case ErrorCode::kVerificationFailed: return "VerificationFailed";
    case ErrorCode::kManifestError: return "ManifestError";
    case ErrorCode::kInvalidTemplate: return "InvalidTemplate";
    case ErrorCode::kWrongRound: return "WrongRound";
    case ErrorCode::kAlreadySubmitted: return "AlreadySubmitted";
    case ErrorCode::kNotYourSeat: return "NotYourSeat";
    case ErrorCode::kLobbyExpired: return "LobbyExpired";
    case ErrorCode::kLobbyNotRunning: return "LobbyNotRunning";
    case ErrorCode::kNotFound: return "NotFound";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(ErrorCodeName(code)) +
                         (detail.empty() ? "" : ": " + detail)),
      code_(code),
      detail_(detail) {}

int64_t Rng::UniformInt(int64_t lo, int64_t hi) {
  if (lo >= hi) return lo;
  const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
  if (span == 0) return static_cast<int64_t>(Next());  // full 64-bit range
  // Largest multiple of span that fits; reject draws above it.
  const uint64_t limit = UINT64_MAX - (UINT64_MAX % span);
  uint64_t draw;
  do {
    draw = Next();
  } while (draw >= limit);
  return lo + static_cast<int64_t>(draw % span);
}

double Rng::Uniform01() {
  // 53 high bits -> double in [0, 1).
  return static_cast<double>(Next() >> 11) * 0x1.0p-53;
}

double Rng::Normal() {
  double u1 = Uniform01();
  while (u1 <= 0.0) u1 = Uniform01();
  const double u2 = Uniform01();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

uint64_t MixSeed(uint64_t value) {
  value += 0x9E3779B97F4A7C15ULL;
  value = (value ^ (value >> 30)) * 0xBF58476D1CE4E5B9ULL;
  value = (value ^ (value >> 27)) * 0x94D049BB133111EBULL;
  return value ^ (value >> 31);
}

}  // namespace gbs
