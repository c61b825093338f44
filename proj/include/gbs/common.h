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

#ifndef GBS_COMMON_H_
#define GBS_COMMON_H_

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gbs {

enum class ErrorCode {
  kInvalidConfig,
  // Game engine.
  kGuessOutOfRange,
  kMissingGuess,
  kUnknownAgent,
  kGameAlreadyOver,
  // Policies and prompts.
  kUnknownVariant,
  kUnknownPolicy,
  kNoJsonFound,
  kNotAnInteger,
  kOutOfRange,
  kPolicyNeedsNumericalFeedback,
  kTraceExhausted,
  kTraceMismatch,
  kAgentFailure,
  // Gateway.
  kTransportExhausted,
  kAuthFailure,
  kContextTooLong,
  kCassetteMiss,
  // Analytics.
  kGameNotTerminal,
  kInsufficientGames,
  kEmptySamples,
  kInsufficientPoints,
  kDegenerateX,
  kNoLogs,
  kMixedSchemaVersions,
  // Datastore.
  kSinkUnavailable,
  kValidationFailed,
  kSchemaMismatch,
  kRaggedRound,
  kNonIntegerGuess,
  kVerificationFailed,
  kManifestError,
  // Live service.
  kInvalidTemplate,
  kWrongRound,
  kAlreadySubmitted,
  kNotYourSeat,
  kLobbyExpired,
  kLobbyNotRunning,
  kNotFound,
};

std::string_view ErrorCodeName(ErrorCode code);

// All recoverable failures in the library are reported as gbs::Error. The
// code identifies the failure class; what() carries the human-readable
// detail (agent id, round, line number, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const { return code_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

// Seeded random source with a platform-independent output sequence.
// std::uniform_int_distribution and friends are implementation-defined, so
// bounded draws are done here by rejection sampling on the raw mt19937_64
// stream, whose output is fixed by the standard.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }
  // Uniform integer in [lo, hi], inclusive.
  int64_t UniformInt(int64_t lo, int64_t hi);
  // Uniform real in [0, 1).
  double Uniform01();
  bool Bernoulli(double p) { return Uniform01() < p; }
  // Standard normal via Box-Muller (one draw per call, no caching).
  double Normal();

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer, used to derive independent seeds from one base seed.
uint64_t MixSeed(uint64_t value);

}  // namespace gbs

#endif  // GBS_COMMON_H_
