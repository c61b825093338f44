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

#ifndef GBS_REPLAY_H_
#define GBS_REPLAY_H_

#include <optional>
#include <string>

#include "gbs/log.h"

namespace gbs {

struct VerifyResult {
  bool ok = false;
  // First divergent point, when known.
  std::optional<int> game_index;
  std::optional<int> round_index;
  std::string detail;
  int games_checked = 0;
  int rounds_checked = 0;
};

// Re-drives the game engine with replay agents fed from the log's own
// guesses and compares every round's guesses, feedback signal and rendered
// text, and every game's status, with the stored values. Replay errors
// (trace exhausted or mismatched) are reported as failures.
VerifyResult VerifyLog(const SessionLog& log);

}  // namespace gbs

#endif  // GBS_REPLAY_H_
