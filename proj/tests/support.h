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


#ifndef GBS_TESTS_SUPPORT_H_
#define GBS_TESTS_SUPPORT_H_

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "gbs/game.h"
#include "gbs/gateway.h"
#include "gbs/log.h"
#include "gbs/orchestrator.h"

namespace gbs::testing {

// Unique directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "gbs");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

std::string ReadFile(const std::filesystem::path& path);
void WriteFile(const std::filesystem::path& path, const std::string& text);
std::filesystem::path SourcePath(const std::string& relative);

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr
};
// Runs the gbs CLI with the given argument string.
CommandResult RunCli(const std::string& args);

AgentSpec Scripted(const std::string& id, const std::string& policy,
                   std::map<std::string, std::string> params = {});

// Model stand-in whose reply is a pure function of the request, so a
// cassette recorded from it replays exactly. Roughly one reply in seven is
// unusable prose, which exercises the re-prompt path.
class FakeModel : public CompletionService {
 public:
  CompletionResult Complete(const CompletionRequest& request) override;
  int calls() const { return calls_.load(); }

 private:
  std::atomic<int> calls_{0};
};

// Every file under `dir`, keyed by relative path, with contents.
std::map<std::string, std::string> Snapshot(const std::filesystem::path& dir);

// Feedback computed from first principles, independent of the engine.
struct OracleFeedback {
  std::string direction;
  int magnitude = 0;
  bool solved = false;
};
OracleFeedback OracleFor(const std::vector<int>& guesses, int target);

// Closed-form least squares slope using long double two-pass sums.
double OracleSlope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace gbs::testing

#endif  // GBS_TESTS_SUPPORT_H_
