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


#include "support.h"

#include <array>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "gbs/prompts.h"

namespace gbs::testing {

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          (tag + "-" + std::to_string(::getpid()) + "-" +
           std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ignored;
  std::filesystem::remove_all(path_, ignored);
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void WriteFile(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::filesystem::path SourcePath(const std::string& relative) {
  return std::filesystem::path(GBS_SOURCE_DIR) / relative;
}

CommandResult RunCli(const std::string& args) {
  CommandResult result;
  const std::string command = std::string("\"") + GBS_CLI_PATH + "\" " + args + " 2>&1";
  FILE* pipe = ::popen(command.c_str(), "r");
  if (pipe == nullptr) return result;
  std::array<char, 4096> buffer;
  size_t n;
  while ((n = std::fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  const int status = ::pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

AgentSpec Scripted(const std::string& id, const std::string& policy,
                   std::map<std::string, std::string> params) {
  AgentSpec spec;
  spec.agent_id = id;
  spec.kind = AgentKind::kScripted;
  spec.policy = policy;
  spec.policy_params = std::move(params);
  return spec;
}

CompletionResult FakeModel::Complete(const CompletionRequest& request) {
  ++calls_;
  const std::string fingerprint = RequestFingerprint(request);
  const uint64_t h = MixSeed(std::stoull(fingerprint.substr(0, 15), nullptr, 16));
  CompletionResult result;
  if (h % 7 == 0) {
    result.text = "I would rather pick something in the middle.";
  } else {
    const int guess = static_cast<int>((h >> 8) % 51);
    result.text = "The sum was off, so I will adjust.\n{\"chosen_number\": " +
                  std::to_string(guess) + "}";
  }
  return result;
}

std::map<std::string, std::string> Snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    files[std::filesystem::relative(entry.path(), dir).string()] =
        ReadFile(entry.path());
  }
  return files;
}

OracleFeedback OracleFor(const std::vector<int>& guesses, int target) {
  long long sum = 0;
  for (int g : guesses) sum += g;
  OracleFeedback f;
  if (sum < target) {
    f.direction = "too_low";
  } else if (sum > target) {
    f.direction = "too_high";
  } else {
    f.direction = "just_right";
    f.solved = true;
  }
  f.magnitude = static_cast<int>(sum > target ? sum - target : target - sum);
  return f;
}

double OracleSlope(const std::vector<double>& x, const std::vector<double>& y) {
  long double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  long double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return static_cast<double>(sxy / sxx);
}

}  // namespace gbs::testing
