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

#ifndef GBS_MANIFEST_H_
#define GBS_MANIFEST_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "gbs/gateway.h"
#include "gbs/orchestrator.h"

// Experiment manifests are YAML documents (JSON is accepted too):
//
//   experiment: scripted-oracle
//   base_seed: 7
//   replications: 1
//   providers:             # optional, overrides built-in endpoints by name
//     - {name: ollama, base_url: "http://gpu-box:11434"}
//   defaults:              # any session key, applied to every session
//     game_count: 10
//     agent: {kind: scripted, policy: proportional}
//   sessions:
//     - id: s01
//       players: 2         # seats filled from the agent template
//     - id: s02
//       condition: mixed
//       agents:
//         - {kind: llm, model: gemini-2.0-flash, temperature: 0.2}
//         - {kind: llm, model: deepseek-chat, temperature: 0.6, count: 2}
//
// Every error names the file, line and column of the offending node.
namespace gbs {

struct Manifest {
  ExperimentConfig experiment;
  std::vector<EndpointConfig> providers;  // built-ins merged with overrides
  uint64_t base_seed = 0;
  // Sessions without an explicit base_seed derive theirs from base_seed.
  std::vector<bool> explicit_session_seed;

  // Re-derives non-explicit session seeds from a new experiment seed.
  void SetBaseSeed(uint64_t seed);
};

// Session seed used when a session does not set one.
uint64_t SessionSeed(uint64_t experiment_seed, int session_index);

// Errors: ManifestError ("<source>:<line>:<col>: <message>"), and
// InvalidConfig for semantic checks run after parsing.
Manifest ParseManifest(std::string_view text, std::string_view source_name);
Manifest LoadManifest(const std::filesystem::path& path);

// One session in the same syntax as a manifest session entry; used by the
// live service for lobby templates. The id may be omitted, leaving
// session_id empty. Errors: ManifestError.
SessionConfig ParseSessionTemplate(std::string_view text,
                                   std::string_view source_name);

}  // namespace gbs

#endif  // GBS_MANIFEST_H_
