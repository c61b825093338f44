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

#ifndef GBS_GATEWAY_H_
#define GBS_GATEWAY_H_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gbs/common.h"
#include "gbs/message.h"

namespace gbs {

struct CompletionRequest {
  std::string model_id;
  MessageList messages;
  std::optional<double> temperature;
  std::optional<int64_t> seed;
  std::optional<int> max_output_tokens;

  // Non-empty, starts with a system message.
  void Validate() const;
};

struct CompletionResult {
  std::string text;
  int64_t latency_ms = 0;
  int attempt_count = 1;
  std::map<std::string, std::string> provider_metadata;
};

// Stable SHA-256 (hex) over model id, temperature, seed and the messages.
std::string RequestFingerprint(const CompletionRequest& request);

// Anything that can answer a completion request: a retrying gateway over a
// transport, a model router, or a cassette.
class CompletionService {
 public:
  virtual ~CompletionService() = default;
  virtual CompletionResult Complete(const CompletionRequest& request) = 0;
};

// Raw outcome of one wire attempt. status 0 means the request never got an
// HTTP answer (connect failure, timeout).
struct TransportReply {
  int status = 200;
  std::string text;
  std::string error;
  std::map<std::string, std::string> metadata;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual TransportReply Send(const CompletionRequest& request) = 0;
};

// OpenAI-compatible chat-completions endpoint.
struct EndpointConfig {
  std::string name;
  std::string base_url;  // e.g. "https://api.deepseek.com"
  std::string path = "/chat/completions";
  std::string api_key_env;  // empty: no auth header
  std::string auth_header = "Authorization";
  std::string auth_scheme = "Bearer ";
  bool supports_seed = true;
  bool supports_temperature = true;
  int timeout_ms = 120000;
  std::vector<std::string> models;
};

// Built-in endpoints for the models the harness ships manifests for.
std::vector<EndpointConfig> DefaultEndpoints();

// Wire payload for one request, with unsupported parameters dropped. The
// omitted parameter names are reported through `omitted`.
std::string ChatCompletionPayload(const CompletionRequest& request,
                                  const EndpointConfig& endpoint,
                                  std::vector<std::string>* omitted = nullptr);

class HttpTransport : public Transport {
 public:
  explicit HttpTransport(EndpointConfig endpoint);
  TransportReply Send(const CompletionRequest& request) override;

 private:
  EndpointConfig endpoint_;
};

struct GatewayOptions {
  int retry_cap = 5;  // retries after the first attempt
  int max_in_flight = 4;
  std::chrono::milliseconds base_backoff{500};
  std::chrono::milliseconds max_backoff{30000};
  uint64_t jitter_seed = 0;
  // Replaceable for tests; defaults to std::this_thread::sleep_for.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Delay before retry number `retry` (1-based): exponential growth capped at
// max_backoff, then scaled by a jitter factor in [0.5, 1.0).
std::chrono::milliseconds BackoffDelay(int retry, const GatewayOptions& options,
                                       Rng& jitter);

// Counting semaphore that also records the peak number of holders.
class InFlightLimiter {
 public:
  explicit InFlightLimiter(int limit) : limit_(limit) {}
  void Acquire();
  void Release();
  int peak() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable cv_;
  int limit_;
  int in_flight_ = 0;
  int peak_ = 0;
};

// Retrying front-end over one transport. Transient failures (no response,
// 408, 429, 5xx) are retried with jittered exponential backoff; 401/403 map
// to AuthFailure and context-window overflows to ContextTooLong without
// retry.
class Gateway : public CompletionService {
 public:
  Gateway(std::shared_ptr<Transport> transport, GatewayOptions options = {});

  CompletionResult Complete(const CompletionRequest& request) override;
  int peak_in_flight() const { return limiter_.peak(); }

 private:
  std::shared_ptr<Transport> transport_;
  GatewayOptions options_;
  InFlightLimiter limiter_;
  std::mutex jitter_mutex_;
  Rng jitter_;
};

// Routes requests to a per-model service.
class ModelRouter : public CompletionService {
 public:
  void Add(const std::string& model_id,
           std::shared_ptr<CompletionService> service);
  CompletionResult Complete(const CompletionRequest& request) override;

 private:
  std::map<std::string, std::shared_ptr<CompletionService>> routes_;
};

// Builds a router with one Gateway per endpoint.
std::shared_ptr<ModelRouter> MakeHttpRouter(
    const std::vector<EndpointConfig>& endpoints,
    const GatewayOptions& options = {});

enum class CassetteMode { kOff, kRecord, kReplay };
CassetteMode ParseCassetteMode(std::string_view name);

// JSON-lines store of fingerprint -> response text. Entries sharing a
// fingerprint are served in recording order.
class Cassette {
 public:
  Cassette() = default;
  static Cassette Load(const std::filesystem::path& path);  // missing: empty

  void Add(const std::string& fingerprint, const std::string& model_id,
           const std::string& text);
  // Next unserved response for the fingerprint; nullopt on a miss.
  std::optional<std::string> Take(const std::string& fingerprint);
  size_t size() const { return total_; }

  // One line: {"fingerprint": ..., "model_id": ..., "response": ...}
  static std::string EntryLine(const std::string& fingerprint,
                               const std::string& model_id,
                               const std::string& text);

 private:
  std::map<std::string, std::deque<std::string>> entries_;
  size_t total_ = 0;
};

// Record mode forwards to `live` and appends each pair to the cassette file;
// replay mode serves only from the file and throws CassetteMiss otherwise.
class CassetteService : public CompletionService {
 public:
  CassetteService(CassetteMode mode, std::filesystem::path path,
                  std::shared_ptr<CompletionService> live);

  CompletionResult Complete(const CompletionRequest& request) override;

 private:
  CassetteMode mode_;
  std::filesystem::path path_;
  std::shared_ptr<CompletionService> live_;
  std::mutex mutex_;
  Cassette cassette_;
};

}  // namespace gbs

#endif  // GBS_GATEWAY_H_
