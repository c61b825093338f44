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

#include "gbs/gateway.h"

#include <openssl/evp.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace gbs {
namespace {

using nlohmann::json;

std::string ToLower(std::string text) {
  std::transform(text.begin(), text.end(), text.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return text;
}

bool IsRetryable(int status) {
  return status == 0 || status == 408 || status == 429 || status >= 500;
}

bool LooksLikeContextOverflow(const TransportReply& reply) {
  if (reply.status == 413) return true;
  if (reply.status != 400) return false;
  const std::string body = ToLower(reply.error + " " + reply.text);
  return body.find("context") != std::string::npos &&
         (body.find("length") != std::string::npos ||
          body.find("too long") != std::string::npos ||
          body.find("maximum") != std::string::npos);
}

class LimiterGuard {
 public:
  explicit LimiterGuard(InFlightLimiter& limiter) : limiter_(limiter) {
    limiter_.Acquire();
  }
  ~LimiterGuard() { limiter_.Release(); }
  LimiterGuard(const LimiterGuard&) = delete;
  LimiterGuard& operator=(const LimiterGuard&) = delete;

 private:
  InFlightLimiter& limiter_;
};

}  // namespace

void CompletionRequest::Validate() const {
  if (messages.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "completion request has no messages");
  }
  if (messages.front().role != Role::kSystem) {
    throw Error(ErrorCode::kInvalidConfig,
                "first message of a completion request must be system");
  }
}

std::string RequestFingerprint(const CompletionRequest& request) {
  json canonical;
  canonical["model_id"] = request.model_id;
  canonical["temperature"] =
      request.temperature ? json(*request.temperature) : json(nullptr);
  canonical["seed"] = request.seed ? json(*request.seed) : json(nullptr);
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back({RoleName(message.role), message.content});
  }
  canonical["messages"] = std::move(messages);
  // json objects keep keys sorted, so dump() is canonical.
  const std::string bytes = canonical.dump();

  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(),
             nullptr);
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    hex += kHex[digest[i] >> 4];
    hex += kHex[digest[i] & 0xF];
  }
  return hex;
}

std::vector<EndpointConfig> DefaultEndpoints() {
  EndpointConfig deepseek;
  deepseek.name = "deepseek";
  deepseek.base_url = "https://api.deepseek.com";
  deepseek.api_key_env = "DEEPSEEK_API_KEY";
  deepseek.supports_seed = false;
  deepseek.models = {"deepseek-chat", "deepseek-reasoner"};

  EndpointConfig gemini;
  gemini.name = "gemini";
  gemini.base_url = "https://generativelanguage.googleapis.com";
  gemini.path = "/v1beta/openai/chat/completions";
  gemini.api_key_env = "GEMINI_API_KEY";
  gemini.models = {"gemini-2.0-flash"};

  EndpointConfig ollama;
  ollama.name = "ollama";
  ollama.base_url = "http://localhost:11434";
  ollama.path = "/v1/chat/completions";
  ollama.models = {"llama3.3:70b-instruct-fp16"};

  return {deepseek, gemini, ollama};
}

std::string ChatCompletionPayload(const CompletionRequest& request,
                                  const EndpointConfig& endpoint,
                                  std::vector<std::string>* omitted) {
  json payload;
  payload["model"] = request.model_id;
  json messages = json::array();
  for (const auto& message : request.messages) {
    messages.push_back(
        {{"role", RoleName(message.role)}, {"content", message.content}});
  }
  payload["messages"] = std::move(messages);
  if (request.temperature) {
    if (endpoint.supports_temperature) {
      payload["temperature"] = *request.temperature;
    } else if (omitted) {
      omitted->push_back("temperature");
    }
  }
  if (request.seed) {
    if (endpoint.supports_seed) {
      payload["seed"] = *request.seed;
    } else if (omitted) {
      omitted->push_back("seed");
    }
  }
  if (request.max_output_tokens) {
    payload["max_tokens"] = *request.max_output_tokens;
  }
  return payload.dump();
}

HttpTransport::HttpTransport(EndpointConfig endpoint)
    : endpoint_(std::move(endpoint)) {}

TransportReply HttpTransport::Send(const CompletionRequest& request) {
  TransportReply reply;
  std::vector<std::string> omitted;
  const std::string body = ChatCompletionPayload(request, endpoint_, &omitted);

  httplib::Client client(endpoint_.base_url);
  const auto timeout = std::chrono::milliseconds(endpoint_.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!endpoint_.api_key_env.empty()) {
    const char* key = std::getenv(endpoint_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      reply.status = 401;
      reply.error = "environment variable " + endpoint_.api_key_env +
                    " is not set";
      return reply;
    }
    headers.emplace(endpoint_.auth_header, endpoint_.auth_scheme + key);
  }

  auto result = client.Post(endpoint_.path, headers, body, "application/json");
  if (!result) {
    reply.status = 0;
    reply.error = httplib::to_string(result.error());
    return reply;
  }
  reply.status = result->status;
  if (!omitted.empty()) {
    std::string joined;
    for (const auto& name : omitted) joined += (joined.empty() ? "" : ",") + name;
    reply.metadata["omitted_params"] = joined;
  }
  if (result->status != 200) {
    reply.error = result->body;
    return reply;
  }
  json parsed = json::parse(result->body, nullptr, false);
  if (parsed.is_discarded() || !parsed.contains("choices") ||
      parsed["choices"].empty() ||
      !parsed["choices"][0]["message"]["content"].is_string()) {
    reply.status = 502;
    reply.error = "malformed completion response";
    return reply;
  }
  reply.text = parsed["choices"][0]["message"]["content"].get<std::string>();
  if (parsed.contains("usage") && parsed["usage"].is_object()) {
    for (const auto& [key, value] : parsed["usage"].items()) {
      if (value.is_number_integer()) reply.metadata[key] = value.dump();
    }
  }
  if (parsed.contains("model") && parsed["model"].is_string()) {
    reply.metadata["model"] = parsed["model"].get<std::string>();
  }
  return reply;
}

std::chrono::milliseconds BackoffDelay(int retry, const GatewayOptions& options,
                                       Rng& jitter) {
  const int shift = std::clamp(retry - 1, 0, 30);
  const long long base = options.base_backoff.count();
  const long long cap = options.max_backoff.count();
  const long long raw = std::min(cap, base << shift);
  const double factor = 0.5 + 0.5 * jitter.Uniform01();
  return std::chrono::milliseconds(static_cast<long long>(raw * factor));
}

void InFlightLimiter::Acquire() {
  std::unique_lock lock(mutex_);
  cv_.wait(lock, [&] { return in_flight_ < limit_; });
  ++in_flight_;
  peak_ = std::max(peak_, in_flight_);
}

void InFlightLimiter::Release() {
  {
    std::lock_guard lock(mutex_);
    --in_flight_;
  }
  cv_.notify_one();
}

int InFlightLimiter::peak() const {
  std::lock_guard lock(mutex_);
  return peak_;
}

Gateway::Gateway(std::shared_ptr<Transport> transport, GatewayOptions options)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      limiter_(std::max(1, options_.max_in_flight)),
      jitter_(options_.jitter_seed) {
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) {
      std::this_thread::sleep_for(d);
    };
  }
}

CompletionResult Gateway::Complete(const CompletionRequest& request) {
  request.Validate();
  LimiterGuard guard(limiter_);
  const auto start = std::chrono::steady_clock::now();
  std::string last_error;
  const int max_attempts = 1 + std::max(0, options_.retry_cap);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    TransportReply reply = transport_->Send(request);
    if (reply.status == 200) {
      CompletionResult result;
      result.text = std::move(reply.text);
      result.attempt_count = attempt;
      result.provider_metadata = std::move(reply.metadata);
      result.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      return result;
    }
    if (reply.status == 401 || reply.status == 403) {
      throw Error(ErrorCode::kAuthFailure, request.model_id + ": " + reply.error);
    }
    if (LooksLikeContextOverflow(reply)) {
      throw Error(ErrorCode::kContextTooLong,
                  request.model_id + ": " + reply.error);
    }
    last_error = "HTTP " + std::to_string(reply.status) +
                 (reply.error.empty() ? "" : " " + reply.error);
    if (!IsRetryable(reply.status)) break;
    if (attempt < max_attempts) {
      std::chrono::milliseconds delay;
      {
        std::lock_guard lock(jitter_mutex_);
        delay = BackoffDelay(attempt, options_, jitter_);
      }
      options_.sleep(delay);
    }
  }
  throw Error(ErrorCode::kTransportExhausted, request.model_id + ": " + last_error);
}

void ModelRouter::Add(const std::string& model_id,
                      std::shared_ptr<CompletionService> service) {
  routes_[model_id] = std::move(service);
}

CompletionResult ModelRouter::Complete(const CompletionRequest& request) {
  auto it = routes_.find(request.model_id);
  if (it == routes_.end()) {
    throw Error(ErrorCode::kTransportExhausted,
                "no endpoint configured for model '" + request.model_id + "'");
  }
  return it->second->Complete(request);
}

std::shared_ptr<ModelRouter> MakeHttpRouter(
    const std::vector<EndpointConfig>& endpoints,
    const GatewayOptions& options) {
  auto router = std::make_shared<ModelRouter>();
  for (const auto& endpoint : endpoints) {
    auto gateway = std::make_shared<Gateway>(
        std::make_shared<HttpTransport>(endpoint), options);
    for (const auto& model : endpoint.models) router->Add(model, gateway);
  }
  return router;
}

CassetteMode ParseCassetteMode(std::string_view name) {
  if (name == "off") return CassetteMode::kOff;
  if (name == "record") return CassetteMode::kRecord;
  if (name == "replay") return CassetteMode::kReplay;
  throw Error(ErrorCode::kInvalidConfig,
              "unknown cassette mode '" + std::string(name) + "'");
}

Cassette Cassette::Load(const std::filesystem::path& path) {
  Cassette cassette;
  std::ifstream in(path);
  if (!in) return cassette;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    json entry = json::parse(line, nullptr, false);
    if (entry.is_discarded() || !entry.contains("fingerprint") ||
        !entry.contains("response")) {
      throw Error(ErrorCode::kValidationFailed,
                  path.string() + ":" + std::to_string(line_number) +
                      ": malformed cassette entry");
    }
    cassette.Add(entry["fingerprint"].get<std::string>(),
                 entry.value("model_id", ""),
                 entry["response"].get<std::string>());
  }
  return cassette;
}

void Cassette::Add(const std::string& fingerprint, const std::string&,
                   const std::string& text) {
  entries_[fingerprint].push_back(text);
  ++total_;
}

std::optional<std::string> Cassette::Take(const std::string& fingerprint) {
  auto it = entries_.find(fingerprint);
  if (it == entries_.end() || it->second.empty()) return std::nullopt;
  std::string text = std::move(it->second.front());
  it->second.pop_front();
  return text;
}

std::string Cassette::EntryLine(const std::string& fingerprint,
                                const std::string& model_id,
                                const std::string& text) {
  json entry;
  entry["fingerprint"] = fingerprint;
  entry["model_id"] = model_id;
  entry["response"] = text;
  return entry.dump();
}

CassetteService::CassetteService(CassetteMode mode, std::filesystem::path path,
                                 std::shared_ptr<CompletionService> live)
    : mode_(mode), path_(std::move(path)), live_(std::move(live)) {
  if (mode_ == CassetteMode::kReplay) cassette_ = Cassette::Load(path_);
}

CompletionResult CassetteService::Complete(const CompletionRequest& request) {
  request.Validate();
  const std::string fingerprint = RequestFingerprint(request);
  if (mode_ == CassetteMode::kReplay) {
    std::lock_guard lock(mutex_);
    auto text = cassette_.Take(fingerprint);
    if (!text) throw Error(ErrorCode::kCassetteMiss, fingerprint);
    CompletionResult result;
    result.text = std::move(*text);
    result.provider_metadata["cassette"] = "replay";
    return result;
  }
  if (!live_) {
    throw Error(ErrorCode::kTransportExhausted, "no live completion service");
  }
  CompletionResult result = live_->Complete(request);
  if (mode_ == CassetteMode::kRecord) {
    std::lock_guard lock(mutex_);
    if (path_.has_parent_path()) {
      std::filesystem::create_directories(path_.parent_path());
    }
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorCode::kSinkUnavailable, path_.string());
    out << Cassette::EntryLine(fingerprint, request.model_id, result.text)
        << '\n';
    out.flush();
    cassette_.Add(fingerprint, request.model_id, result.text);
  }
  return result;
}

}  // namespace gbs
