#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"

#include "mazetest/corpus_io.hpp"
#include "mazetest/prompt.hpp"

namespace mazetest {

enum class ProviderKind { OpenAICompatible, Mock };

inline const char* provider_kind_name(ProviderKind k) { return k == ProviderKind::Mock ? "mock" : "openai"; }

inline ProviderKind provider_kind_from_name(std::string_view s) {
  if (s == "openai" || s == "openai-compatible") return ProviderKind::OpenAICompatible;
  if (s == "mock") return ProviderKind::Mock;
  throw DomainError("unknown provider kind: " + std::string(s));
}

/// Holds the *name* of the credential variable; the secret itself is read
/// from the environment per request and never stored.
struct ProviderConfig {
  std::string name;
  ProviderKind kind = ProviderKind::OpenAICompatible;
  std::string endpoint;  // full chat-completions URL
  std::string api_key_env;
  std::string model;
  double temperature = 0.0;
  int max_tokens = 1024;
  double timeout_s = 120.0;
  int max_retries = 4;
  double rate_per_minute = 0.0;  // 0 = no cap
  bool reasoning = false;
  std::string script;  // mock response file

  void validate() const {
    if (name.empty()) throw DomainError("provider needs a name");
    if (name.find('|') != std::string::npos) throw DomainError("provider name may not contain '|': " + name);
    if (max_retries < 0) throw DomainError(name + ": max_retries must be >= 0");
    if (!(timeout_s > 0)) throw DomainError(name + ": timeout_s must be > 0");
    if (rate_per_minute < 0) throw DomainError(name + ": rate_per_minute must be >= 0");
    if (max_tokens <= 0) throw DomainError(name + ": max_tokens must be > 0");
    if (kind == ProviderKind::OpenAICompatible) {
      if (endpoint.empty()) throw DomainError(name + ": endpoint required");
      if (model.empty()) throw DomainError(name + ": model required");
      if (api_key_env.empty()) throw DomainError(name + ": api_key_env required");
    } else if (script.empty()) {
      throw DomainError(name + ": mock provider needs a script file");
    }
  }
};

inline nlohmann::ordered_json provider_config_to_json(const ProviderConfig& c) {
  nlohmann::ordered_json j{{"name", c.name},
                           {"kind", provider_kind_name(c.kind)},
                           {"endpoint", c.endpoint},
                           {"api_key_env", c.api_key_env},
                           {"model", c.model},
                           {"temperature", c.temperature},
                           {"max_tokens", c.max_tokens},
                           {"timeout_s", c.timeout_s},
                           {"max_retries", c.max_retries},
                           {"rate_per_minute", c.rate_per_minute},
                           {"reasoning", c.reasoning}};
  if (!c.script.empty()) j["script"] = c.script;
  return j;
}

inline ProviderConfig provider_config_from_json(const nlohmann::json& j) {
  ProviderConfig c;
  c.name = j.at("name").get<std::string>();
  c.kind = provider_kind_from_name(j.value("kind", std::string("openai")));
  c.endpoint = j.value("endpoint", std::string());
  c.api_key_env = j.value("api_key_env", std::string());
  c.model = j.value("model", c.kind == ProviderKind::Mock ? c.name : std::string());
  c.temperature = j.value("temperature", c.temperature);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.timeout_s = j.value("timeout_s", c.timeout_s);
  c.max_retries = j.value("max_retries", c.max_retries);
  c.rate_per_minute = j.value("rate_per_minute", c.rate_per_minute);
  c.reasoning = j.value("reasoning", c.reasoning);
  c.script = j.value("script", std::string());
  if (j.contains("api_key")) throw DomainError(c.name + ": credentials belong in the environment, not the registry");
  c.validate();
  return c;
}

/// Registry file: {"providers": [ {...}, ... ]}. Relative script paths are
/// resolved against the registry's directory.
inline std::vector<ProviderConfig> load_registry(const fs::path& path) {
  const auto j = nlohmann::json::parse(read_text_file(path));
  std::vector<ProviderConfig> out;
  std::set<std::string> names;
  for (const auto& p : j.at("providers")) {
    ProviderConfig c = provider_config_from_json(p);
    if (!c.script.empty() && fs::path(c.script).is_relative()) c.script = (path.parent_path() / c.script).string();
    if (!names.insert(c.name).second) throw DomainError("duplicate provider name: " + c.name);
    out.push_back(std::move(c));
  }
  return out;
}

enum class GatewayErrorKind { Auth, RateLimited, Timeout, Transport, MalformedResponse };

inline const char* gateway_error_name(GatewayErrorKind k) {
  switch (k) {
    case GatewayErrorKind::Auth: return "auth";
    case GatewayErrorKind::RateLimited: return "rate-limited";
    case GatewayErrorKind::Timeout: return "timeout";
    case GatewayErrorKind::Transport: return "transport";
    case GatewayErrorKind::MalformedResponse: return "malformed-response";
  }
  return "?";
}

class GatewayError : public std::runtime_error {
 public:
  GatewayError(GatewayErrorKind kind, const std::string& msg, int attempts = 0)
      : std::runtime_error(std::string(gateway_error_name(kind)) + ": " + msg), kind_(kind), attempts_(attempts) {}
  GatewayErrorKind kind() const noexcept { return kind_; }
  int attempts() const noexcept { return attempts_; }

 private:
  GatewayErrorKind kind_;
  int attempts_;
};

struct Completion {
  std::string text;
  long tokens_in = 0;
  long tokens_out = 0;
  double latency_ms = 0.0;
  int attempts = 1;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;
  double timeout_s = 60.0;
};

enum class NetError { None, Timeout, Connection };

struct HttpResponse {
  int status = 0;
  std::string body;
  NetError error = NetError::None;
  std::string error_detail;
  std::optional<double> retry_after_s;
};

class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// Minimum-spacing token bucket with a capacity of one request. Callers
/// reserve the next free slot under the lock and sleep outside it.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;

  explicit RateLimiter(double per_minute, std::function<void(double)> sleeper = default_sleeper(),
                       std::function<Clock::time_point()> now = [] { return Clock::now(); })
      : interval_(per_minute > 0 ? 60.0 / per_minute : 0.0), sleep_(std::move(sleeper)), now_(std::move(now)) {}

  /// Returns the seconds waited.
  double acquire() {
    if (interval_ <= 0) return 0.0;
    double wait = 0.0;
    {
      std::lock_guard lock(mu_);
      const auto now = now_();
      if (!next_ || *next_ <= now) {
        next_ = now;
      } else {
        wait = std::chrono::duration<double>(*next_ - now).count();
      }
      *next_ += std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(interval_));
    }
    if (wait > 0) sleep_(wait);
    return wait;
  }

  static std::function<void(double)> default_sleeper() {
    return [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
  }

 private:
  double interval_;
  std::function<void(double)> sleep_;
  std::function<Clock::time_point()> now_;
  std::mutex mu_;
  std::optional<Clock::time_point> next_;
};

struct GatewayHooks {
  std::function<void(double)> sleep = RateLimiter::default_sleeper();
  std::function<std::optional<std::string>(const std::string&)> getenv = [](const std::string& k)
      -> std::optional<std::string> {
    const char* v = std::getenv(k.c_str());
    return v ? std::optional<std::string>(v) : std::nullopt;
  };
  double base_delay_s = 1.0;
  double max_delay_s = 60.0;
};

/// Chat-completions request body. Contains only the configured fields and
/// the messages, so identical inputs give byte-identical payloads.
inline std::string build_request_body(const ProviderConfig& cfg, const std::vector<ChatMessage>& messages) {
  nlohmann::ordered_json body;
  body["model"] = cfg.model;
  body["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : messages) {
    if (m.content.empty()) throw DomainError("chat message content must be non-empty");
    body["messages"].push_back({{"role", role_name(m.role)}, {"content", m.content}});
  }
  body["temperature"] = cfg.temperature;
  body["max_tokens"] = cfg.max_tokens;
  return body.dump();
}

inline Completion parse_chat_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::exception& e) {
    throw GatewayError(GatewayErrorKind::MalformedResponse, std::string("body is not JSON: ") + e.what());
  }
  const auto* choices = j.is_object() && j.contains("choices") ? &j["choices"] : nullptr;
  if (!choices || !choices->is_array() || choices->empty())
    throw GatewayError(GatewayErrorKind::MalformedResponse, "no choices in response");
  const auto& msg = (*choices)[0].value("message", nlohmann::json::object());
  if (!msg.contains("content") || !msg["content"].is_string())
    throw GatewayError(GatewayErrorKind::MalformedResponse, "choice has no message content");
  Completion c;
  c.text = msg["content"].get<std::string>();
  if (j.contains("usage") && j["usage"].is_object()) {
    c.tokens_in = j["usage"].value("prompt_tokens", 0L);
    c.tokens_out = j["usage"].value("completion_tokens", 0L);
  }
  return c;
}

namespace gateway_detail {

inline double backoff_delay(const GatewayHooks& hooks, int retry, std::mt19937_64& rng) {
  const double base = std::min(hooks.max_delay_s, hooks.base_delay_s * std::ldexp(1.0, retry));
  // Full jitter on top of the exponential base.
  const double jitter = std::uniform_real_distribution<double>(0.0, base)(rng);
  return std::min(hooks.max_delay_s, base + jitter);
}

}  // namespace gateway_detail

/// One stateless request, retried on rate limits and transient failures.
/// Auth failures and non-retryable HTTP statuses fail immediately.
inline Completion complete_chat(const ProviderConfig& cfg, const std::vector<ChatMessage>& messages,
                                Transport& transport, RateLimiter* limiter = nullptr, const GatewayHooks& hooks = {}) {
  const auto key = hooks.getenv(cfg.api_key_env);
  if (!key || key->empty())
    throw GatewayError(GatewayErrorKind::Auth, "environment variable " + cfg.api_key_env + " is not set");

  HttpRequest req;
  req.url = cfg.endpoint;
  req.headers = {{"Authorization", "Bearer " + *key}, {"Content-Type", "application/json"}};
  req.body = build_request_body(cfg, messages);
  req.timeout_s = cfg.timeout_s;

  std::mt19937_64 rng(std::hash<std::string>{}(req.body));
  const int max_attempts = cfg.max_retries + 1;
  for (int attempt = 1;; ++attempt) {
    if (limiter) limiter->acquire();
    const auto start = std::chrono::steady_clock::now();
    const HttpResponse resp = transport.post(req);
    const double elapsed =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

    GatewayErrorKind kind;
    std::string why;
    bool retryable = true;
    if (resp.error == NetError::Timeout) {
      kind = GatewayErrorKind::Timeout;
      why = "request timed out";
    } else if (resp.error == NetError::Connection) {
      kind = GatewayErrorKind::Transport;
      why = resp.error_detail.empty() ? "connection failed" : resp.error_detail;
    } else if (resp.status == 401 || resp.status == 403) {
      throw GatewayError(GatewayErrorKind::Auth, "HTTP " + std::to_string(resp.status), attempt);
    } else if (resp.status == 429) {
      kind = GatewayErrorKind::RateLimited;
      why = "HTTP 429";
    } else if (resp.status >= 500 || resp.status == 408) {
      kind = GatewayErrorKind::Transport;
      why = "HTTP " + std::to_string(resp.status);
    } else if (resp.status < 200 || resp.status >= 300) {
      kind = GatewayErrorKind::Transport;
      why = "HTTP " + std::to_string(resp.status) + ": " + resp.body.substr(0, 200);
      retryable = false;
    } else {
      Completion c;
      try {
        c = parse_chat_response(resp.body);
      } catch (const GatewayError& e) {
        throw GatewayError(e.kind(), e.what(), attempt);
      }
      c.latency_ms = elapsed;
      c.attempts = attempt;
      return c;
    }
    if (!retryable || attempt >= max_attempts)
      throw GatewayError(kind, why + " after " + std::to_string(attempt) + " attempt(s)", attempt);
    double delay = gateway_detail::backoff_delay(hooks, attempt - 1, rng);
    if (resp.retry_after_s) delay = std::max(delay, *resp.retry_after_s);
    hooks.sleep(delay);
  }
}

/// Identifies a trial to providers that answer from a script.
struct TrialContext {
  std::string maze_id;
  std::string scenario;
};

class Provider {
 public:
  virtual ~Provider() = default;
  virtual const ProviderConfig& config() const = 0;
  /// Thread-safe. Throws GatewayError.
  virtual Completion complete(const std::vector<ChatMessage>& messages, const TrialContext& ctx) = 0;
};

class ChatProvider : public Provider {
 public:
  ChatProvider(ProviderConfig cfg, std::shared_ptr<Transport> transport, GatewayHooks hooks = {})
      : cfg_(std::move(cfg)), transport_(std::move(transport)), hooks_(std::move(hooks)),
        limiter_(cfg_.rate_per_minute, hooks_.sleep) {}

  const ProviderConfig& config() const override { return cfg_; }

  Completion complete(const std::vector<ChatMessage>& messages, const TrialContext&) override {
    return complete_chat(cfg_, messages, *transport_, &limiter_, hooks_);
  }

 private:
  ProviderConfig cfg_;
  std::shared_ptr<Transport> transport_;
  GatewayHooks hooks_;
  RateLimiter limiter_;
};

/// Answers from a JSON object mapping "maze_id|scenario" (or "maze_id|*")
/// to response text. Unknown keys get `default`, or an error if absent.
/// A value of the form {"error": "timeout"} simulates a provider failure.
class MockProvider : public Provider {
 public:
  MockProvider(ProviderConfig cfg, nlohmann::json script) : cfg_(std::move(cfg)), script_(std::move(script)) {
    if (!script_.is_object() || !script_.contains("responses") || !script_["responses"].is_object())
      throw DomainError(cfg_.name + ": mock script needs a \"responses\" object");
  }

  static std::unique_ptr<MockProvider> from_config(const ProviderConfig& cfg) {
    return std::make_unique<MockProvider>(cfg, nlohmann::json::parse(read_text_file(cfg.script)));
  }

  const ProviderConfig& config() const override { return cfg_; }

  Completion complete(const std::vector<ChatMessage>& messages, const TrialContext& ctx) override {
    if (messages.empty()) throw DomainError("no messages");
    const auto& responses = script_["responses"];
    const nlohmann::json* hit = nullptr;
    for (const std::string& key : {ctx.maze_id + "|" + ctx.scenario, ctx.maze_id + "|*"}) {
      if (auto it = responses.find(key); it != responses.end()) {
        hit = &*it;
        break;
      }
    }
    if (!hit && script_.contains("default")) hit = &script_["default"];
    if (!hit)
      throw GatewayError(GatewayErrorKind::MalformedResponse,
                         "no scripted response for " + ctx.maze_id + "|" + ctx.scenario, 1);
    if (hit->is_object()) {
      const std::string err = hit->value("error", std::string("transport"));
      GatewayErrorKind kind = GatewayErrorKind::Transport;
      for (auto k : {GatewayErrorKind::Auth, GatewayErrorKind::RateLimited, GatewayErrorKind::Timeout,
                     GatewayErrorKind::Transport, GatewayErrorKind::MalformedResponse})
        if (err == gateway_error_name(k)) kind = k;
      throw GatewayError(kind, "scripted failure", cfg_.max_retries + 1);
    }
    Completion c;
    c.text = hit->get<std::string>();
    for (const auto& m : messages) c.tokens_in += static_cast<long>(m.content.size() / 4);
    c.tokens_out = static_cast<long>(c.text.size() / 4);
    return c;
  }

 private:
  ProviderConfig cfg_;
  nlohmann::json script_;
};

}  // namespace mazetest
