#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "rephrasecal/client.hpp"

namespace rephrasecal {

namespace {

std::string env_or(const char* name, std::string fallback = {}) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::move(fallback);
}

bool retryable_status(int status) { return status == 429 || status == 408 || status >= 500; }

class SemaphoreGuard {
 public:
  explicit SemaphoreGuard(std::counting_semaphore<1024>& s) : s_(s) { s_.acquire(); }
  ~SemaphoreGuard() { s_.release(); }
  SemaphoreGuard(const SemaphoreGuard&) = delete;
  SemaphoreGuard& operator=(const SemaphoreGuard&) = delete;

 private:
  std::counting_semaphore<1024>& s_;
};

}  // namespace

RemoteConfig remote_config_from_env() {
  RemoteConfig cfg;
  cfg.base_url = env_or("RCAL_BASE_URL");
  cfg.api_token = env_or("RCAL_API_TOKEN");
  cfg.model = env_or("RCAL_MODEL", "default");
  return cfg;
}

nlohmann::json build_request_body(const CompletionRequest& req, const std::string& model) {
  nlohmann::json body;
  body["model"] = model;
  body["messages"] = nlohmann::json::array({{{"role", "user"}, {"content", req.prompt}}});
  switch (req.decode.mode) {
    case DecodeMode::kTop1:
      body["temperature"] = 0.0;
      break;
    case DecodeMode::kTopK:
      body["top_k"] = req.decode.k;
      break;
    case DecodeMode::kTemperature:
      body["temperature"] = req.decode.sampling_temperature;
      break;
  }
  body["max_tokens"] = req.max_tokens;
  // Most endpoints take a signed 32-bit seed.
  if (req.seed) body["seed"] = static_cast<std::int64_t>(*req.seed & 0x7fffffffULL);
  return body;
}

std::string parse_response_body(const std::string& body) {
  try {
    const auto j = nlohmann::json::parse(body);
    const auto& choice = j.at("choices").at(0);
    if (choice.contains("message")) return choice.at("message").at("content").get<std::string>();
    return choice.at("text").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("malformed completion response: ") + e.what(), false);
  }
}

RemoteBackend::RemoteBackend(RemoteConfig cfg)
    : cfg_(std::move(cfg)), in_flight_(std::clamp(cfg_.max_in_flight, 1, 1024)) {
  if (cfg_.base_url.empty()) throw std::invalid_argument("remote backend: base URL not configured");
  if (cfg_.max_attempts < 1) throw std::invalid_argument("remote backend: max_attempts must be >= 1");
}

void RemoteBackend::log(const std::string& msg) const {
  if (cfg_.logger) {
    cfg_.logger(msg);
  } else {
    std::cerr << "[remote] " << msg << '\n';
  }
}

std::string RemoteBackend::attempt(const std::string& body) {
  httplib::Client cli(cfg_.base_url);
  cli.set_connection_timeout(cfg_.timeout);
  cli.set_read_timeout(cfg_.timeout);
  cli.set_write_timeout(cfg_.timeout);
  httplib::Headers headers;
  if (!cfg_.api_token.empty()) headers.emplace("Authorization", "Bearer " + cfg_.api_token);
  for (const auto& [k, v] : cfg_.headers) headers.emplace(k, v);

  auto res = cli.Post(cfg_.path, headers, body, "application/json");
  if (!res) {
    throw BackendError("transport error: " + httplib::to_string(res.error()), true);
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError("HTTP " + std::to_string(res->status) + ": " + res->body,
                       retryable_status(res->status), res->status);
  }
  return parse_response_body(res->body);
}

std::string RemoteBackend::complete(const CompletionRequest& req) {
  const std::string body = build_request_body(req, cfg_.model).dump();
  SemaphoreGuard guard(in_flight_);
  auto backoff = std::chrono::duration<double, std::milli>(cfg_.initial_backoff);
  for (int n = 1;; ++n) {
    try {
      auto text = attempt(body);
      log("attempt " + std::to_string(n) + "/" + std::to_string(cfg_.max_attempts) + ": ok");
      return text;
    } catch (const BackendError& e) {
      std::ostringstream msg;
      msg << "attempt " << n << "/" << cfg_.max_attempts << ": " << e.what();
      if (!e.retryable() || n >= cfg_.max_attempts) {
        log(msg.str());
        throw;
      }
      double jitter;
      {
        std::lock_guard lock(jitter_mu_);
        jitter = 0.5 + uniform_open01(jitter_rng_);
      }
      const auto wait = backoff * jitter;
      msg << ", retrying in " << wait.count() << " ms";
      log(msg.str());
      std::this_thread::sleep_for(wait);
      backoff *= cfg_.backoff_factor;
    }
  }
}

}  // namespace rephrasecal
