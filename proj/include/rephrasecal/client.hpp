#pragma once

// Completion backends behind one interface: a remote chat-completions endpoint,
// a scripted mock for fixtures, and the latent toy model.

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "rephrasecal/core.hpp"
#include "rephrasecal/rng.hpp"

namespace rephrasecal {

enum class Purpose { kAnswer, kRephrase };

struct CompletionRequest {
  std::string prompt;
  DecodeConfig decode;
  int max_tokens = 32;
  std::optional<std::uint64_t> seed;
  // Routing metadata. Remote endpoints ignore these; the toy backend uses them
  // to find the question's latent state and whether rephrasing noise applies.
  Purpose purpose = Purpose::kAnswer;
  std::string question_id;
  bool rephrased = false;
};

class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, bool retryable, int status = 0)
      : std::runtime_error(what), retryable_(retryable), status_(status) {}
  bool retryable() const { return retryable_; }
  int status() const { return status_; }

 private:
  bool retryable_;
  int status_;
};

class FixtureMissing : public BackendError {
 public:
  explicit FixtureMissing(const std::string& what) : BackendError(what, false) {}
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  /// Must be safe to call concurrently.
  virtual std::string complete(const CompletionRequest& req) = 0;
  virtual std::string name() const = 0;
};

// ---------------------------------------------------------------------------
// Latent toy model

/// Binary hyperplane classifier over a latent vector. Class A wins when
/// w.z + b + noise > 0, where the noise along w is logistic(0, s).
struct LatentToyModel {
  int latent_dim = 1;
  std::vector<double> w{1.0};
  double b = 0.0;
  std::vector<double> z_mean{0.0};
  double s_rephrase = 1.0;
  double s_topk = 0.0;
  ChoiceLabel label_a{0};
  ChoiceLabel label_b{1};

  /// w.z_mean + b
  double gap() const;
  /// 1 / (1 + exp(-gap))
  double analytic_p_a() const;
  /// Logistic scale applied for one request. top1 adds only rephrasing noise;
  /// topk and temperature sampling add top-k noise, combined in quadrature
  /// with rephrasing noise when the query was rephrased.
  double noise_scale(const DecodeConfig& decode, bool rephrased) const;

  /// A one-dimensional model with w = 1 and z_mean = gap.
  static LatentToyModel with_gap(double gap, double s_rephrase = 1.0, double s_topk = 0.0);
  /// A random hyperplane in `dim` dimensions with b chosen so that gap() == gap.
  static LatentToyModel random(int dim, double gap, double s_rephrase, double s_topk, Rng& rng);
};

struct ToyLogits {
  double a = 0.0;
  double b = 0.0;
};

/// (w.z + b, 0): the two-class logits whose softmax matches the hyperplane.
ToyLogits toy_logits(const LatentToyModel& model, std::span<const double> z);
/// Softmax probability of class A.
double softmax_a(const ToyLogits& logits);

/// One draw: true when class A is produced under logistic noise of `scale`.
bool sample_class_a(const LatentToyModel& model, double scale, Rng& rng);

/// Number of class-A outcomes in `n` draws. Draws are split into fixed blocks,
/// each with its own stream derived from `seed`; blocks run under OpenMP.
std::uint64_t count_class_a(const LatentToyModel& model, double scale, std::uint64_t n,
                            std::uint64_t seed);

namespace serial {
std::uint64_t count_class_a(const LatentToyModel& model, double scale, std::uint64_t n,
                            std::uint64_t seed);
}

class ToyBackend : public CompletionBackend {
 public:
  explicit ToyBackend(std::map<std::string, LatentToyModel> models);

  /// Answer requests yield "The answer is X." for the sampled class label.
  /// Rephrase requests yield a seeded placeholder stem.
  std::string complete(const CompletionRequest& req) override;
  std::string name() const override { return "toy"; }

  const LatentToyModel& model(const std::string& question_id) const;
  const std::map<std::string, LatentToyModel>& models() const { return models_; }

 private:
  std::map<std::string, LatentToyModel> models_;
};

// ---------------------------------------------------------------------------
// Mock

/// Lowercase hex SHA-256 of the prompt.
std::string prompt_hash(std::string_view prompt);

/// Scripted completions keyed by prompt hash. When a prompt has several
/// fixtures, the request seed selects one (seed mod count).
class MockBackend : public CompletionBackend {
 public:
  MockBackend() = default;
  /// JSONL lines of {"promptHash": ..., "completion": ...}; "prompt" may stand
  /// in for "promptHash".
  static MockBackend load_jsonl(const std::string& path);

  void add(std::string_view prompt, std::string completion);
  void add_hash(std::string hash, std::string completion);

  std::string complete(const CompletionRequest& req) override;
  std::string name() const override { return "mock"; }
  std::size_t size() const { return fixtures_.size(); }

 private:
  std::map<std::string, std::vector<std::string>> fixtures_;
};

// ---------------------------------------------------------------------------
// Remote

struct RemoteConfig {
  std::string base_url;  // scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string api_token;
  std::map<std::string, std::string> headers;
  std::chrono::milliseconds timeout{60000};
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  int max_in_flight = 8;
  std::function<void(const std::string&)> logger;  // defaults to stderr
};

/// Reads RCAL_BASE_URL, RCAL_API_TOKEN and RCAL_MODEL into a config.
RemoteConfig remote_config_from_env();

/// Chat-completions request body for `req`.
nlohmann::json build_request_body(const CompletionRequest& req, const std::string& model);
/// Text of the first choice; throws BackendError on a malformed body.
std::string parse_response_body(const std::string& body);

class RemoteBackend : public CompletionBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg);

  /// POSTs with bounded retries on transport errors, 429 and 5xx. Other
  /// non-2xx statuses surface immediately with the response body.
  std::string complete(const CompletionRequest& req) override;
  std::string name() const override { return "remote:" + cfg_.base_url; }

 private:
  std::string attempt(const std::string& body);
  void log(const std::string& msg) const;

  RemoteConfig cfg_;
  std::counting_semaphore<1024> in_flight_;
  std::mutex jitter_mu_;
  Rng jitter_rng_{std::random_device{}()};
};

}  // namespace rephrasecal
