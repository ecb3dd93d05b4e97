#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stepeval {

struct GenerationParams {
  double temperature = 0.7;
  // Multiplicative penalty, 1.0 disables it.
  double repetition_penalty = 1.1;
  int max_tokens = 1024;
  std::optional<std::int64_t> seed;
  std::string model_name = "mistral-7b";

  void validate() const;
};

struct GenerationResult {
  std::string text;
  std::int64_t latency_ms = 0;
  std::string backend_id;
  std::string raw_finish_reason;
};

enum class BackendErrorKind { transport, status, timeout, malformed_response, configuration };

std::string_view to_string(BackendErrorKind kind);

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, std::string backend_id, const std::string& message,
               int status = 0);

  BackendErrorKind kind() const noexcept { return kind_; }
  const std::string& backend_id() const noexcept { return backend_id_; }
  // HTTP status for BackendErrorKind::status, 0 otherwise.
  int status() const noexcept { return status_; }
  // Transport failures, timeouts, 429 and 5xx are worth another attempt.
  bool retryable() const noexcept;

 private:
  BackendErrorKind kind_;
  std::string backend_id_;
  int status_;
};

/// Text generation contract. Implementations must tolerate concurrent
/// generate() calls. None of them retry; the harness owns attempt counting.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual GenerationResult generate(std::string_view prompt, const GenerationParams& params) = 0;
  virtual std::string id() const = 0;
};

/// OpenAI frequency_penalty lives in [-2, 2]; a repetition penalty r maps to
/// min(2, 2 (r - 1)). The mapping is lossy: one is multiplicative on logits,
/// the other additive on counts.
double frequency_penalty_for(double repetition_penalty);

/// OpenAI-compatible chat-completions client.
class HttpChatBackend final : public Generator {
 public:
  // Throws BackendError(configuration) for an empty or unparsable endpoint or
  // non-positive timeout / connection limit.
  HttpChatBackend(std::string endpoint, std::string api_key, int timeout_ms,
                  int max_connections = 8);
  ~HttpChatBackend() override;

  GenerationResult generate(std::string_view prompt, const GenerationParams& params) override;
  std::string id() const override;

  static std::string request_body(std::string_view prompt, const GenerationParams& params);
  // Extracts choices[0].message.content and finish_reason. Throws
  // BackendError(malformed_response).
  static GenerationResult parse_response(std::string_view body, const std::string& backend_id);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Scripted or echoing generator for tests and dry runs. Every call is logged.
class StubBackend final : public Generator {
 public:
  enum class Mode { scripted, echo };

  struct Rule {
    std::string pattern;
    // Successive calls with the same prompt walk this list; the last reply repeats.
    std::vector<std::string> replies;
  };

  struct Call {
    std::string prompt;
    std::string reply;
  };

  static constexpr std::string_view kNoMatch = "NO_MATCH";

  // Throws ValidationError for an empty script in scripted mode or a rule without replies.
  StubBackend(std::vector<Rule> script, Mode mode);
  static std::unique_ptr<StubBackend> echo();

  GenerationResult generate(std::string_view prompt, const GenerationParams& params) override;
  std::string id() const override;

  std::vector<Call> calls() const;
  std::size_t call_count() const;

 private:
  std::vector<Rule> script_;
  Mode mode_;
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
  std::map<std::string, std::size_t, std::less<>> prompt_hits_;
};

/// Reads a stub script: a JSON array of {"pattern": ..., "reply": ...} or
/// {"pattern": ..., "replies": [...]} objects.
std::vector<StubBackend::Rule> load_stub_script(const std::filesystem::path& path);

}  // namespace stepeval
