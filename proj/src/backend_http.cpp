#include <chrono>
#include <regex>
#include <semaphore>

#include <json.hpp>

#include "http_util.hpp"
#include "stepeval/backend.hpp"
#include "stepeval/error.hpp"

namespace stepeval {

namespace detail {

std::optional<ParsedUrl> parse_url(std::string_view url) {
  static const std::regex pattern(R"(^(https?)://([A-Za-z0-9.\-_]+|\[[0-9A-Fa-f:.]+\])(:[0-9]{1,5})?(/[^#\s]*)?$)");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_match(url.begin(), url.end(), m, pattern)) return std::nullopt;
  ParsedUrl parsed;
  parsed.origin = m[1].str() + "://" + m[2].str() + m[3].str();
  parsed.path = m[4].matched ? m[4].str() : "/";
  return parsed;
}

std::unique_ptr<httplib::Client> make_client(const ParsedUrl& url, int timeout_ms) {
  auto client = std::make_unique<httplib::Client>(url.origin);
  const std::chrono::milliseconds timeout(timeout_ms);
  client->set_connection_timeout(timeout);
  client->set_read_timeout(timeout);
  client->set_write_timeout(timeout);
  return client;
}

}  // namespace detail

void GenerationParams::validate() const {
  if (!(temperature >= 0.0)) throw ValidationError("temperature must be >= 0");
  if (!(repetition_penalty >= 1.0)) throw ValidationError("repetition_penalty must be >= 1.0");
  if (max_tokens < 1) throw ValidationError("max_tokens must be >= 1");
}

std::string_view to_string(BackendErrorKind kind) {
  switch (kind) {
    case BackendErrorKind::transport: return "transport";
    case BackendErrorKind::status: return "status";
    case BackendErrorKind::timeout: return "timeout";
    case BackendErrorKind::malformed_response: return "malformed_response";
    case BackendErrorKind::configuration: return "configuration";
  }
  return "unknown";
}

BackendError::BackendError(BackendErrorKind kind, std::string backend_id, const std::string& message, int status)
    : std::runtime_error(backend_id + ": " + std::string(to_string(kind)) + ": " + message),
      kind_(kind),
      backend_id_(std::move(backend_id)),
      status_(status) {}

bool BackendError::retryable() const noexcept {
  switch (kind_) {
    case BackendErrorKind::transport:
    case BackendErrorKind::timeout:
      return true;
    case BackendErrorKind::status:
      return status_ == 429 || status_ >= 500;
    default:
      return false;
  }
}

double frequency_penalty_for(double repetition_penalty) {
  return std::min(2.0, 2.0 * (repetition_penalty - 1.0));
}

struct HttpChatBackend::Impl {
  Impl(std::string endpoint_, std::string api_key_, int timeout_ms_, int max_connections)
      : endpoint(std::move(endpoint_)), api_key(std::move(api_key_)), timeout_ms(timeout_ms_), slots(max_connections) {}

  std::string endpoint;
  detail::ParsedUrl url;
  std::string api_key;
  int timeout_ms;
  std::counting_semaphore<> slots;
};

HttpChatBackend::HttpChatBackend(std::string endpoint, std::string api_key, int timeout_ms, int max_connections) {
  const std::string backend_id = "http:" + endpoint;
  if (endpoint.empty()) throw BackendError(BackendErrorKind::configuration, backend_id, "endpoint is empty");
  auto url = detail::parse_url(endpoint);
  if (!url) throw BackendError(BackendErrorKind::configuration, backend_id, "endpoint '" + endpoint + "' is not an http(s) URL");
  if (timeout_ms <= 0) throw BackendError(BackendErrorKind::configuration, backend_id, "timeout_ms must be positive");
  if (max_connections <= 0) throw BackendError(BackendErrorKind::configuration, backend_id, "max_connections must be positive");
  impl_ = std::make_unique<Impl>(std::move(endpoint), std::move(api_key), timeout_ms, max_connections);
  impl_->url = *url;
}

HttpChatBackend::~HttpChatBackend() = default;

std::string HttpChatBackend::id() const { return "http:" + impl_->endpoint; }

std::string HttpChatBackend::request_body(std::string_view prompt, const GenerationParams& params) {
  nlohmann::ordered_json body;
  body["model"] = params.model_name;
  body["messages"] = nlohmann::ordered_json::array({{{"role", "user"}, {"content", std::string(prompt)}}});
  body["temperature"] = params.temperature;
  body["max_tokens"] = params.max_tokens;
  if (params.seed) body["seed"] = *params.seed;
  body["frequency_penalty"] = frequency_penalty_for(params.repetition_penalty);
  return body.dump();
}

GenerationResult HttpChatBackend::parse_response(std::string_view body, const std::string& backend_id) {
  auto malformed = [&](const std::string& why) {
    return BackendError(BackendErrorKind::malformed_response, backend_id, why);
  };
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw malformed(std::string("response is not JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() || doc["choices"].empty()) {
    throw malformed("response has no choices");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw malformed("first choice has no message");
  }
  const auto& content = choice["message"].value("content", nlohmann::json());
  if (!content.is_string()) throw malformed("message content is not a string");

  GenerationResult result;
  result.text = content.get<std::string>();
  result.backend_id = backend_id;
  if (auto it = choice.find("finish_reason"); it != choice.end() && it->is_string()) {
    result.raw_finish_reason = it->get<std::string>();
  }
  return result;
}

GenerationResult HttpChatBackend::generate(std::string_view prompt, const GenerationParams& params) {
  if (prompt.empty()) throw BackendError(BackendErrorKind::configuration, id(), "prompt must not be empty");
  params.validate();

  impl_->slots.acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{impl_->slots};

  auto client = detail::make_client(impl_->url, impl_->timeout_ms);
  const httplib::Headers headers = {{"Authorization", "Bearer " + impl_->api_key}};
  const auto start = std::chrono::steady_clock::now();
  auto res = client->Post(impl_->url.path, headers, request_body(prompt, params), "application/json");
  const auto elapsed =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();

  if (!res) {
    const auto error = res.error();
    const bool timed_out = error == httplib::Error::ConnectionTimeout ||
                           ((error == httplib::Error::Read || error == httplib::Error::Write) &&
                            elapsed * 10 >= static_cast<long long>(impl_->timeout_ms) * 9);
    throw BackendError(timed_out ? BackendErrorKind::timeout : BackendErrorKind::transport, id(),
                       httplib::to_string(error) + " after " + std::to_string(elapsed) + " ms");
  }
  if (res->status < 200 || res->status >= 300) {
    throw BackendError(BackendErrorKind::status, id(),
                       "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200), res->status);
  }
  GenerationResult result = parse_response(res->body, id());
  result.latency_ms = elapsed;
  return result;
}

}  // namespace stepeval
