#include <fstream>

#include <json.hpp>

#include "stepeval/backend.hpp"
#include "stepeval/error.hpp"

namespace stepeval {

StubBackend::StubBackend(std::vector<Rule> script, Mode mode) : script_(std::move(script)), mode_(mode) {
  if (mode_ == Mode::scripted && script_.empty()) throw ValidationError("scripted stub needs at least one rule");
  for (const auto& rule : script_) {
    if (rule.replies.empty()) throw ValidationError("stub rule '" + rule.pattern + "' has no reply");
  }
}

std::unique_ptr<StubBackend> StubBackend::echo() {
  return std::make_unique<StubBackend>(std::vector<Rule>{}, Mode::echo);
}

GenerationResult StubBackend::generate(std::string_view prompt, const GenerationParams& params) {
  if (prompt.empty()) throw BackendError(BackendErrorKind::configuration, id(), "prompt must not be empty");
  params.validate();

  std::lock_guard lock(mutex_);
  std::string reply;
  if (mode_ == Mode::echo) {
    reply = prompt;
  } else {
    reply = kNoMatch;
    for (const auto& rule : script_) {
      if (prompt.find(rule.pattern) == std::string_view::npos) continue;
      auto [it, inserted] = prompt_hits_.try_emplace(std::string(prompt), 0);
      const std::size_t index = std::min(it->second, rule.replies.size() - 1);
      ++it->second;
      reply = rule.replies[index];
      break;
    }
  }
  calls_.push_back({std::string(prompt), reply});
  return {std::move(reply), 0, id(), "stop"};
}

std::string StubBackend::id() const { return mode_ == Mode::echo ? "stub-echo" : "stub-script"; }

std::vector<StubBackend::Call> StubBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::size_t StubBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return calls_.size();
}

std::vector<StubBackend::Rule> load_stub_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open stub script '" + path.string() + "'");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("stub script '" + path.string() + "': " + e.what());
  }
  if (!doc.is_array()) throw ValidationError("stub script must be a JSON array of rules");
  std::vector<StubBackend::Rule> rules;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("pattern") || !item["pattern"].is_string()) {
      throw ValidationError("stub rule needs a string 'pattern'");
    }
    StubBackend::Rule rule{item["pattern"].get<std::string>(), {}};
    if (item.contains("reply") && item["reply"].is_string()) {
      rule.replies.push_back(item["reply"].get<std::string>());
    } else if (item.contains("replies") && item["replies"].is_array()) {
      for (const auto& r : item["replies"]) {
        if (!r.is_string()) throw ValidationError("stub replies must be strings");
        rule.replies.push_back(r.get<std::string>());
      }
    }
    if (rule.replies.empty()) throw ValidationError("stub rule '" + rule.pattern + "' has no reply");
    rules.push_back(std::move(rule));
  }
  return rules;
}

}  // namespace stepeval
