#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "stepeval/backend.hpp"
#include "stepeval/prompt.hpp"

namespace stepeval {

// Which texts the regeneration gate fits its IDF over.
enum class GateCorpus {
  split_references,  // every reference text of the evaluated split
  pair,              // just the response and its reference
};

struct BackendConfig {
  std::string kind = "stub-echo";  // http | stub-echo | stub-script
  std::string endpoint;
  std::string api_key_env = "OPENAI_API_KEY";
  int timeout_ms = 60000;
  int max_connections = 8;
  std::filesystem::path script_path;
};

struct EmbedderConfig {
  std::string kind = "none";  // none | hash | http
  std::string endpoint;
  std::size_t dimension = 64;
  int timeout_ms = 30000;
};

struct ExperimentConfig {
  std::filesystem::path dataset_path;
  std::uint64_t split_seed = 42;
  std::array<double, 3> split_ratios{0.6, 0.2, 0.2};
  std::optional<double> dedupe_threshold;

  PromptStrategy strategy = PromptStrategy::baseline();
  // Analogical prompts name the self-example count only when it was configured.
  bool state_self_example_count = false;
  std::optional<std::filesystem::path> template_path;
  std::vector<int> k_values;

  double gate_threshold = 0.3;
  int max_attempts = 3;
  GateCorpus gate_corpus = GateCorpus::split_references;

  BackendConfig backend;
  GenerationParams params;
  EmbedderConfig embedder;

  int parallelism = 1;
  std::filesystem::path output_dir;
  std::uint64_t run_seed = 0;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  /// Config echo for reports. Execution-only fields (parallelism, output_dir)
  /// are left out so they cannot change report bytes.
  nlohmann::ordered_json echo() const;
};

/// Unknown keys are rejected. Relative paths resolve against `base_dir`.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path);

std::string_view to_string(GateCorpus corpus);

}  // namespace stepeval
