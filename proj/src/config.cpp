#include "stepeval/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "stepeval/error.hpp"

namespace stepeval {
namespace {

using nlohmann::json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) throw ValidationError("config: unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get(const json& obj, const char* key, const std::string& where) {
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("config: '" + where + "." + key + "' has the wrong type");
  }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  const std::filesystem::path p(value);
  return p.is_absolute() || base.empty() ? p : base / p;
}

GateCorpus parse_gate_corpus(const std::string& text) {
  if (text == "split") return GateCorpus::split_references;
  if (text == "pair") return GateCorpus::pair;
  throw ValidationError("config: gate.idf_corpus must be 'split' or 'pair'");
}

}  // namespace

std::string_view to_string(GateCorpus corpus) {
  return corpus == GateCorpus::pair ? "pair" : "split";
}

void ExperimentConfig::validate() const {
  if (dataset_path.empty()) throw ValidationError("config: dataset_path is required");
  double sum = 0.0;
  for (double r : split_ratios) {
    if (!(r >= 0.0)) throw ValidationError("config: split ratios must be non-negative");
    sum += r;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("config: split ratios must sum to 1");
  if (dedupe_threshold && !(*dedupe_threshold > 0.0)) throw ValidationError("config: dedupe_threshold must be positive");

  strategy.validate();
  for (int k : k_values) {
    if (!strategy.uses_exemplars()) {
      throw ValidationError("config: k_values need a strategy that takes exemplars (kshot or analogical-cot)");
    }
    if (k < 0) throw ValidationError("config: k_values must be non-negative");
    PromptStrategy swept = strategy;
    swept.k = k;
    swept.validate();
  }

  if (!(gate_threshold >= 0.0 && gate_threshold <= 1.0)) throw ValidationError("config: gate threshold must lie in [0, 1]");
  if (max_attempts < 1) throw ValidationError("config: max_attempts must be >= 1");
  params.validate();
  if (parallelism < 1) throw ValidationError("config: parallelism must be >= 1");

  if (backend.kind == "http") {
    if (backend.endpoint.empty()) throw ValidationError("config: backend.endpoint is required for the http backend");
    if (backend.api_key_env.empty()) throw ValidationError("config: backend.api_key_env is required for the http backend");
  } else if (backend.kind == "stub-script") {
    if (backend.script_path.empty()) throw ValidationError("config: backend.script_path is required for stub-script");
  } else if (backend.kind != "stub-echo") {
    throw ValidationError("config: backend.kind must be http, stub-echo or stub-script");
  }
  if (backend.timeout_ms <= 0 || backend.max_connections <= 0) {
    throw ValidationError("config: backend timeout_ms and max_connections must be positive");
  }

  if (embedder.kind == "http") {
    if (embedder.endpoint.empty()) throw ValidationError("config: embedder.endpoint is required for the http embedder");
  } else if (embedder.kind != "none" && embedder.kind != "hash") {
    throw ValidationError("config: embedder.kind must be none, hash or http");
  }
  if (embedder.kind == "hash" && embedder.dimension == 0) throw ValidationError("config: embedder.dimension must be positive");
}

nlohmann::ordered_json ExperimentConfig::echo() const {
  nlohmann::ordered_json doc;
  doc["dataset_path"] = dataset_path.generic_string();
  doc["split"] = {{"seed", split_seed}, {"ratios", split_ratios}};
  doc["dedupe_threshold"] = dedupe_threshold ? nlohmann::ordered_json(*dedupe_threshold) : nlohmann::ordered_json();
  doc["prompt"] = {{"strategy", std::string(to_string(strategy.kind))},
                   {"k", strategy.k},
                   {"self_examples", strategy.self_examples},
                   {"state_self_example_count", state_self_example_count},
                   {"template_path", template_path ? nlohmann::ordered_json(template_path->generic_string())
                                                   : nlohmann::ordered_json()}};
  doc["k_values"] = k_values;
  doc["gate"] = {{"threshold", gate_threshold}, {"max_attempts", max_attempts}, {"idf_corpus", std::string(to_string(gate_corpus))}};
  doc["backend"] = {{"kind", backend.kind},
                    {"endpoint", backend.endpoint},
                    {"api_key_env", backend.api_key_env},
                    {"timeout_ms", backend.timeout_ms},
                    {"script_path", backend.script_path.generic_string()}};
  doc["params"] = {{"temperature", params.temperature},
                   {"repetition_penalty", params.repetition_penalty},
                   {"max_tokens", params.max_tokens},
                   {"model_name", params.model_name}};
  doc["embedder"] = {{"kind", embedder.kind}, {"endpoint", embedder.endpoint}, {"dimension", embedder.dimension}};
  doc["run_seed"] = run_seed;
  return doc;
}

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  check_keys(doc,
             {"dataset_path", "split", "dedupe_threshold", "prompt", "k_values", "gate", "backend", "params",
              "embedder", "parallelism", "output_dir", "run_seed"},
             "config");
  ExperimentConfig c;
  if (doc.contains("dataset_path")) c.dataset_path = resolve(base_dir, get<std::string>(doc, "dataset_path", "config"));
  if (doc.contains("split")) {
    const auto& s = doc["split"];
    check_keys(s, {"seed", "ratios"}, "split");
    if (s.contains("seed")) c.split_seed = get<std::uint64_t>(s, "seed", "split");
    if (s.contains("ratios")) {
      const auto ratios = get<std::vector<double>>(s, "ratios", "split");
      if (ratios.size() != 3) throw ValidationError("config: split.ratios needs exactly three values");
      c.split_ratios = {ratios[0], ratios[1], ratios[2]};
    }
  }
  if (doc.contains("dedupe_threshold") && !doc["dedupe_threshold"].is_null()) {
    c.dedupe_threshold = get<double>(doc, "dedupe_threshold", "config");
  }
  if (doc.contains("prompt")) {
    const auto& p = doc["prompt"];
    check_keys(p, {"strategy", "k", "self_examples", "template_path"}, "prompt");
    const StrategyKind kind = parse_strategy_kind(p.contains("strategy") ? get<std::string>(p, "strategy", "prompt") : "baseline");
    const std::optional<int> k = p.contains("k") ? std::optional(get<int>(p, "k", "prompt")) : std::nullopt;
    const std::optional<int> self = p.contains("self_examples") ? std::optional(get<int>(p, "self_examples", "prompt")) : std::nullopt;
    switch (kind) {
      case StrategyKind::baseline_zero_shot:
        c.strategy = {kind, k.value_or(0), self.value_or(0)};
        break;
      case StrategyKind::kshot_cot:
        c.strategy = {kind, k.value_or(3), self.value_or(0)};
        break;
      case StrategyKind::analogical:
        c.strategy = {kind, k.value_or(0), self.value_or(kDefaultSelfExamples)};
        c.state_self_example_count = self.has_value();
        break;
      case StrategyKind::analogical_cot:
        c.strategy = {kind, k.value_or(kDefaultAnalogicalCotK), self.value_or(kDefaultSelfExamples)};
        break;
    }
    if (p.contains("template_path") && !p["template_path"].is_null()) {
      c.template_path = resolve(base_dir, get<std::string>(p, "template_path", "prompt"));
    }
  }
  if (doc.contains("k_values")) c.k_values = get<std::vector<int>>(doc, "k_values", "config");
  if (doc.contains("gate")) {
    const auto& g = doc["gate"];
    check_keys(g, {"threshold", "max_attempts", "idf_corpus"}, "gate");
    if (g.contains("threshold")) c.gate_threshold = get<double>(g, "threshold", "gate");
    if (g.contains("max_attempts")) c.max_attempts = get<int>(g, "max_attempts", "gate");
    if (g.contains("idf_corpus")) c.gate_corpus = parse_gate_corpus(get<std::string>(g, "idf_corpus", "gate"));
  }
  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    check_keys(b, {"kind", "endpoint", "api_key_env", "timeout_ms", "max_connections", "script_path"}, "backend");
    if (b.contains("kind")) c.backend.kind = get<std::string>(b, "kind", "backend");
    if (b.contains("endpoint")) c.backend.endpoint = get<std::string>(b, "endpoint", "backend");
    if (b.contains("api_key_env")) c.backend.api_key_env = get<std::string>(b, "api_key_env", "backend");
    if (b.contains("timeout_ms")) c.backend.timeout_ms = get<int>(b, "timeout_ms", "backend");
    if (b.contains("max_connections")) c.backend.max_connections = get<int>(b, "max_connections", "backend");
    if (b.contains("script_path")) c.backend.script_path = resolve(base_dir, get<std::string>(b, "script_path", "backend"));
  }
  if (doc.contains("params")) {
    const auto& p = doc["params"];
    check_keys(p, {"temperature", "repetition_penalty", "max_tokens", "model_name"}, "params");
    if (p.contains("temperature")) c.params.temperature = get<double>(p, "temperature", "params");
    if (p.contains("repetition_penalty")) c.params.repetition_penalty = get<double>(p, "repetition_penalty", "params");
    if (p.contains("max_tokens")) c.params.max_tokens = get<int>(p, "max_tokens", "params");
    if (p.contains("model_name")) c.params.model_name = get<std::string>(p, "model_name", "params");
  }
  if (doc.contains("embedder")) {
    const auto& e = doc["embedder"];
    check_keys(e, {"kind", "endpoint", "dimension", "timeout_ms"}, "embedder");
    if (e.contains("kind")) c.embedder.kind = get<std::string>(e, "kind", "embedder");
    if (e.contains("endpoint")) c.embedder.endpoint = get<std::string>(e, "endpoint", "embedder");
    if (e.contains("dimension")) c.embedder.dimension = get<std::size_t>(e, "dimension", "embedder");
    if (e.contains("timeout_ms")) c.embedder.timeout_ms = get<int>(e, "timeout_ms", "embedder");
  }
  if (doc.contains("parallelism")) c.parallelism = get<int>(doc, "parallelism", "config");
  if (doc.contains("output_dir")) c.output_dir = resolve(base_dir, get<std::string>(doc, "output_dir", "config"));
  if (doc.contains("run_seed")) c.run_seed = get<std::uint64_t>(doc, "run_seed", "config");
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError("config '" + path.string() + "': " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

}  // namespace stepeval
