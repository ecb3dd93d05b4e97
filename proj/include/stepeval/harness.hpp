#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "stepeval/backend.hpp"
#include "stepeval/config.hpp"
#include "stepeval/dataset.hpp"
#include "stepeval/metrics.hpp"
#include "stepeval/prompt.hpp"

namespace stepeval {

struct Attempt {
  std::string text;
  double gate_similarity = 0.0;
  std::int64_t latency_ms = 0;
  std::optional<std::string> error;

  bool operator==(const Attempt&) const = default;
};

struct QuestionOutcome {
  std::string question_id;
  RenderedPrompt prompt;
  std::vector<Attempt> attempts;
  std::optional<std::string> final_text;
  bool discarded = false;
  std::optional<MetricReport> metrics;
  std::optional<bool> human_label;
  // Set when the question failed before generation or scoring degraded.
  std::optional<std::string> error;

  bool operator==(const QuestionOutcome&) const = default;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::size_t count = 0;

  bool operator==(const MetricSummary&) const = default;
};

struct ExperimentReport {
  nlohmann::ordered_json config;
  std::string strategy_label;
  std::string model_name;
  std::vector<QuestionOutcome> per_question;
  std::map<std::string, MetricSummary> aggregates;
  std::size_t scored_count = 0;
  double discard_rate = 0.0;
  std::optional<double> accuracy;
  std::size_t labeled_count = 0;
};

/// Everything run_question needs besides the question itself.
struct RunContext {
  const ExperimentConfig& config;
  Generator& generator;
  // Null means fit the gate IDF over the response/reference pair.
  const IdfModel* gate_idf = nullptr;
  const PromptTemplates& templates = PromptTemplates::defaults();
  const Embedder* embedder = nullptr;
};

/// Render, then generate -> gate -> regenerate until a response reaches the
/// gate threshold or attempts run out. Backend errors are recorded as failed
/// attempts and never escape.
QuestionOutcome run_question(const QuestionRecord& question, const PromptStrategy& strategy,
                             const ExemplarIndex& pool, const RunContext& context);

/// Recomputes aggregates, scored_count, discard_rate and accuracy from per_question.
void aggregate(ExperimentReport& report);

/// Evaluates the test split without writing anything.
ExperimentReport evaluate(const ExperimentConfig& config, Generator& generator,
                          const Embedder* embedder = nullptr);

/// evaluate() plus report files in config.output_dir when it is set.
ExperimentReport run_experiment(const ExperimentConfig& config, Generator& generator,
                                const Embedder* embedder = nullptr);

struct SweepEntry {
  int k = 0;
  ExperimentReport report;
};

/// One run per config.k_values entry with identical split and seeds. Writes
/// each report under output_dir/k<K>/ and the per-K table to output_dir/sweep.csv.
std::vector<SweepEntry> run_ksweep(const ExperimentConfig& config, Generator& generator,
                                   const Embedder* embedder = nullptr);

/// Labels are `id,true|false` lines; an optional `id,label` header is skipped.
ExperimentReport import_human_labels(ExperimentReport report, std::istream& labels);

enum class ReportFormat { structured, tabular };

/// structured -> report.json; tabular -> report.csv and summary.csv.
/// Files are written atomically. Returns the written paths.
std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, ReportFormat format,
                                               const std::filesystem::path& dir);
std::filesystem::path write_sweep_table(std::span<const SweepEntry> sweep,
                                        const std::filesystem::path& dir);

nlohmann::ordered_json report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& doc);
ExperimentReport load_report(const std::filesystem::path& path);

std::string per_question_csv(const ExperimentReport& report);
std::string summary_csv(std::span<const ExperimentReport> reports);
std::string sweep_csv(std::span<const SweepEntry> sweep);

/// Builds the configured generator. HTTP backends read the API key from the
/// named environment variable and fail with ValidationError when it is unset.
std::unique_ptr<Generator> make_generator(const BackendConfig& config);
/// Null for kind "none".
std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config);

}  // namespace stepeval
