#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stepeval/dataset.hpp"
#include "stepeval/metrics.hpp"

namespace stepeval {

enum class StrategyKind { baseline_zero_shot, kshot_cot, analogical, analogical_cot };

std::string_view to_string(StrategyKind kind);
/// Accepts the canonical names and the CLI spellings
/// (baseline, kshot, analogical, analogical-cot).
StrategyKind parse_strategy_kind(std::string_view text);

inline constexpr int kDefaultSelfExamples = 3;
inline constexpr int kDefaultAnalogicalCotK = 3;

struct PromptStrategy {
  StrategyKind kind = StrategyKind::baseline_zero_shot;
  int k = 0;
  int self_examples = 0;

  static PromptStrategy baseline() { return {}; }
  static PromptStrategy kshot(int k) { return {StrategyKind::kshot_cot, k, 0}; }
  static PromptStrategy analogical(int self_examples = kDefaultSelfExamples) {
    return {StrategyKind::analogical, 0, self_examples};
  }
  static PromptStrategy analogical_cot(int k = kDefaultAnalogicalCotK,
                                       int self_examples = kDefaultSelfExamples) {
    return {StrategyKind::analogical_cot, k, self_examples};
  }

  bool uses_exemplars() const noexcept {
    return kind == StrategyKind::kshot_cot || kind == StrategyKind::analogical_cot;
  }
  // Throws ValidationError when k / self_examples contradict the kind.
  void validate() const;

  bool operator==(const PromptStrategy&) const = default;
};

struct RenderedPrompt {
  std::string text;
  PromptStrategy strategy;
  std::vector<std::string> exemplar_ids;
  std::string target_id;

  bool operator==(const RenderedPrompt&) const = default;
};

/// Prompt text templates. Placeholders: {question} {steps} {final_answer}
/// {index} {count}. Substitution is single pass, so inserted text is never
/// re-expanded.
struct PromptTemplates {
  std::string baseline;
  std::string kshot_exemplar;
  std::string kshot_target;
  std::string analogical;
  std::string analogical_counted;
  std::string analogical_cot_exemplar;
  std::string analogical_cot_target;

  static const PromptTemplates& defaults();

  /// Reads a template file made of `[[section]]` headers followed by the
  /// section text. Sections not present keep their default text.
  static PromptTemplates parse(std::istream& in);
  static PromptTemplates load(const std::filesystem::path& path);
};

/// Ranks `pool` by TF-IDF cosine against target.question (IDF fitted over the
/// pool's questions) and keeps the top k; ties go to the smaller id.
class ExemplarIndex {
 public:
  struct Options {
    // Also skip pool records whose question text equals the target's.
    bool exclude_same_question = false;
    // When non-zero and more candidates remain, a seeded subsample of this
    // size is ranked instead of the whole pool.
    std::size_t max_candidates = 0;
  };

  explicit ExemplarIndex(std::vector<QuestionRecord> pool);

  /// Records with target.id are always excluded. Throws ValidationError when
  /// fewer than k candidates remain.
  std::vector<QuestionRecord> select(const QuestionRecord& target, int k, std::uint64_t seed,
                                     const Options& options) const;
  std::vector<QuestionRecord> select(const QuestionRecord& target, int k,
                                     std::uint64_t seed) const {
    return select(target, k, seed, Options{});
  }

  std::size_t size() const noexcept { return pool_.size(); }

 private:
  std::vector<QuestionRecord> pool_;
  IdfModel idf_;
  std::vector<TfIdfVector> vectors_;
};

std::vector<QuestionRecord> select_exemplars(const QuestionRecord& target,
                                             std::span<const QuestionRecord> pool, int k,
                                             std::uint64_t seed);

RenderedPrompt render_baseline(const QuestionRecord& target,
                               const PromptTemplates& templates = PromptTemplates::defaults());

RenderedPrompt render_kshot_cot(const QuestionRecord& target,
                                std::span<const QuestionRecord> exemplars,
                                const PromptTemplates& templates = PromptTemplates::defaults());

/// With no count the wording is the bare "Recall relevant exemplars ..." form.
RenderedPrompt render_analogical(const QuestionRecord& target,
                                 std::optional<int> self_examples = std::nullopt,
                                 const PromptTemplates& templates = PromptTemplates::defaults());

RenderedPrompt render_analogical_cot(const QuestionRecord& target,
                                     std::span<const QuestionRecord> exemplars,
                                     int self_examples = kDefaultSelfExamples,
                                     const PromptTemplates& templates = PromptTemplates::defaults());

/// Dispatches on strategy.kind. `state_count` only affects the analogical kind:
/// when true the self-example count is written into the prompt.
RenderedPrompt render_prompt(const PromptStrategy& strategy, const QuestionRecord& target,
                             std::span<const QuestionRecord> exemplars, bool state_count,
                             const PromptTemplates& templates = PromptTemplates::defaults());

}  // namespace stepeval
