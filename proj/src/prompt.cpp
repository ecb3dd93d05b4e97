#include <algorithm>
#include <map>
#include <numeric>

#include "stepeval/error.hpp"
#include "stepeval/io.hpp"
#include "stepeval/prompt.hpp"

namespace stepeval {
namespace {

using Values = std::map<std::string, std::string, std::less<>>;

// Single pass: text inserted for one placeholder is never scanned again.
std::string fill(std::string_view tmpl, const Values& values) {
  std::string out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const std::size_t close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        if (auto it = values.find(tmpl.substr(i + 1, close - i - 1)); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string bullet_steps(const QuestionRecord& record) {
  std::string out;
  for (const auto& step : record.steps) {
    if (!out.empty()) out += '\n';
    out += "- ";
    out += step;
  }
  return out;
}

Values record_values(const QuestionRecord& record) {
  return {{"question", record.question}, {"steps", bullet_steps(record)}, {"final_answer", record.final_answer}};
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t count = 0;
  for (std::size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++count;
  }
  return count;
}

RenderedPrompt finish(std::string text, const PromptStrategy& strategy, const QuestionRecord& target,
                      std::span<const QuestionRecord> exemplars) {
  RenderedPrompt prompt{std::move(text), strategy, {}, target.id};
  for (const auto& e : exemplars) {
    if (e.id == target.id) throw ValidationError("target '" + target.id + "' cannot be its own exemplar");
    prompt.exemplar_ids.push_back(e.id);
  }
  if (count_occurrences(prompt.text, target.question) != 1) {
    throw ValidationError("rendered prompt for '" + target.id + "' must contain the target question exactly once");
  }
  return prompt;
}

std::string numbered_blocks(std::span<const QuestionRecord> exemplars, const std::string& tmpl,
                            std::string_view separator) {
  std::string out;
  for (std::size_t i = 0; i < exemplars.size(); ++i) {
    if (i > 0) out += separator;
    Values values = record_values(exemplars[i]);
    values.emplace("index", std::to_string(i + 1));
    out += fill(tmpl, values);
  }
  return out;
}

}  // namespace

std::string_view to_string(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::baseline_zero_shot: return "baseline_zero_shot";
    case StrategyKind::kshot_cot: return "kshot_cot";
    case StrategyKind::analogical: return "analogical";
    case StrategyKind::analogical_cot: return "analogical_cot";
  }
  return "unknown";
}

StrategyKind parse_strategy_kind(std::string_view text) {
  if (text == "baseline" || text == "baseline_zero_shot") return StrategyKind::baseline_zero_shot;
  if (text == "kshot" || text == "kshot_cot") return StrategyKind::kshot_cot;
  if (text == "analogical") return StrategyKind::analogical;
  if (text == "analogical-cot" || text == "analogical_cot") return StrategyKind::analogical_cot;
  throw ValidationError("unknown strategy '" + std::string(text) +
                        "' (expected baseline, kshot, analogical or analogical-cot)");
}

void PromptStrategy::validate() const {
  const std::string name(to_string(kind));
  switch (kind) {
    case StrategyKind::baseline_zero_shot:
      if (k != 0 || self_examples != 0) throw ValidationError(name + " takes no exemplars (k = 0, self_examples = 0)");
      break;
    case StrategyKind::kshot_cot:
      if (k < 1) throw ValidationError(name + " requires k >= 1");
      if (self_examples != 0) throw ValidationError(name + " requires self_examples = 0");
      break;
    case StrategyKind::analogical:
      if (k != 0) throw ValidationError(name + " requires k = 0");
      if (self_examples < 1) throw ValidationError(name + " requires self_examples >= 1");
      break;
    case StrategyKind::analogical_cot:
      if (k < 1) throw ValidationError(name + " requires k >= 1");
      if (self_examples < 1) throw ValidationError(name + " requires self_examples >= 1");
      break;
  }
}

ExemplarIndex::ExemplarIndex(std::vector<QuestionRecord> pool) : pool_(std::move(pool)) {
  if (pool_.empty()) return;
  std::vector<TokenSequence> questions;
  questions.reserve(pool_.size());
  for (const auto& r : pool_) questions.push_back(tokenize(r.question));
  idf_ = fit_idf(questions);
  vectors_.reserve(pool_.size());
  for (const auto& q : questions) vectors_.push_back(vectorize(idf_, q));
}

std::vector<QuestionRecord> ExemplarIndex::select(const QuestionRecord& target, int k, std::uint64_t seed,
                                                  const Options& options) const {
  if (k < 0) throw ValidationError("exemplar count must be non-negative");
  if (k == 0) return {};

  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < pool_.size(); ++i) {
    if (pool_[i].id == target.id) continue;
    if (options.exclude_same_question && pool_[i].question == target.question) continue;
    candidates.push_back(i);
  }
  if (static_cast<std::size_t>(k) > candidates.size()) {
    throw ValidationError("requested " + std::to_string(k) + " exemplars but only " +
                          std::to_string(candidates.size()) + " are available for '" + target.id + "'");
  }
  if (options.max_candidates > 0 && candidates.size() > options.max_candidates) {
    stable_shuffle(candidates, mix_seed(seed, target.id));
    candidates.resize(std::max(options.max_candidates, static_cast<std::size_t>(k)));
  }

  const TfIdfVector query = vectorize(idf_, tokenize(target.question));
  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(candidates.size());
  for (std::size_t i : candidates) scored.emplace_back(cosine_similarity(query, vectors_[i]), i);
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return id_less(pool_[a.second].id, pool_[b.second].id);
  });

  std::vector<QuestionRecord> selected;
  selected.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) selected.push_back(pool_[scored[static_cast<std::size_t>(i)].second]);
  return selected;
}

std::vector<QuestionRecord> select_exemplars(const QuestionRecord& target, std::span<const QuestionRecord> pool,
                                             int k, std::uint64_t seed) {
  std::vector<QuestionRecord> filtered;
  std::copy_if(pool.begin(), pool.end(), std::back_inserter(filtered),
               [&](const QuestionRecord& r) { return r.id != target.id; });
  return ExemplarIndex(std::move(filtered)).select(target, k, seed);
}

RenderedPrompt render_baseline(const QuestionRecord& target, const PromptTemplates& templates) {
  return finish(fill(templates.baseline, record_values(target)), PromptStrategy::baseline(), target, {});
}

RenderedPrompt render_kshot_cot(const QuestionRecord& target, std::span<const QuestionRecord> exemplars,
                                const PromptTemplates& templates) {
  if (exemplars.empty()) throw ValidationError("k-shot CoT prompt needs at least one exemplar");
  std::string text = numbered_blocks(exemplars, templates.kshot_exemplar, "\n\n");
  text += "\n\n";
  text += fill(templates.kshot_target, record_values(target));
  return finish(std::move(text), PromptStrategy::kshot(static_cast<int>(exemplars.size())), target, exemplars);
}

RenderedPrompt render_analogical(const QuestionRecord& target, std::optional<int> self_examples,
                                 const PromptTemplates& templates) {
  if (self_examples && *self_examples < 1) throw ValidationError("self_examples must be >= 1");
  Values values = record_values(target);
  std::string text;
  if (self_examples) {
    values.emplace("count", std::to_string(*self_examples));
    text = fill(templates.analogical_counted, values);
  } else {
    text = fill(templates.analogical, values);
  }
  return finish(std::move(text), PromptStrategy::analogical(self_examples.value_or(kDefaultSelfExamples)), target,
                {});
}

RenderedPrompt render_analogical_cot(const QuestionRecord& target, std::span<const QuestionRecord> exemplars,
                                     int self_examples, const PromptTemplates& templates) {
  if (exemplars.empty()) throw ValidationError("analogical CoT prompt needs at least one exemplar");
  if (self_examples < 1) throw ValidationError("self_examples must be >= 1");
  Values values = record_values(target);
  values.emplace("count", std::to_string(self_examples));
  std::string text = numbered_blocks(exemplars, templates.analogical_cot_exemplar, "\n");
  text += '\n';
  text += fill(templates.analogical_cot_target, values);
  return finish(std::move(text),
                PromptStrategy::analogical_cot(static_cast<int>(exemplars.size()), self_examples), target,
                exemplars);
}

RenderedPrompt render_prompt(const PromptStrategy& strategy, const QuestionRecord& target,
                             std::span<const QuestionRecord> exemplars, bool state_count,
                             const PromptTemplates& templates) {
  strategy.validate();
  if (static_cast<std::size_t>(strategy.k) != exemplars.size()) {
    throw ValidationError("strategy expects " + std::to_string(strategy.k) + " exemplars, got " +
                          std::to_string(exemplars.size()));
  }
  switch (strategy.kind) {
    case StrategyKind::baseline_zero_shot:
      return render_baseline(target, templates);
    case StrategyKind::kshot_cot:
      return render_kshot_cot(target, exemplars, templates);
    case StrategyKind::analogical: {
      RenderedPrompt prompt = render_analogical(
          target, state_count ? std::optional<int>(strategy.self_examples) : std::nullopt, templates);
      prompt.strategy = strategy;
      return prompt;
    }
    case StrategyKind::analogical_cot:
      return render_analogical_cot(target, exemplars, strategy.self_examples, templates);
  }
  throw ValidationError("unknown strategy");
}

}  // namespace stepeval
