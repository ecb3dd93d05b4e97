#include "stepeval/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "stepeval/error.hpp"
#include "stepeval/io.hpp"

namespace stepeval {
namespace {

std::string strategy_label(const PromptStrategy& s) {
  std::string label(to_string(s.kind));
  if (s.uses_exemplars()) label += " k=" + std::to_string(s.k);
  if (s.self_examples > 0) label += " self=" + std::to_string(s.self_examples);
  return label;
}

std::vector<std::pair<std::string, double>> metric_values(const MetricReport& m) {
  std::vector<std::pair<std::string, double>> values = {
      {"rouge1_precision", m.rouge1.precision}, {"rouge1_recall", m.rouge1.recall}, {"rouge1_f1", m.rouge1.f1},
      {"rouge2_precision", m.rouge2.precision}, {"rouge2_recall", m.rouge2.recall}, {"rouge2_f1", m.rouge2.f1},
      {"rougeL_precision", m.rougeL.precision}, {"rougeL_recall", m.rougeL.recall}, {"rougeL_f1", m.rougeL.f1},
      {"meteor", m.meteor},                     {"tfidf_cosine", m.tfidf_cosine},
  };
  if (m.embed_f1) values.emplace_back("embed_f1", *m.embed_f1);
  return values;
}

MetricReport score_outcome(const std::string& text, const std::string& reference, const IdfModel& idf,
                           const Embedder* embedder, std::optional<std::string>& error) {
  if (embedder != nullptr) {
    try {
      return score_pair(text, reference, idf, embedder);
    } catch (const std::exception& e) {
      error = std::string("embedder: ") + e.what();
    }
  }
  return score_pair(text, reference, idf, nullptr);
}

}  // namespace

QuestionOutcome run_question(const QuestionRecord& question, const PromptStrategy& strategy,
                             const ExemplarIndex& pool, const RunContext& context) {
  const ExperimentConfig& config = context.config;
  QuestionOutcome outcome;
  outcome.question_id = question.id;

  try {
    ExemplarIndex::Options options;
    options.exclude_same_question = true;
    const auto exemplars = pool.select(question, strategy.k, mix_seed(config.run_seed, question.id), options);
    outcome.prompt = render_prompt(strategy, question, exemplars, config.state_self_example_count, context.templates);
  } catch (const ValidationError& e) {
    outcome.discarded = true;
    outcome.error = e.what();
    return outcome;
  }

  const std::string reference = reference_text(question);
  auto gate_similarity = [&](const std::string& text) {
    if (context.gate_idf != nullptr) return text_cosine(text, reference, *context.gate_idf);
    return text_cosine(text, reference);
  };

  GenerationParams params = config.params;
  for (int attempt = 0; attempt < config.max_attempts; ++attempt) {
    params.seed = static_cast<std::int64_t>(mix_seed(config.run_seed, question.id, static_cast<std::uint64_t>(attempt) + 1) >> 1);
    GenerationResult result;
    try {
      result = context.generator.generate(outcome.prompt.text, params);
    } catch (const BackendError& e) {
      outcome.attempts.push_back({"", 0.0, 0, std::string(e.what()) + " (attempt " + std::to_string(attempt + 1) + ")"});
      if (!e.retryable()) break;
      continue;
    } catch (const std::exception& e) {
      outcome.attempts.push_back({"", 0.0, 0, std::string(e.what()) + " (attempt " + std::to_string(attempt + 1) + ")"});
      break;
    }
    const double similarity = gate_similarity(result.text);
    outcome.attempts.push_back({result.text, similarity, result.latency_ms, std::nullopt});
    if (similarity >= config.gate_threshold) {
      outcome.final_text = result.text;
      break;
    }
  }

  if (!outcome.final_text) {
    outcome.discarded = true;
    return outcome;
  }
  if (context.gate_idf != nullptr) {
    outcome.metrics = score_outcome(*outcome.final_text, reference, *context.gate_idf, context.embedder, outcome.error);
  } else {
    const std::vector<TokenSequence> docs{tokenize(*outcome.final_text), tokenize(reference)};
    outcome.metrics = score_outcome(*outcome.final_text, reference, fit_idf(docs), context.embedder, outcome.error);
  }
  return outcome;
}

void aggregate(ExperimentReport& report) {
  std::map<std::string, std::vector<double>> samples;
  std::size_t discarded = 0;
  std::size_t labeled = 0;
  std::size_t labeled_true = 0;
  for (const auto& q : report.per_question) {
    if (q.discarded) ++discarded;
    if (q.human_label) {
      ++labeled;
      if (*q.human_label) ++labeled_true;
    }
    if (q.discarded || !q.metrics) continue;
    for (const auto& [name, value] : metric_values(*q.metrics)) samples[name].push_back(value);
  }

  report.aggregates.clear();
  for (const auto& [name, values] : samples) {
    MetricSummary summary;
    summary.count = values.size();
    double sum = 0.0;
    for (double v : values) sum += v;
    summary.mean = sum / static_cast<double>(values.size());
    double sq = 0.0;
    for (double v : values) sq += (v - summary.mean) * (v - summary.mean);
    summary.stddev = std::sqrt(sq / static_cast<double>(values.size()));
    report.aggregates.emplace(name, summary);
  }
  const std::size_t total = report.per_question.size();
  report.scored_count = total - discarded;
  report.discard_rate = total == 0 ? 0.0 : static_cast<double>(discarded) / static_cast<double>(total);
  report.labeled_count = labeled;
  report.accuracy = labeled == 0 ? std::nullopt
                                 : std::optional<double>(static_cast<double>(labeled_true) / static_cast<double>(labeled));
}

ExperimentReport evaluate(const ExperimentConfig& config, Generator& generator, const Embedder* embedder) {
  config.validate();
  std::vector<QuestionRecord> records = load_dataset(config.dataset_path);
  if (config.dedupe_threshold) records = deduplicate(records, *config.dedupe_threshold);
  const DatasetSplit parts = split(records, config.split_ratios, config.split_seed);
  if (static_cast<std::size_t>(config.strategy.k) > parts.train.size()) {
    throw ValidationError("k = " + std::to_string(config.strategy.k) + " exceeds the " +
                          std::to_string(parts.train.size()) + " training records available as exemplars");
  }
  const PromptTemplates templates = config.template_path ? PromptTemplates::load(*config.template_path)
                                                         : PromptTemplates::defaults();

  std::optional<IdfModel> gate_idf;
  if (config.gate_corpus == GateCorpus::split_references && !parts.test.empty()) {
    std::vector<TokenSequence> corpus;
    for (const auto& q : parts.test) corpus.push_back(tokenize(reference_text(q)));
    gate_idf = fit_idf(corpus);
  }

  const ExemplarIndex pool(parts.train);
  const RunContext context{config, generator, gate_idf ? &*gate_idf : nullptr, templates, embedder};

  std::vector<QuestionOutcome> outcomes(parts.test.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < parts.test.size(); i = next++) {
      try {
        outcomes[i] = run_question(parts.test[i], config.strategy, pool, context);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), parts.test.size());
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < workers; ++t) threads.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  std::sort(outcomes.begin(), outcomes.end(),
            [](const QuestionOutcome& a, const QuestionOutcome& b) { return id_less(a.question_id, b.question_id); });

  ExperimentReport report;
  report.config = config.echo();
  report.strategy_label = strategy_label(config.strategy);
  report.model_name = config.params.model_name;
  report.per_question = std::move(outcomes);
  aggregate(report);
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& config, Generator& generator, const Embedder* embedder) {
  ExperimentReport report = evaluate(config, generator, embedder);
  if (!config.output_dir.empty()) {
    emit_report(report, ReportFormat::structured, config.output_dir);
    emit_report(report, ReportFormat::tabular, config.output_dir);
  }
  return report;
}

std::vector<SweepEntry> run_ksweep(const ExperimentConfig& config, Generator& generator, const Embedder* embedder) {
  config.validate();
  if (config.k_values.empty()) throw ValidationError("config: k sweep needs at least one k value");

  std::vector<SweepEntry> sweep;
  for (int k : config.k_values) {
    ExperimentConfig one = config;
    one.strategy.k = k;
    one.k_values.clear();
    one.output_dir = config.output_dir.empty() ? std::filesystem::path() : config.output_dir / ("k" + std::to_string(k));
    sweep.push_back({k, run_experiment(one, generator, embedder)});
  }
  if (!config.output_dir.empty()) write_sweep_table(sweep, config.output_dir);
  return sweep;
}

std::unique_ptr<Generator> make_generator(const BackendConfig& config) {
  if (config.kind == "stub-echo") return StubBackend::echo();
  if (config.kind == "stub-script") {
    return std::make_unique<StubBackend>(load_stub_script(config.script_path), StubBackend::Mode::scripted);
  }
  if (config.kind == "http") {
    if (config.api_key_env.empty()) throw ValidationError("backend.api_key_env names no environment variable");
    const char* key = std::getenv(config.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw ValidationError("environment variable " + config.api_key_env + " (API key) is not set");
    }
    try {
      return std::make_unique<HttpChatBackend>(config.endpoint, key, config.timeout_ms, config.max_connections);
    } catch (const BackendError& e) {
      throw ValidationError(e.what());
    }
  }
  throw ValidationError("unknown backend '" + config.kind + "'");
}

std::unique_ptr<Embedder> make_embedder(const EmbedderConfig& config) {
  if (config.kind == "none") return nullptr;
  if (config.kind == "hash") return std::make_unique<HashEmbedder>(config.dimension);
  if (config.kind == "http") {
    try {
      return std::make_unique<HttpEmbedder>(config.endpoint, config.timeout_ms);
    } catch (const EmbedderError& e) {
      throw ValidationError(e.what());
    }
  }
  throw ValidationError("unknown embedder '" + config.kind + "'");
}

}  // namespace stepeval
