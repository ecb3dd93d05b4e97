#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "stepeval/error.hpp"
#include "stepeval/harness.hpp"
#include "stepeval/io.hpp"

namespace stepeval::cli {
namespace {

using nlohmann::json;

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kRuntime = 2;

const std::vector<int> kDefaultSweep = {1, 3, 6, 8};

struct RunFlags {
  std::string config;
  std::string dataset;
  std::string strategy;
  int k = 0;
  std::vector<int> k_list;
  int self_examples = 0;
  double threshold = 0.0;
  int max_attempts = 0;
  std::string backend;
  std::string endpoint;
  std::string script;
  std::string embedder;
  std::string model;
  int parallelism = 0;
  std::uint64_t seed = 0;
  std::string out;
  std::string labels;

  CLI::Option* k_opt = nullptr;
  CLI::Option* self_opt = nullptr;
  CLI::Option* threshold_opt = nullptr;
  CLI::Option* attempts_opt = nullptr;
  CLI::Option* parallelism_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
};

void add_run_flags(CLI::App* cmd, RunFlags& f, bool sweep) {
  cmd->add_option("--config", f.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  cmd->add_option("--dataset", f.dataset, "Dataset file (JSONL), overrides the config");
  cmd->add_option("--strategy", f.strategy, "Prompt strategy")
      ->check(CLI::IsMember({"baseline", "kshot", "analogical", "analogical-cot"}));
  if (sweep) {
    f.k_opt = cmd->add_option("--k", f.k_list, "Comma separated K values to sweep")->delimiter(',');
  } else {
    f.k_opt = cmd->add_option("--k", f.k, "Number of exemplars");
  }
  f.self_opt = cmd->add_option("--self-examples", f.self_examples, "Self-generated exemplars requested by analogical prompts");
  f.threshold_opt = cmd->add_option("--threshold", f.threshold, "Regeneration gate threshold in [0,1]");
  f.attempts_opt = cmd->add_option("--max-attempts", f.max_attempts, "Generation attempts per question");
  cmd->add_option("--backend", f.backend, "Generator backend")->check(CLI::IsMember({"http", "stub-echo", "stub-script"}));
  cmd->add_option("--endpoint", f.endpoint, "Chat completion URL for the http backend");
  cmd->add_option("--script", f.script, "Reply script for the stub-script backend");
  cmd->add_option("--embedder", f.embedder, "Embedding scorer")->check(CLI::IsMember({"none", "hash", "http"}));
  cmd->add_option("--model", f.model, "Model name sent to the backend");
  f.parallelism_opt = cmd->add_option("--parallelism", f.parallelism, "Questions evaluated concurrently");
  f.seed_opt = cmd->add_option("--seed", f.seed, "Split and run seed");
  cmd->add_option("--out", f.out, "Output directory");
  if (!sweep) cmd->add_option("--labels", f.labels, "Human labels CSV (id,true|false)")->check(CLI::ExistingFile);
}

ExperimentConfig build_config(const RunFlags& f, bool sweep) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_config(f.config);
  if (!f.dataset.empty()) c.dataset_path = f.dataset;

  const bool has_self = f.self_opt->count() > 0;
  if (!f.strategy.empty()) {
    const StrategyKind kind = parse_strategy_kind(f.strategy);
    if (kind != c.strategy.kind) {
      switch (kind) {
        case StrategyKind::baseline_zero_shot: c.strategy = PromptStrategy::baseline(); break;
        case StrategyKind::kshot_cot: c.strategy = PromptStrategy::kshot(3); break;
        case StrategyKind::analogical: c.strategy = PromptStrategy::analogical(); break;
        case StrategyKind::analogical_cot: c.strategy = PromptStrategy::analogical_cot(); break;
      }
      c.state_self_example_count = false;
    }
  } else if (sweep && !c.strategy.uses_exemplars()) {
    c.strategy = PromptStrategy::kshot(3);
  }
  if (has_self) {
    c.strategy.self_examples = f.self_examples;
    if (c.strategy.kind == StrategyKind::analogical) c.state_self_example_count = true;
  }
  if (sweep) {
    if (f.k_opt->count() > 0) c.k_values = f.k_list;
    if (c.k_values.empty()) c.k_values = kDefaultSweep;
  } else if (f.k_opt->count() > 0) {
    c.strategy.k = f.k;
  }

  if (f.threshold_opt->count() > 0) c.gate_threshold = f.threshold;
  if (f.attempts_opt->count() > 0) c.max_attempts = f.max_attempts;
  if (!f.backend.empty()) c.backend.kind = f.backend;
  if (!f.endpoint.empty()) c.backend.endpoint = f.endpoint;
  if (!f.script.empty()) c.backend.script_path = f.script;
  if (!f.embedder.empty()) c.embedder.kind = f.embedder;
  if (!f.model.empty()) c.params.model_name = f.model;
  if (f.parallelism_opt->count() > 0) c.parallelism = f.parallelism;
  if (f.seed_opt->count() > 0) {
    c.split_seed = f.seed;
    c.run_seed = f.seed;
  }
  if (!f.out.empty()) c.output_dir = f.out;
  if (c.output_dir.empty()) c.output_dir = "stepeval-results";
  c.validate();
  return c;
}

std::string fixed(double v, int digits = 4) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

std::string summary_line(const ExperimentReport& r) {
  std::ostringstream s;
  s << r.strategy_label << " model=" << r.model_name << " questions=" << r.per_question.size()
    << " scored=" << r.scored_count << " discard_rate=" << fixed(r.discard_rate);
  for (const char* name : {"rouge1_f1", "rouge2_f1", "rougeL_f1", "meteor", "tfidf_cosine", "embed_f1"}) {
    auto it = r.aggregates.find(name);
    if (it != r.aggregates.end()) s << ' ' << name << '=' << fixed(it->second.mean);
  }
  s << " accuracy=" << (r.accuracy ? fixed(*r.accuracy) : "n/a");
  return s.str();
}

ExperimentReport apply_labels(ExperimentReport report, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open labels '" + path + "'");
  return import_human_labels(std::move(report), in);
}

void write_report(const ExperimentReport& report, const std::filesystem::path& dir) {
  emit_report(report, ReportFormat::structured, dir);
  emit_report(report, ReportFormat::tabular, dir);
}

int cmd_stats(const std::string& dataset, const std::string& csv, std::ostream& out) {
  std::set<std::string> unknown;
  const auto records = load_dataset(dataset, &unknown);
  const DatasetStats s = compute_stats(records);
  out << "records            " << s.record_count << '\n'
      << "mean steps         " << fixed(s.mean_steps_per_question, 3) << '\n'
      << "mean step length   " << fixed(s.mean_step_length_chars, 2) << " chars\n";
  auto histogram = [&](const char* title, const std::map<std::size_t, std::size_t>& h, std::size_t width) {
    out << title << '\n';
    for (const auto& [bucket, count] : h) {
      std::string label = std::to_string(bucket);
      if (width > 1) label += "-" + std::to_string(bucket + width - 1);
      out << "  " << std::setw(9) << std::left << label << std::right << std::setw(6) << count << '\n';
    }
  };
  histogram("steps per question", s.step_count_histogram, 1);
  histogram("step length (chars)", s.step_length_histogram, kStepLengthBucketWidth);
  if (!unknown.empty()) {
    out << "unrecognised latex commands:";
    for (const auto& name : unknown) out << ' ' << name;
    out << '\n';
  }
  if (!csv.empty()) {
    std::ostringstream dump;
    dump << "histogram,bucket,count\n";
    for (const auto& [bucket, count] : s.step_count_histogram) dump << "steps," << bucket << ',' << count << '\n';
    for (const auto& [bucket, count] : s.step_length_histogram) dump << "step_length," << bucket << ',' << count << '\n';
    write_file_atomic(csv, dump.str());
  }
  return kOk;
}

int cmd_split(const std::string& dataset, std::uint64_t seed, const std::vector<double>& ratios,
              const std::string& out_dir, std::ostream& out) {
  if (ratios.size() != 3) throw ValidationError("--ratios needs three values (train,validation,test)");
  const auto records = load_dataset(dataset);
  const DatasetSplit parts = split(records, {ratios[0], ratios[1], ratios[2]}, seed);
  const std::filesystem::path dir(out_dir);
  const std::pair<const char*, const std::vector<QuestionRecord>*> files[] = {
      {"train.jsonl", &parts.train}, {"validation.jsonl", &parts.validation}, {"test.jsonl", &parts.test}};
  for (const auto& [name, records_ptr] : files) {
    std::ostringstream buffer;
    write_dataset(buffer, *records_ptr);
    write_file_atomic(dir / name, buffer.str());
  }
  out << "train " << parts.train.size() << " validation " << parts.validation.size() << " test " << parts.test.size()
      << '\n';
  return kOk;
}

int cmd_dedupe(const std::string& dataset, double threshold, const std::string& out_path, std::ostream& out) {
  const auto records = load_dataset(dataset);
  const auto kept = deduplicate(records, threshold);
  std::ostringstream buffer;
  write_dataset(buffer, kept);
  write_file_atomic(out_path, buffer.str());
  out << "kept " << kept.size() << " of " << records.size() << " (removed " << records.size() - kept.size() << ")\n";
  return kOk;
}

int cmd_run(const RunFlags& f, std::ostream& out) {
  const ExperimentConfig config = build_config(f, false);
  auto generator = make_generator(config.backend);
  auto embedder = make_embedder(config.embedder);
  ExperimentReport report = evaluate(config, *generator, embedder.get());
  if (!f.labels.empty()) report = apply_labels(std::move(report), f.labels);
  write_report(report, config.output_dir);
  out << summary_line(report) << '\n';
  return kOk;
}

int cmd_sweep(const RunFlags& f, std::ostream& out) {
  const ExperimentConfig config = build_config(f, true);
  auto generator = make_generator(config.backend);
  auto embedder = make_embedder(config.embedder);
  const auto sweep = run_ksweep(config, *generator, embedder.get());
  for (const auto& entry : sweep) out << "k=" << entry.k << ' ' << summary_line(entry.report) << '\n';
  return kOk;
}

struct TextRecord {
  std::string id;
  std::string text;
};

// Accepts {"id","text"} lines or dataset records, which score against their reference text.
std::vector<TextRecord> load_texts(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::vector<TextRecord> items;
  std::set<std::string> seen;
  std::string line;
  for (std::size_t number = 1; std::getline(in, line); ++number) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(path + ":" + std::to_string(number) + ": malformed JSON: " + e.what());
    }
    TextRecord item;
    if (!obj.is_object() || !obj.contains("id") || !obj["id"].is_string()) {
      throw ValidationError(path + ":" + std::to_string(number) + ": record needs a string 'id'");
    }
    item.id = obj["id"].get<std::string>();
    if (obj.contains("text")) {
      if (!obj["text"].is_string()) throw ValidationError(path + ":" + std::to_string(number) + ": 'text' must be a string");
      item.text = normalize_text(obj["text"].get<std::string>());
    } else if (obj.contains("steps")) {
      std::istringstream one(line);
      try {
        item.text = reference_text(parse_dataset(one).at(0));
      } catch (const ParseError& e) {
        throw ValidationError(path + ":" + std::to_string(number) + ": " + e.cause());
      }
    } else {
      throw ValidationError(path + ":" + std::to_string(number) + ": record needs 'text' or dataset fields");
    }
    if (!seen.insert(item.id).second) throw ValidationError(path + ": duplicate id '" + item.id + "'");
    items.push_back(std::move(item));
  }
  return items;
}

int cmd_score(const std::string& candidates_path, const std::string& references_path, const std::string& out_dir,
              const std::string& embedder_kind, std::ostream& out) {
  const auto candidates = load_texts(candidates_path);
  const auto references = load_texts(references_path);
  std::map<std::string, std::string> by_id;
  for (const auto& r : references) by_id.emplace(r.id, r.text);

  std::set<std::string> candidate_ids;
  std::vector<std::string> unmatched;
  for (const auto& c : candidates) {
    candidate_ids.insert(c.id);
    if (!by_id.contains(c.id)) unmatched.push_back(c.id);
  }
  for (const auto& r : references) {
    if (!candidate_ids.contains(r.id)) unmatched.push_back(r.id);
  }
  if (!unmatched.empty()) {
    std::string list;
    for (const auto& id : unmatched) list += (list.empty() ? "" : ", ") + id;
    throw ValidationError("ids present in only one file: " + list);
  }

  std::vector<TokenSequence> corpus;
  for (const auto& r : references) corpus.push_back(tokenize(r.text));
  const IdfModel idf = fit_idf(corpus);
  EmbedderConfig embed_config;
  embed_config.kind = embedder_kind;
  const auto embedder = make_embedder(embed_config);

  ExperimentReport report;
  report.strategy_label = "offline";
  report.model_name = "external";
  report.config = {{"candidates", candidates_path}, {"references", references_path}, {"embedder", embedder_kind}};
  for (const auto& c : candidates) {
    QuestionOutcome q;
    q.question_id = c.id;
    q.prompt.target_id = c.id;
    q.final_text = c.text;
    q.metrics = score_pair(c.text, by_id.at(c.id), idf, embedder.get());
    report.per_question.push_back(std::move(q));
  }
  std::sort(report.per_question.begin(), report.per_question.end(),
            [](const QuestionOutcome& a, const QuestionOutcome& b) { return id_less(a.question_id, b.question_id); });
  aggregate(report);
  write_report(report, out_dir);
  out << summary_line(report) << '\n';
  return kOk;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& labels, const std::string& out_dir,
               std::ostream& out) {
  if (inputs.size() > 1 && !labels.empty()) throw ValidationError("--labels applies to a single --in report");
  std::vector<ExperimentReport> reports;
  for (const auto& path : inputs) reports.push_back(load_report(path));
  if (!labels.empty()) reports.front() = apply_labels(std::move(reports.front()), labels);

  std::filesystem::path dir = out_dir;
  if (dir.empty()) dir = std::filesystem::path(inputs.front()).parent_path();
  if (reports.size() == 1) {
    write_report(reports.front(), dir);
  } else {
    write_file_atomic(dir / "summary.csv", summary_csv(reports));
  }
  for (const auto& r : reports) out << summary_line(r) << '\n';
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Batch evaluation of step-annotated STEM question answering", "stepeval"};
  app.require_subcommand(1);

  std::string dataset;
  std::string csv;
  auto* stats = app.add_subcommand("stats", "Print dataset statistics");
  stats->add_option("--dataset", dataset, "Dataset file (JSONL)")->required();
  stats->add_option("--csv", csv, "Also write histograms as CSV");

  std::uint64_t split_seed = 42;
  std::vector<double> ratios = {0.6, 0.2, 0.2};
  std::string out_path;
  auto* split_cmd = app.add_subcommand("split", "Write train/validation/test files");
  split_cmd->add_option("--dataset", dataset, "Dataset file (JSONL)")->required();
  split_cmd->add_option("--seed", split_seed, "Shuffle seed")->capture_default_str();
  split_cmd->add_option("--ratios", ratios, "train,validation,test")->delimiter(',')->expected(3)->capture_default_str();
  split_cmd->add_option("--out", out_path, "Output directory")->required();

  double dedupe_threshold = 0.9;
  auto* dedupe = app.add_subcommand("dedupe", "Drop near-duplicate questions");
  dedupe->add_option("--dataset", dataset, "Dataset file (JSONL)")->required();
  dedupe->add_option("--threshold", dedupe_threshold, "TF-IDF cosine at or above which a question is a duplicate")
      ->capture_default_str();
  dedupe->add_option("--out", out_path, "Output dataset file")->required();

  RunFlags run_flags;
  auto* run_cmd = app.add_subcommand("run", "Evaluate the test split with one strategy");
  add_run_flags(run_cmd, run_flags, false);
  RunFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Evaluate one run per K value");
  add_run_flags(sweep_cmd, sweep_flags, true);

  std::string candidates;
  std::string references;
  std::string embedder = "none";
  auto* score = app.add_subcommand("score", "Score candidate texts against references offline");
  score->add_option("--candidates", candidates, "JSONL of {id, text}")->required();
  score->add_option("--references", references, "JSONL of {id, text} or dataset records")->required();
  score->add_option("--out", out_path, "Output directory")->required();
  score->add_option("--embedder", embedder, "Embedding scorer")->check(CLI::IsMember({"none", "hash"}))->capture_default_str();

  std::vector<std::string> inputs;
  std::string labels;
  auto* report = app.add_subcommand("report", "Attach human labels and re-render reports");
  report->add_option("--in", inputs, "report.json (repeat to combine summaries)")->required();
  report->add_option("--labels", labels, "Human labels CSV (id,true|false)");
  report->add_option("--out", out_path, "Output directory (default: beside the first report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kValidation;
  }

  try {
    if (*stats) return cmd_stats(dataset, csv, out);
    if (*split_cmd) return cmd_split(dataset, split_seed, ratios, out_path, out);
    if (*dedupe) return cmd_dedupe(dataset, dedupe_threshold, out_path, out);
    if (*run_cmd) return cmd_run(run_flags, out);
    if (*sweep_cmd) return cmd_sweep(sweep_flags, out);
    if (*score) return cmd_score(candidates, references, out_path, embedder, out);
    if (*report) return cmd_report(inputs, labels, out_path, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}

}  // namespace stepeval::cli
