#include <algorithm>
#include <cctype>
#include <istream>
#include <set>
#include <sstream>

#include "stepeval/error.hpp"
#include "stepeval/harness.hpp"
#include "stepeval/io.hpp"

namespace stepeval {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kMetricColumns[] = {
    "rouge1_precision", "rouge1_recall", "rouge1_f1", "rouge2_precision", "rouge2_recall", "rouge2_f1",
    "rougeL_precision", "rougeL_recall", "rougeL_f1", "meteor", "tfidf_cosine", "embed_f1"};

ordered_json prf_json(const PrfScore& s) {
  ordered_json j;
  j["precision"] = s.precision;
  j["recall"] = s.recall;
  j["f1"] = s.f1;
  return j;
}

PrfScore prf_from(const json& j) {
  return {j.at("precision").get<double>(), j.at("recall").get<double>(), j.at("f1").get<double>()};
}

ordered_json metrics_json(const MetricReport& m) {
  ordered_json j;
  j["rouge1"] = prf_json(m.rouge1);
  j["rouge2"] = prf_json(m.rouge2);
  j["rougeL"] = prf_json(m.rougeL);
  j["meteor"] = m.meteor;
  j["tfidf_cosine"] = m.tfidf_cosine;
  j["embed_f1"] = m.embed_f1 ? json(*m.embed_f1) : json(nullptr);
  return j;
}

MetricReport metrics_from(const json& j) {
  MetricReport m;
  m.rouge1 = prf_from(j.at("rouge1"));
  m.rouge2 = prf_from(j.at("rouge2"));
  m.rougeL = prf_from(j.at("rougeL"));
  m.meteor = j.at("meteor").get<double>();
  m.tfidf_cosine = j.at("tfidf_cosine").get<double>();
  if (j.contains("embed_f1") && !j.at("embed_f1").is_null()) m.embed_f1 = j.at("embed_f1").get<double>();
  return m;
}

std::optional<double> metric_column(const MetricReport& m, std::string_view name) {
  if (name == "rouge1_precision") return m.rouge1.precision;
  if (name == "rouge1_recall") return m.rouge1.recall;
  if (name == "rouge1_f1") return m.rouge1.f1;
  if (name == "rouge2_precision") return m.rouge2.precision;
  if (name == "rouge2_recall") return m.rouge2.recall;
  if (name == "rouge2_f1") return m.rouge2.f1;
  if (name == "rougeL_precision") return m.rougeL.precision;
  if (name == "rougeL_recall") return m.rougeL.recall;
  if (name == "rougeL_f1") return m.rougeL.f1;
  if (name == "meteor") return m.meteor;
  if (name == "tfidf_cosine") return m.tfidf_cosine;
  return m.embed_f1;
}

template <class T>
json optional_json(const std::optional<T>& value) {
  return value ? json(*value) : json(nullptr);
}

template <class T>
std::optional<T> optional_from(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::string trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return std::string(s);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::optional<bool> parse_label(const std::string& text) {
  const std::string v = lower(text);
  if (v == "true" || v == "1" || v == "yes" || v == "correct") return true;
  if (v == "false" || v == "0" || v == "no" || v == "incorrect") return false;
  return std::nullopt;
}

std::string optional_cell(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

ordered_json report_to_json(const ExperimentReport& report) {
  ordered_json doc;
  doc["config"] = report.config;
  doc["strategy"] = report.strategy_label;
  doc["model"] = report.model_name;

  ordered_json summary;
  summary["questions"] = report.per_question.size();
  summary["scored"] = report.scored_count;
  summary["discard_rate"] = report.discard_rate;
  summary["labeled"] = report.labeled_count;
  summary["accuracy"] = optional_json(report.accuracy);
  ordered_json metrics = ordered_json::object();
  for (const auto& [name, s] : report.aggregates) {
    metrics[name] = {{"mean", s.mean}, {"stddev", s.stddev}, {"count", s.count}};
  }
  summary["metrics"] = std::move(metrics);
  doc["summary"] = std::move(summary);

  ordered_json questions = ordered_json::array();
  for (const auto& q : report.per_question) {
    ordered_json item;
    item["id"] = q.question_id;
    ordered_json prompt;
    prompt["text"] = q.prompt.text;
    prompt["strategy"] = std::string(to_string(q.prompt.strategy.kind));
    prompt["k"] = q.prompt.strategy.k;
    prompt["self_examples"] = q.prompt.strategy.self_examples;
    prompt["exemplar_ids"] = q.prompt.exemplar_ids;
    item["prompt"] = std::move(prompt);
    ordered_json attempts = ordered_json::array();
    for (const auto& a : q.attempts) {
      ordered_json aj;
      aj["text"] = a.text;
      aj["gate_similarity"] = a.gate_similarity;
      aj["latency_ms"] = a.latency_ms;
      aj["error"] = optional_json(a.error);
      attempts.push_back(std::move(aj));
    }
    item["attempts"] = std::move(attempts);
    item["final_text"] = optional_json(q.final_text);
    item["discarded"] = q.discarded;
    item["metrics"] = q.metrics ? metrics_json(*q.metrics) : ordered_json(nullptr);
    item["human_label"] = optional_json(q.human_label);
    item["error"] = optional_json(q.error);
    questions.push_back(std::move(item));
  }
  doc["questions"] = std::move(questions);
  return doc;
}

ExperimentReport report_from_json(const json& doc) {
  ExperimentReport report;
  try {
    report.config = ordered_json::parse(doc.at("config").dump());
    report.strategy_label = doc.at("strategy").get<std::string>();
    report.model_name = doc.at("model").get<std::string>();
    for (const auto& item : doc.at("questions")) {
      QuestionOutcome q;
      q.question_id = item.at("id").get<std::string>();
      const json& prompt = item.at("prompt");
      q.prompt.text = prompt.at("text").get<std::string>();
      q.prompt.strategy.kind = parse_strategy_kind(prompt.at("strategy").get<std::string>());
      q.prompt.strategy.k = prompt.at("k").get<int>();
      q.prompt.strategy.self_examples = prompt.at("self_examples").get<int>();
      q.prompt.exemplar_ids = prompt.at("exemplar_ids").get<std::vector<std::string>>();
      q.prompt.target_id = q.question_id;
      for (const auto& a : item.at("attempts")) {
        q.attempts.push_back({a.at("text").get<std::string>(), a.at("gate_similarity").get<double>(),
                              a.at("latency_ms").get<std::int64_t>(), optional_from<std::string>(a, "error")});
      }
      q.final_text = optional_from<std::string>(item, "final_text");
      q.discarded = item.at("discarded").get<bool>();
      if (item.contains("metrics") && !item.at("metrics").is_null()) q.metrics = metrics_from(item.at("metrics"));
      q.human_label = optional_from<bool>(item, "human_label");
      q.error = optional_from<std::string>(item, "error");
      report.per_question.push_back(std::move(q));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report: ") + e.what());
  }
  aggregate(report);
  return report;
}

ExperimentReport load_report(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ValidationError("report '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return report_from_json(doc);
}

ExperimentReport import_human_labels(ExperimentReport report, std::istream& labels) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < report.per_question.size(); ++i) index.emplace(report.per_question[i].question_id, i);

  std::set<std::string> seen;
  std::string line;
  bool first = true;
  for (std::size_t number = 1; std::getline(labels, line); ++number) {
    if (trim(line).empty()) continue;
    const auto comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw ValidationError("labels line " + std::to_string(number) + ": expected 'id,label'");
    }
    const std::string id = trim(std::string_view(line).substr(0, comma));
    const std::string value = trim(std::string_view(line).substr(comma + 1));
    const bool header = first && lower(id) == "id";
    first = false;
    if (header) continue;
    const auto label = parse_label(value);
    if (!label) {
      throw ValidationError("labels line " + std::to_string(number) + ": label '" + value + "' is not true or false");
    }
    auto it = index.find(id);
    if (it == index.end()) {
      throw ValidationError("labels line " + std::to_string(number) + ": unknown question id '" + id + "'");
    }
    if (!seen.insert(id).second) {
      throw ValidationError("labels line " + std::to_string(number) + ": duplicate label for '" + id + "'");
    }
    report.per_question[it->second].human_label = *label;
  }
  aggregate(report);
  return report;
}

std::string per_question_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "id,discarded,attempts,gate_similarity";
  for (auto column : kMetricColumns) out << ',' << column;
  out << ",human_label,error\n";
  for (const auto& q : report.per_question) {
    out << csv_field(q.question_id) << ',' << (q.discarded ? "true" : "false") << ',' << q.attempts.size() << ',';
    if (!q.attempts.empty() && !q.attempts.back().error) out << format_double(q.attempts.back().gate_similarity);
    for (auto column : kMetricColumns) {
      out << ',';
      if (q.metrics) out << optional_cell(metric_column(*q.metrics, column));
    }
    out << ',';
    if (q.human_label) out << (*q.human_label ? "true" : "false");
    out << ',' << csv_field(q.error.value_or(""));
    out << '\n';
  }
  return out.str();
}

std::string summary_csv(std::span<const ExperimentReport> reports) {
  std::ostringstream out;
  out << "strategy,model,questions,scored,discard_rate,labeled,accuracy";
  for (auto column : kMetricColumns) out << ',' << column << "_mean," << column << "_stddev";
  out << '\n';
  for (const auto& r : reports) {
    out << csv_field(r.strategy_label) << ',' << csv_field(r.model_name) << ',' << r.per_question.size() << ','
        << r.scored_count << ',' << format_double(r.discard_rate) << ',' << r.labeled_count << ','
        << optional_cell(r.accuracy);
    for (auto column : kMetricColumns) {
      auto it = r.aggregates.find(std::string(column));
      if (it == r.aggregates.end()) {
        out << ",,";
      } else {
        out << ',' << format_double(it->second.mean) << ',' << format_double(it->second.stddev);
      }
    }
    out << '\n';
  }
  return out.str();
}

std::string sweep_csv(std::span<const SweepEntry> sweep) {
  std::ostringstream out;
  out << "k,questions,scored,discard_rate,accuracy";
  for (auto column : kMetricColumns) out << ',' << column;
  out << '\n';
  for (const auto& entry : sweep) {
    const ExperimentReport& r = entry.report;
    out << entry.k << ',' << r.per_question.size() << ',' << r.scored_count << ',' << format_double(r.discard_rate)
        << ',' << optional_cell(r.accuracy);
    for (auto column : kMetricColumns) {
      auto it = r.aggregates.find(std::string(column));
      out << ',';
      if (it != r.aggregates.end()) out << format_double(it->second.mean);
    }
    out << '\n';
  }
  return out.str();
}

std::vector<std::filesystem::path> emit_report(const ExperimentReport& report, ReportFormat format,
                                               const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  if (format == ReportFormat::structured) {
    written.push_back(dir / "report.json");
    write_file_atomic(written.back(), report_to_json(report).dump(2) + "\n");
    return written;
  }
  written.push_back(dir / "report.csv");
  write_file_atomic(written.back(), per_question_csv(report));
  written.push_back(dir / "summary.csv");
  write_file_atomic(written.back(), summary_csv(std::span(&report, 1)));
  return written;
}

std::filesystem::path write_sweep_table(std::span<const SweepEntry> sweep, const std::filesystem::path& dir) {
  const auto path = dir / "sweep.csv";
  write_file_atomic(path, sweep_csv(sweep));
  return path;
}

}  // namespace stepeval
