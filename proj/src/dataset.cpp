#include "stepeval/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include <json.hpp>

#include "stepeval/error.hpp"
#include "stepeval/io.hpp"
#include "stepeval/metrics.hpp"

namespace stepeval {
namespace {

using nlohmann::json;

std::string required_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line, std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(line, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

QuestionRecord parse_line(std::string_view text, std::size_t line_index,
                          std::set<std::string>* unknown) {
  const std::size_t line = line_index + 1;
  json obj;
  try {
    obj = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line, std::string("malformed record: ") + e.what());
  }
  if (!obj.is_object()) throw ParseError(line, "record must be a JSON object");

  QuestionRecord record;
  record.id = optional_string(obj, "id", line).value_or(std::to_string(line_index));
  if (record.id.empty()) throw ParseError(line, "id must not be empty");
  try {
    record.subject = parse_subject(required_string(obj, "subject", line));
  } catch (const ParseError&) {
    throw;
  } catch (const ValidationError& e) {
    throw ParseError(line, e.what());
  }

  record.question = normalize_text(required_string(obj, "question", line), unknown);
  if (record.question.empty()) throw ParseError(line, "question is empty");

  auto steps = obj.find("steps");
  if (steps == obj.end()) throw ParseError(line, "missing field 'steps'");
  if (!steps->is_array()) throw ParseError(line, "field 'steps' must be an array of strings");
  if (steps->empty()) throw ParseError(line, "steps list is empty");
  for (std::size_t i = 0; i < steps->size(); ++i) {
    const json& step = (*steps)[i];
    if (!step.is_string()) throw ParseError(line, "step " + std::to_string(i) + " is not a string");
    std::string normalized = normalize_text(step.get<std::string>(), unknown);
    if (normalized.empty()) throw ParseError(line, "step " + std::to_string(i) + " is empty");
    record.steps.push_back(std::move(normalized));
  }

  record.final_answer = normalize_text(required_string(obj, "final_answer", line), unknown);
  if (record.final_answer.empty()) throw ParseError(line, "final_answer is empty");

  if (auto topic = optional_string(obj, "topic", line)) record.topic = normalize_text(*topic, unknown);
  return record;
}

// UTF-8 code points; continuation bytes are not counted.
std::size_t char_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

bool is_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

std::string_view to_string(Subject subject) {
  return subject == Subject::math ? "math" : "physics";
}

Subject parse_subject(std::string_view text) {
  if (text == "physics") return Subject::physics;
  if (text == "math") return Subject::math;
  throw ValidationError("unknown subject '" + std::string(text) + "' (expected physics or math)");
}

std::string reference_text(const QuestionRecord& record) {
  std::string text = record.final_answer;
  for (const auto& step : record.steps) {
    text += ' ';
    text += step;
  }
  return text;
}

std::vector<QuestionRecord> parse_dataset(std::istream& source, std::set<std::string>* unknown_commands) {
  std::vector<QuestionRecord> records;
  std::unordered_set<std::string> seen;
  std::string line;
  for (std::size_t index = 0; std::getline(source, line); ++index) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    QuestionRecord record = parse_line(line, index, unknown_commands);
    if (!seen.insert(record.id).second) throw ParseError(index + 1, "duplicate id '" + record.id + "'");
    records.push_back(std::move(record));
  }
  return records;
}

std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path,
                                         std::set<std::string>* unknown_commands) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");
  try {
    return parse_dataset(in, unknown_commands);
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.cause());
  }
}

std::string serialize_record(const QuestionRecord& record) {
  nlohmann::ordered_json obj;
  obj["id"] = record.id;
  obj["subject"] = std::string(to_string(record.subject));
  obj["question"] = record.question;
  obj["steps"] = record.steps;
  obj["final_answer"] = record.final_answer;
  if (record.topic) obj["topic"] = *record.topic;
  return obj.dump();
}

void write_dataset(std::ostream& out, std::span<const QuestionRecord> records) {
  for (const auto& record : records) out << serialize_record(record) << '\n';
}

std::vector<QuestionRecord> deduplicate(std::span<const QuestionRecord> records, double threshold) {
  // Thresholds above 1 are accepted and keep everything.
  if (!(threshold > 0.0)) {
    throw ValidationError("dedupe threshold must be positive");
  }
  if (records.empty()) return {};

  std::vector<TokenSequence> questions;
  questions.reserve(records.size());
  for (const auto& r : records) questions.push_back(tokenize(r.question));
  const IdfModel idf = fit_idf(questions);

  std::vector<QuestionRecord> kept;
  std::vector<TfIdfVector> kept_vectors;
  for (std::size_t i = 0; i < records.size(); ++i) {
    TfIdfVector v = vectorize(idf, questions[i]);
    const bool duplicate = std::any_of(kept_vectors.begin(), kept_vectors.end(),
                                       [&](const TfIdfVector& k) { return cosine_similarity(v, k) >= threshold; });
    if (duplicate) continue;
    kept.push_back(records[i]);
    kept_vectors.push_back(std::move(v));
  }
  return kept;
}

DatasetSplit split(std::span<const QuestionRecord> records, std::array<double, 3> ratios,
                   std::uint64_t seed) {
  for (double r : ratios) {
    if (!(r >= 0.0)) throw ValidationError("split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw ValidationError("split ratios must sum to 1");
  }

  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  stable_shuffle(order, seed);

  const auto n = static_cast<double>(records.size());
  // The epsilon keeps exact products such as 0.29 * 100 from flooring one short.
  const auto n_validation = static_cast<std::size_t>(std::floor(n * ratios[1] + 1e-9));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[2] + 1e-9));
  const std::size_t n_train = records.size() - n_validation - n_test;

  DatasetSplit result;
  result.seed = seed;
  result.ratios = ratios;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const QuestionRecord& r = records[order[i]];
    if (i < n_train) {
      result.train.push_back(r);
    } else if (i < n_train + n_validation) {
      result.validation.push_back(r);
    } else {
      result.test.push_back(r);
    }
  }
  return result;
}

DatasetStats compute_stats(std::span<const QuestionRecord> records) {
  DatasetStats stats;
  stats.record_count = records.size();
  std::size_t total_steps = 0;
  std::size_t total_chars = 0;
  for (const auto& r : records) {
    total_steps += r.steps.size();
    ++stats.step_count_histogram[r.steps.size()];
    for (const auto& step : r.steps) {
      const std::size_t length = char_length(step);
      total_chars += length;
      ++stats.step_length_histogram[length / kStepLengthBucketWidth * kStepLengthBucketWidth];
    }
  }
  if (stats.record_count > 0) {
    stats.mean_steps_per_question = static_cast<double>(total_steps) / static_cast<double>(stats.record_count);
  }
  if (total_steps > 0) {
    stats.mean_step_length_chars = static_cast<double>(total_chars) / static_cast<double>(total_steps);
  }
  return stats;
}

bool id_less(std::string_view a, std::string_view b) {
  const std::string_view a_original = a;
  const std::string_view b_original = b;
  const bool a_num = is_digits(a);
  const bool b_num = is_digits(b);
  if (a_num != b_num) return a_num;
  if (a_num) {
    while (a.size() > 1 && a.front() == '0') a.remove_prefix(1);
    while (b.size() > 1 && b.front() == '0') b.remove_prefix(1);
    if (a.size() != b.size()) return a.size() < b.size();
    if (a != b) return a < b;
    return a_original < b_original;
  }
  return a < b;
}

}  // namespace stepeval
