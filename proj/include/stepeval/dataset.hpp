#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace stepeval {

enum class Subject { physics, math };

std::string_view to_string(Subject subject);
Subject parse_subject(std::string_view text);

/// One StemStep entry: a question, its ordered solution steps and the final answer.
/// Text fields are stored normalized (see normalize_text).
struct QuestionRecord {
  std::string id;
  Subject subject = Subject::physics;
  std::string question;
  std::vector<std::string> steps;
  std::string final_answer;
  std::optional<std::string> topic;

  bool operator==(const QuestionRecord&) const = default;
};

/// Ground-truth text a generated answer is compared against: the final answer
/// followed by every step, space separated.
std::string reference_text(const QuestionRecord& record);

struct DatasetStats {
  std::size_t record_count = 0;
  double mean_steps_per_question = 0.0;
  std::map<std::size_t, std::size_t> step_count_histogram;
  double mean_step_length_chars = 0.0;
  // Keyed by the bucket's lower bound in characters.
  std::map<std::size_t, std::size_t> step_length_histogram;
};

inline constexpr std::size_t kStepLengthBucketWidth = 50;

struct DatasetSplit {
  std::vector<QuestionRecord> train;
  std::vector<QuestionRecord> validation;
  std::vector<QuestionRecord> test;
  std::uint64_t seed = 0;
  std::array<double, 3> ratios{0.6, 0.2, 0.2};
};

/// Converts inline LaTeX to plain ASCII text and collapses whitespace.
/// Idempotent. Commands outside the replacement table lose their backslash;
/// their names are collected into `unknown_commands` when it is non-null.
std::string normalize_text(std::string_view raw, std::set<std::string>* unknown_commands = nullptr);

/// Reads line-delimited JSON records. Blank lines are skipped; records without
/// an explicit id get their 0-based line index as id. Throws ParseError.
std::vector<QuestionRecord> parse_dataset(std::istream& source,
                                          std::set<std::string>* unknown_commands = nullptr);
std::vector<QuestionRecord> load_dataset(const std::filesystem::path& path,
                                         std::set<std::string>* unknown_commands = nullptr);

std::string serialize_record(const QuestionRecord& record);
void write_dataset(std::ostream& out, std::span<const QuestionRecord> records);

/// Greedy near-duplicate removal on question text by TF-IDF cosine.
std::vector<QuestionRecord> deduplicate(std::span<const QuestionRecord> records, double threshold);

DatasetSplit split(std::span<const QuestionRecord> records, std::array<double, 3> ratios,
                   std::uint64_t seed);

DatasetStats compute_stats(std::span<const QuestionRecord> records);

/// Id ordering used everywhere ids are sorted: all-digit ids compare
/// numerically and sort before other ids, which compare lexicographically.
bool id_less(std::string_view a, std::string_view b);

}  // namespace stepeval
