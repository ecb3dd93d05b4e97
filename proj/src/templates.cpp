#include <fstream>
#include <istream>
#include <regex>
#include <set>
#include <string>

#include "stepeval/error.hpp"
#include "stepeval/prompt.hpp"

namespace stepeval {
namespace {

const std::set<std::string, std::less<>> kPlaceholders = {"question", "steps", "final_answer", "index",
                                                          "count"};

void check_placeholders(const std::string& section, const std::string& text) {
  static const std::regex placeholder(R"(\{([A-Za-z_]+)\})");
  for (auto it = std::sregex_iterator(text.begin(), text.end(), placeholder); it != std::sregex_iterator(); ++it) {
    if (!kPlaceholders.contains((*it)[1].str())) {
      throw ValidationError("template section '" + section + "' uses unknown placeholder {" + (*it)[1].str() + "}");
    }
  }
}

std::string* section_slot(PromptTemplates& t, std::string_view name) {
  if (name == "baseline") return &t.baseline;
  if (name == "kshot_exemplar") return &t.kshot_exemplar;
  if (name == "kshot_target") return &t.kshot_target;
  if (name == "analogical") return &t.analogical;
  if (name == "analogical_counted") return &t.analogical_counted;
  if (name == "analogical_cot_exemplar") return &t.analogical_cot_exemplar;
  if (name == "analogical_cot_target") return &t.analogical_cot_target;
  return nullptr;
}

}  // namespace

const PromptTemplates& PromptTemplates::defaults() {
  static const PromptTemplates templates{
      .baseline = "Solve the following question, showing each step of your reasoning.\n\nQuestion: {question}",
      .kshot_exemplar = "{index}. {question}\nSteps:\n{steps}\nAnswer: {final_answer}",
      .kshot_target = "Now solve, showing your steps:\nQuestion: {question}",
      .analogical = "Recall relevant exemplars and solve the question: \"{question}\"",
      .analogical_counted = "Recall {count} relevant exemplars and solve the question: \"{question}\"",
      .analogical_cot_exemplar = "{index}. {question}",
      .analogical_cot_target = "Recall relevant exemplars and solve the question: \"{question}\"",
  };
  return templates;
}

PromptTemplates PromptTemplates::parse(std::istream& in) {
  PromptTemplates result = defaults();
  std::set<std::string> seen;
  std::string* current = nullptr;
  std::string current_name;
  std::string body;
  auto flush = [&] {
    if (current == nullptr) return;
    if (!body.empty() && body.back() == '\n') body.pop_back();
    check_placeholders(current_name, body);
    *current = body;
    body.clear();
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.size() > 4 && line.starts_with("[[") && line.ends_with("]]")) {
      flush();
      current_name = line.substr(2, line.size() - 4);
      current = section_slot(result, current_name);
      if (current == nullptr) throw ParseError(line_no, "unknown template section '" + current_name + "'");
      if (!seen.insert(current_name).second) throw ParseError(line_no, "duplicate template section '" + current_name + "'");
      continue;
    }
    if (current == nullptr) {
      if (line.find_first_not_of(" \t") == std::string::npos) continue;
      throw ParseError(line_no, "text before the first [[section]] header");
    }
    body += line;
    body += '\n';
  }
  flush();
  return result;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open template file '" + path.string() + "'");
  return parse(in);
}

}  // namespace stepeval
