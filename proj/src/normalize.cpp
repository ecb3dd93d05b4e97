#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "stepeval/dataset.hpp"

namespace stepeval {
namespace {

struct Replacement {
  std::string_view from;
  std::string_view to;
};

// Commands whose output is fixed text.
constexpr std::array kCommandTable = {
    Replacement{"times", " x "},    Replacement{"cdot", " x "},     Replacement{"div", " / "},
    Replacement{"degree", " degrees"}, Replacement{"circ", " degrees"},
    Replacement{"sin", "sin"},      Replacement{"cos", "cos"},      Replacement{"tan", "tan"},
    Replacement{"log", "log"},      Replacement{"ln", "ln"},        Replacement{"exp", "exp"},
    Replacement{"theta", "theta"},  Replacement{"alpha", "alpha"},  Replacement{"beta", "beta"},
    Replacement{"gamma", "gamma"},  Replacement{"delta", "delta"},  Replacement{"Delta", "Delta"},
    Replacement{"lambda", "lambda"}, Replacement{"mu", "mu"},       Replacement{"pi", "pi"},
    Replacement{"rho", "rho"},      Replacement{"sigma", "sigma"},  Replacement{"omega", "omega"},
    Replacement{"Omega", "Omega"},  Replacement{"phi", "phi"},      Replacement{"epsilon", "epsilon"},
    Replacement{"tau", "tau"},      Replacement{"le", " <= "},      Replacement{"leq", " <= "},
    Replacement{"ge", " >= "},      Replacement{"geq", " >= "},     Replacement{"neq", " != "},
    Replacement{"approx", " approx "}, Replacement{"pm", " +/- "},
    Replacement{"left", ""},        Replacement{"right", ""},       Replacement{"quad", " "},
    Replacement{"qquad", " "},
};

// Commands whose single argument is kept as plain text.
constexpr std::array<std::string_view, 8> kPassThroughCommands = {
    "text", "mathrm", "mathbf", "textbf", "mathit", "textit", "operatorname", "mbox"};

constexpr std::array<std::string_view, 3> kFractionCommands = {"frac", "dfrac", "tfrac"};

// UTF-8 symbols with an ASCII spelling.
constexpr std::array kUnicodeTable = {
    Replacement{"×", " x "},     Replacement{"÷", " / "},  Replacement{"°", " degrees"},
    Replacement{"−", "-"},       Replacement{"–", "-"},    Replacement{"\xe2\x80\x94", "-"},
    Replacement{"θ", "theta"},   Replacement{"π", "pi"},   Replacement{"Δ", "Delta"},
    Replacement{"µ", "mu"},      Replacement{"μ", "mu"},   Replacement{"²", "^2"},
    Replacement{"³", "^3"},      Replacement{"·", " x "},  Replacement{"≈", " approx "},
    Replacement{"≤", " <= "},    Replacement{"≥", " >= "}, Replacement{"±", " +/- "},
    Replacement{"\xc2\xa0", " "},      Replacement{"’", "'"},    Replacement{"‘", "'"},
    Replacement{"“", "\""},      Replacement{"”", "\""},   Replacement{"…", "..."},
    Replacement{"Ω", "Omega"},   Replacement{"λ", "lambda"}, Replacement{"α", "alpha"},
    Replacement{"β", "beta"},    Replacement{"ω", "omega"},
};

bool is_letter(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t utf8_length(char lead) {
  const auto c = static_cast<unsigned char>(lead);
  if (c >= 0xf0) return 4;
  if (c >= 0xe0) return 3;
  if (c >= 0xc0) return 2;
  return 1;
}

class Converter {
 public:
  explicit Converter(std::set<std::string>* unknown) : unknown_(unknown) {}

  std::string convert(std::string_view s) const {
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
      const char c = s[i];
      switch (c) {
        case '\\':
          command(s, i, out);
          break;
        case '$':
        case '}':
          ++i;
          break;
        case '{':
          out += convert(read_group(s, i));
          break;
        case '~':
          out += ' ';
          ++i;
          break;
        case '^':
        case '_':
          script(s, i, out);
          break;
        default:
          if (static_cast<unsigned char>(c) >= 0x80 && unicode(s, i, out)) break;
          out += c;
          ++i;
      }
    }
    return out;
  }

 private:
  // s[i] == '{'. Returns the contents and leaves i past the matching brace;
  // an unbalanced group runs to the end of input.
  static std::string_view read_group(std::string_view s, std::size_t& i) {
    const std::size_t start = ++i;
    int depth = 1;
    while (i < s.size()) {
      if (s[i] == '\\' && i + 1 < s.size()) {
        i += 2;
        continue;
      }
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        std::string_view inner = s.substr(start, i - start);
        ++i;
        return inner;
      }
      ++i;
    }
    return s.substr(start);
  }

  // A macro argument: a braced group, a control word, or one character.
  static std::string_view read_argument(std::string_view s, std::size_t& i) {
    while (i < s.size() && is_space(s[i])) ++i;
    if (i >= s.size()) return {};
    if (s[i] == '{') return read_group(s, i);
    const std::size_t start = i;
    if (s[i] == '\\') {
      ++i;
      while (i < s.size() && is_letter(s[i])) ++i;
      if (i == start + 1 && i < s.size()) i = std::min(i + utf8_length(s[i]), s.size());
      return s.substr(start, i - start);
    }
    i += utf8_length(s[i]);
    i = std::min(i, s.size());
    return s.substr(start, i - start);
  }

  static bool starts_with_degree_marker(std::string_view s) {
    return s.starts_with("\\circ") && (s.size() == 5 || !is_letter(s[5]));
  }

  void script(std::string_view s, std::size_t& i, std::string& out) const {
    const char marker = s[i++];
    if (marker == '^') {
      if (starts_with_degree_marker(s.substr(i))) {
        out += " degrees";
        i += 5;
        return;
      }
      if (i < s.size() && s[i] == '{') {
        std::size_t probe = i;
        std::string_view inner = read_group(s, probe);
        while (!inner.empty() && is_space(inner.front())) inner.remove_prefix(1);
        while (!inner.empty() && is_space(inner.back())) inner.remove_suffix(1);
        if (inner == "\\circ") {
          out += " degrees";
          i = probe;
          return;
        }
      }
    }
    out += marker;
    if (i < s.size() && s[i] == '{') out += convert(read_group(s, i));
  }

  void command(std::string_view s, std::size_t& i, std::string& out) const {
    ++i;  // backslash
    if (i >= s.size()) return;
    if (static_cast<unsigned char>(s[i]) >= 0x80) return;  // stray backslash before a UTF-8 symbol
    if (!is_letter(s[i])) {
      const char symbol = s[i++];
      switch (symbol) {
        case '(': case ')': case '[': case ']':
        case '{': case '}': case '$': case '!':
          break;
        case ',': case ';': case ':': case ' ': case '\\': case '~':
          out += ' ';
          break;
        default:
          out += symbol;
      }
      return;
    }
    const std::size_t start = i;
    while (i < s.size() && is_letter(s[i])) ++i;
    const std::string_view name = s.substr(start, i - start);

    for (std::string_view frac : kFractionCommands) {
      if (name == frac) {
        const std::string numerator = convert(read_argument(s, i));
        const std::string denominator = convert(read_argument(s, i));
        out += numerator + "/" + denominator;
        return;
      }
    }
    if (name == "sqrt") {
      std::string index;
      std::size_t probe = i;
      while (probe < s.size() && is_space(s[probe])) ++probe;
      if (probe < s.size() && s[probe] == '[') {
        const std::size_t close = s.find(']', probe);
        if (close != std::string_view::npos) {
          index = convert(s.substr(probe + 1, close - probe - 1));
          i = close + 1;
        }
      }
      out += index.empty() ? "sqrt(" : "sqrt[" + index + "](";
      out += convert(read_argument(s, i));
      out += ')';
      return;
    }
    for (std::string_view pass : kPassThroughCommands) {
      if (name == pass) {
        out += convert(read_argument(s, i));
        return;
      }
    }
    for (const auto& entry : kCommandTable) {
      if (name == entry.from) {
        out += entry.to;
        return;
      }
    }
    if (unknown_ != nullptr) unknown_->emplace(name);
    out += name;
  }

  static bool unicode(std::string_view s, std::size_t& i, std::string& out) {
    const std::string_view rest = s.substr(i);
    for (const auto& entry : kUnicodeTable) {
      if (rest.starts_with(entry.from)) {
        out += entry.to;
        i += entry.from.size();
        return true;
      }
    }
    return false;
  }

  std::set<std::string>* unknown_;
};

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += c;
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view raw, std::set<std::string>* unknown_commands) {
  return collapse_whitespace(Converter(unknown_commands).convert(raw));
}

}  // namespace stepeval
