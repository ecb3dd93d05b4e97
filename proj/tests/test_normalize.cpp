#include <doctest.h>

#include <random>

#include "stepeval/dataset.hpp"

using stepeval::normalize_text;

TEST_CASE("inline math with times and thin space") {
  CHECK(normalize_text("\\( 2 \\times 10^{-6} \\, C \\)") == "2 x 10^-6 C");
}

TEST_CASE("plain text is unchanged") {
  CHECK(normalize_text("plain text already") == "plain text already");
  CHECK(normalize_text("Heat required by the mixture is   =(100)(1)(0-(-10)=1000 Cal") ==
        "Heat required by the mixture is =(100)(1)(0-(-10)=1000 Cal");
}

TEST_CASE("replacement table") {
  CHECK(normalize_text("\\frac{400}{19.6}") == "400/19.6");
  CHECK(normalize_text("\\dfrac12") == "1/2");
  CHECK(normalize_text("\\sqrt{19.6}") == "sqrt(19.6)");
  CHECK(normalize_text("\\sqrt[3]{8}") == "sqrt[3](8)");
  CHECK(normalize_text("\\theta") == "theta");
  CHECK(normalize_text("\\sin(\\theta)") == "sin(theta)");
  CHECK(normalize_text("x_{max}") == "x_max");
  CHECK(normalize_text("30^\\circ") == "30 degrees");
  CHECK(normalize_text("30^{\\circ}") == "30 degrees");
  CHECK(normalize_text("45\\degree") == "45 degrees");
  CHECK(normalize_text("a~b") == "a b");
  CHECK(normalize_text("$E = mc^2$") == "E = mc^2");
  CHECK(normalize_text("\\[ v = u + at \\]") == "v = u + at");
  CHECK(normalize_text("\\text{kg}") == "kg");
}

TEST_CASE("unicode symbols become ascii") {
  CHECK(normalize_text("2 × 3") == "2 x 3");
  CHECK(normalize_text("30°") == "30 degrees");
  CHECK(normalize_text("θ") == "theta");
  CHECK(normalize_text("a\xc2\xa0" "b") == "a b");
}

TEST_CASE("unknown commands lose the backslash and are reported") {
  std::set<std::string> unknown;
  CHECK(normalize_text("\\foo bar", &unknown) == "foo bar");
  CHECK(unknown == std::set<std::string>{"foo"});
}

TEST_CASE("no backslash-letter sequences survive") {
  const char* inputs[] = {"\\( \\frac{\\sqrt{a}}{\\theta} \\)", "\\left( x \\right)", "\\\\alpha", "\\mathrm{\\Omega}"};
  for (const char* in : inputs) {
    const std::string out = normalize_text(in);
    for (std::size_t i = 0; i + 1 < out.size(); ++i) {
      CHECK_FALSE((out[i] == '\\' && std::isalpha(static_cast<unsigned char>(out[i + 1]))));
    }
  }
}

TEST_CASE("idempotent on random latex-ish input") {
  const std::string alphabet[] = {"\\frac", "\\sqrt", "\\times", "{", "}", "^", "_", "$", "\\(", "\\)", "\\,", "~",
                                  " ", "  ", "x", "12", "\\theta", "\\circ", "\\unknown", "[", "]", "×", "°", "\\",
                                  "\\text", "a", "\n", "\\\\", "\\degree"};
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> pick(0, std::size(alphabet) - 1);
  std::uniform_int_distribution<int> len(0, 25);
  for (int trial = 0; trial < 3000; ++trial) {
    std::string s;
    for (int i = len(rng); i > 0; --i) s += alphabet[pick(rng)];
    const std::string once = normalize_text(s);
    INFO("input: " << s);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("whitespace is collapsed and trimmed") {
  CHECK(normalize_text("  a \t\n b  ") == "a b");
  CHECK(normalize_text("") == "");
  CHECK(normalize_text("$$") == "");
}
