#include <doctest.h>

#include <chrono>
#include <random>

#include "oracles.hpp"
#include "stepeval/metrics.hpp"

using namespace stepeval;

namespace {
TokenSequence seq(const oracle::Tokens& t) { return TokenSequence(t); }
}  // namespace

TEST_CASE("identical length-10 inputs") {
  const oracle::Tokens t = {"a", "b", "c", "d", "e", "f", "g", "h", "i", "j"};
  const auto s = meteor_details(seq(t), seq(t));
  CHECK(s.alignment.matches == 10);
  CHECK(s.alignment.chunks == 1);
  CHECK(s.alignment.exact);
  CHECK(s.score == doctest::Approx(0.9995).epsilon(1e-12));
}

TEST_CASE("no matches") {
  const auto s = meteor_details(seq({"a", "b"}), seq({"c"}));
  CHECK(s.alignment.matches == 0);
  CHECK(s.score == 0.0);
  CHECK(meteor(seq({}), seq({"a"})) == 0.0);
}

TEST_CASE("swapped halves form two chunks") {
  const auto a = meteor_align(seq({"c", "d", "a", "b"}), seq({"a", "b", "c", "d"}));
  CHECK(a.matches == 4);
  CHECK(a.chunks == 2);
}

TEST_CASE("repeated tokens pick the alignment with fewest chunks") {
  const oracle::Tokens c = {"the", "cat", "the", "mat"};
  const oracle::Tokens r = {"the", "mat", "the", "cat"};
  const auto a = meteor_align(seq(c), seq(r));
  const auto want = oracle::meteor_align(c, r);
  CHECK(a.matches == want.matches);
  CHECK(a.chunks == want.chunks);
  CHECK(a.chunks == 2);
}

TEST_CASE("alignment matches the exhaustive oracle on random pairs") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 500; ++trial) {
    const int vocab = 2 + trial % 4;
    const auto c = oracle::random_tokens(rng, 8, vocab);
    const auto r = oracle::random_tokens(rng, 8, vocab);
    const auto got = meteor_align(seq(c), seq(r));
    const auto want = oracle::meteor_align(c, r);
    INFO("trial " << trial);
    CHECK(got.exact);
    CHECK(got.matches == want.matches);
    CHECK(got.chunks == want.chunks);
    CHECK(meteor(seq(c), seq(r)) == doctest::Approx(oracle::meteor_score(want, c.size(), r.size())).epsilon(1e-12));
  }
}

TEST_CASE("long repetitive inputs stay bounded") {
  oracle::Tokens c;
  oracle::Tokens r;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 400; ++i) {
    c.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
    r.push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
  }
  const auto start = std::chrono::steady_clock::now();
  const auto a = meteor_align(seq(c), seq(r));
  const auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(elapsed < std::chrono::seconds(5));
  CHECK(a.chunks >= 1);
  CHECK(a.chunks <= a.matches);
  // Max matches is exact regardless of the chunk search.
  std::size_t expected = 0;
  for (char ch : {'a', 'b', 'c'}) {
    const std::string t(1, ch);
    expected += static_cast<std::size_t>(std::min(std::count(c.begin(), c.end(), t), std::count(r.begin(), r.end(), t)));
  }
  CHECK(a.matches == expected);
}

TEST_CASE("an exhausted budget still reports a valid alignment") {
  const oracle::Tokens c = {"a", "b", "a", "b", "a", "b", "a", "b"};
  const oracle::Tokens r = {"b", "a", "b", "a", "b", "a", "b", "a"};
  const auto a = meteor_align(seq(c), seq(r), 3);
  CHECK_FALSE(a.exact);
  CHECK(a.matches == 8);
  CHECK(a.chunks >= oracle::meteor_align(c, r).chunks);
}
