#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "stepeval/metrics.hpp"

using namespace stepeval;

namespace {
TokenSequence seq(const oracle::Tokens& t) { return TokenSequence(t); }
}  // namespace

TEST_CASE("tokenize") {
  CHECK(tokenize("The CAT, sat!").tokens() == oracle::Tokens{"the", "cat", "sat"});
  CHECK(tokenize("v^2 = u^2 - 2gh").tokens() == oracle::Tokens{"v", "2", "u", "2", "2gh"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  ,.; ").empty());
  CHECK(tokenize("naïve café").tokens() == oracle::Tokens{"naïve", "café"});
}

TEST_CASE("token sequences reject empty or spaced tokens") {
  CHECK_THROWS_AS(TokenSequence({"a", ""}), std::invalid_argument);
  CHECK_THROWS_AS(TokenSequence({"a b"}), std::invalid_argument);
}

TEST_CASE("rouge-n hand example against the bigram oracle") {
  const oracle::Tokens c = {"the", "cat", "sat"};
  const oracle::Tokens r = {"the", "cat", "on", "the", "mat"};
  const auto got = rouge_n(seq(c), seq(r), 2);
  const auto want = oracle::rouge_n(c, r, 2);
  CHECK(got.precision == doctest::Approx(want.p));
  CHECK(got.recall == doctest::Approx(want.r));
  CHECK(got.f1 == doctest::Approx(want.f));
  CHECK(got.precision == doctest::Approx(0.5));
  CHECK(got.recall == doctest::Approx(0.25));
}

TEST_CASE("rouge-n edge cases") {
  CHECK(rouge_n(seq({}), seq({"a"}), 1) == PrfScore{});
  CHECK(rouge_n(seq({"a"}), seq({"a"}), 2) == PrfScore{});
  CHECK(rouge_n(seq({"a", "b"}), seq({"a", "b"}), 2).f1 == 1.0);
  CHECK(rouge_n(seq({"a", "a", "a"}), seq({"a"}), 1).precision == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS(rouge_n(seq({"a"}), seq({"a"}), 0), std::invalid_argument);
}

TEST_CASE("rouge-n matches the oracle on random pairs") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto c = oracle::random_tokens(rng, 12, 5);
    const auto r = oracle::random_tokens(rng, 12, 5);
    for (int n : {1, 2, 3}) {
      const auto got = rouge_n(seq(c), seq(r), n);
      const auto want = oracle::rouge_n(c, r, static_cast<std::size_t>(n));
      CHECK(std::abs(got.precision - want.p) <= 1e-12);
      CHECK(std::abs(got.recall - want.r) <= 1e-12);
      CHECK(std::abs(got.f1 - want.f) <= 1e-12);
    }
  }
}

TEST_CASE("lcs matches exhaustive subsequence search") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto a = oracle::random_tokens(rng, 10, 4);
    const auto b = oracle::random_tokens(rng, 10, 4);
    CHECK(lcs_length(seq(a), seq(b)) == oracle::lcs(a, b));
  }
}

TEST_CASE("rouge-l") {
  const auto s = rouge_l(seq({"a", "b", "c", "d"}), seq({"a", "c", "d", "e", "f"}));
  CHECK(s.precision == doctest::Approx(0.75));
  CHECK(s.recall == doctest::Approx(0.6));
  CHECK(s.f1 == doctest::Approx(2 * 0.75 * 0.6 / 1.35));
  CHECK(rouge_l(seq({}), seq({"a"})) == PrfScore{});
  CHECK(rouge_l(seq({"x", "y"}), seq({"x", "y"})).f1 == 1.0);
}

TEST_CASE("harmonic mean") {
  CHECK(harmonic_mean(0.0, 0.0) == 0.0);
  CHECK(harmonic_mean(1.0, 1.0) == 1.0);
  CHECK(harmonic_mean(0.5, 0.25) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("score_pair on identical and empty text") {
  const std::string ref = "The block slides down the incline and reaches 4.43 m/s";
  const std::vector<TokenSequence> docs = {tokenize(ref)};
  const IdfModel idf = fit_idf(docs);
  const auto same = score_pair(ref, ref, idf);
  CHECK(same.rouge1.f1 == 1.0);
  CHECK(same.rouge2.f1 == 1.0);
  CHECK(same.rougeL.f1 == 1.0);
  CHECK(same.tfidf_cosine == doctest::Approx(1.0));
  CHECK_FALSE(same.embed_f1.has_value());

  const auto empty = score_pair("", ref, idf);
  CHECK(empty.rouge1 == PrfScore{});
  CHECK(empty.rouge2 == PrfScore{});
  CHECK(empty.rougeL == PrfScore{});
  CHECK(empty.meteor == 0.0);
  CHECK(empty.tfidf_cosine == 0.0);
}

TEST_CASE("score_pair on a worked response against the oracles") {
  const std::string response =
      "Given mass m = 5 kg angle theta = 30 degrees distance d = 2 m. The component of gravitational force along the "
      "incline F = mg sin(theta) = 24.5 N. Using the work energy principle W = F x d = 49 J. 49 = 1/2 x 5 x v^2 so "
      "v = sqrt(19.6) = 4.43 m/s";
  const std::string reference =
      "v = 4.43 m/s The force along the incline is F = mg sin(30 degrees) = 24.5 N . Work done over 2 meters is W = 49 "
      "J , which equals the gain in kinetic energy. From 49 = 1/2 x 5 x v^2 we get v = sqrt(19.6) .";
  const auto c = tokenize(response);
  const auto r = tokenize(reference);
  const std::vector<TokenSequence> docs = {c, r};
  const auto got = score_pair(response, reference, fit_idf(docs));

  const auto r1 = oracle::rouge_n(c.tokens(), r.tokens(), 1);
  const auto r2 = oracle::rouge_n(c.tokens(), r.tokens(), 2);
  CHECK(got.rouge1.f1 == doctest::Approx(r1.f).epsilon(1e-12));
  CHECK(got.rouge2.f1 == doctest::Approx(r2.f).epsilon(1e-12));
  const double lcs = static_cast<double>(oracle::lcs_recursive(c.tokens(), r.tokens()));
  const double p = lcs / static_cast<double>(c.size());
  const double rc = lcs / static_cast<double>(r.size());
  CHECK(got.rougeL.f1 == doctest::Approx(2 * p * rc / (p + rc)).epsilon(1e-12));
  CHECK(got.tfidf_cosine == doctest::Approx(oracle::tfidf_cosine(c.tokens(), r.tokens(), {c.tokens(), r.tokens()})).epsilon(1e-12));
  CHECK(got.meteor > 0.0);
  CHECK(got.meteor < 1.0);
}
