#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace stepeval {

/// Lowercased alphanumeric-run tokens. Never holds empty tokens or tokens
/// containing whitespace.
class TokenSequence {
 public:
  TokenSequence() = default;
  // Throws std::invalid_argument if a token is empty or contains whitespace.
  explicit TokenSequence(std::vector<std::string> tokens);

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }
  auto begin() const noexcept { return tokens_.begin(); }
  auto end() const noexcept { return tokens_.end(); }

  bool operator==(const TokenSequence&) const = default;

 private:
  std::vector<std::string> tokens_;
};

/// Lowercases ASCII letters and splits on every byte that is not an ASCII
/// letter or digit. Bytes >= 0x80 are kept inside tokens so UTF-8 words stay whole.
TokenSequence tokenize(std::string_view text);

struct PrfScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PrfScore&) const = default;
};

/// Harmonic mean, 0 when both inputs are 0.
double harmonic_mean(double precision, double recall);
PrfScore make_prf(double precision, double recall);

/// Clipped n-gram overlap. Throws std::invalid_argument for n < 1.
PrfScore rouge_n(const TokenSequence& candidate, const TokenSequence& reference, int n);

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b);
PrfScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference);

struct MeteorAlignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
  // False when the chunk search hit its node budget; chunks is then the best
  // alignment found, which is an upper bound on the true minimum.
  bool exact = true;
};

struct MeteorScore {
  MeteorAlignment alignment;
  double precision = 0.0;
  double recall = 0.0;
  double fmean = 0.0;
  double penalty = 0.0;
  double score = 0.0;
};

inline constexpr std::size_t kMeteorSearchBudget = 200000;

/// Exact-match unigram alignment with the maximum number of matches and,
/// among those, the fewest chunks.
MeteorAlignment meteor_align(const TokenSequence& candidate, const TokenSequence& reference,
                             std::size_t search_budget = kMeteorSearchBudget);
MeteorScore meteor_details(const TokenSequence& candidate, const TokenSequence& reference);
double meteor(const TokenSequence& candidate, const TokenSequence& reference);

/// Smoothed inverse document frequency: ln((1 + N) / (1 + df)) + 1.
class IdfModel {
 public:
  IdfModel() = default;
  IdfModel(std::size_t doc_count, std::map<std::string, double, std::less<>> idf);

  std::size_t doc_count() const noexcept { return doc_count_; }
  // Unseen terms get the df = 0 value.
  double idf(std::string_view term) const;
  const std::map<std::string, double, std::less<>>& table() const noexcept { return idf_; }

 private:
  std::size_t doc_count_ = 0;
  std::map<std::string, double, std::less<>> idf_;
};

/// Throws std::invalid_argument for an empty corpus.
IdfModel fit_idf(std::span<const TokenSequence> corpus);

class TfIdfVector {
 public:
  TfIdfVector() = default;
  // Drops zero weights; negative weights are rejected with std::invalid_argument.
  explicit TfIdfVector(std::map<std::string, double, std::less<>> weights);

  const std::map<std::string, double, std::less<>>& weights() const noexcept { return weights_; }
  double norm() const noexcept { return norm_; }
  bool empty() const noexcept { return weights_.empty(); }

 private:
  std::map<std::string, double, std::less<>> weights_;
  double norm_ = 0.0;
};

TfIdfVector vectorize(const IdfModel& model, const TokenSequence& doc);

/// dot(a, b) / (|a| |b|) clamped to [0, 1]; 0 if either vector is empty.
double cosine_similarity(const TfIdfVector& a, const TfIdfVector& b);

/// Tokenizes, vectorizes with `model` and returns the cosine of two texts.
double text_cosine(std::string_view a, std::string_view b, const IdfModel& model);
/// Same, with the IDF fitted over just the two texts.
double text_cosine(std::string_view a, std::string_view b);

/// Token embedding provider for embed_score.
class Embedder {
 public:
  virtual ~Embedder() = default;
  // One vector per token, all the same dimension. Throws EmbedderError on failure.
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> tokens) const = 0;
  virtual std::string id() const = 0;
};

class EmbedderError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Deterministic pseudo-random embeddings derived from a hash of each token.
/// Identical tokens share a vector; distinct tokens are nearly orthogonal.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64, std::uint64_t seed = 0);
  std::vector<std::vector<double>> embed(std::span<const std::string> tokens) const override;
  std::string id() const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// Fixed lookup table; unknown tokens raise EmbedderError.
class TableEmbedder final : public Embedder {
 public:
  explicit TableEmbedder(std::map<std::string, std::vector<double>, std::less<>> table);
  std::vector<std::vector<double>> embed(std::span<const std::string> tokens) const override;
  std::string id() const override { return "table"; }

 private:
  std::map<std::string, std::vector<double>, std::less<>> table_;
};

/// Remote provider: POST {"tokens": [...]} -> {"vectors": [[...], ...]}.
class HttpEmbedder final : public Embedder {
 public:
  HttpEmbedder(std::string endpoint, int timeout_ms);
  std::vector<std::vector<double>> embed(std::span<const std::string> tokens) const override;
  std::string id() const override { return "http:" + endpoint_; }

 private:
  std::string endpoint_;
  int timeout_ms_;
};

/// Greedy max-cosine token matching. Per-token maxima are floored at 0.
PrfScore embed_score(const TokenSequence& candidate, const TokenSequence& reference,
                     const Embedder& embedder);

struct MetricReport {
  PrfScore rouge1;
  PrfScore rouge2;
  PrfScore rougeL;
  double meteor = 0.0;
  double tfidf_cosine = 0.0;
  std::optional<double> embed_f1;

  bool operator==(const MetricReport&) const = default;
};

MetricReport score_pair(std::string_view candidate, std::string_view reference, const IdfModel& idf,
                        const Embedder* embedder = nullptr);

}  // namespace stepeval
