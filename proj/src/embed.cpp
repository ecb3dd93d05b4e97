#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "http_util.hpp"
#include "stepeval/io.hpp"
#include "stepeval/metrics.hpp"

namespace stepeval {
namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

std::vector<double> unit(std::vector<double> v) {
  const double n = std::sqrt(dot(v, v));
  if (n > 0.0) {
    for (double& x : v) x /= n;
  }
  return v;
}

// Mean over `from` of the best cosine against any token in `to`.
double greedy_match(const TokenSequence& from, const TokenSequence& to,
                    const std::unordered_map<std::string, std::vector<double>>& vectors) {
  double total = 0.0;
  for (const auto& a : from) {
    double best = 0.0;
    for (const auto& b : to) best = std::max(best, dot(vectors.at(a), vectors.at(b)));
    total += std::min(best, 1.0);
  }
  return total / static_cast<double>(from.size());
}

}  // namespace

HashEmbedder::HashEmbedder(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
  if (dimension_ == 0) throw std::invalid_argument("embedding dimension must be positive");
}

std::vector<std::vector<double>> HashEmbedder::embed(std::span<const std::string> tokens) const {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    std::mt19937_64 rng(mix_seed(seed_, token));
    std::vector<double> v(dimension_);
    for (double& x : v) x = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    out.push_back(std::move(v));
  }
  return out;
}

std::string HashEmbedder::id() const {
  return "hash-" + std::to_string(dimension_) + "-" + std::to_string(seed_);
}

TableEmbedder::TableEmbedder(std::map<std::string, std::vector<double>, std::less<>> table)
    : table_(std::move(table)) {}

std::vector<std::vector<double>> TableEmbedder::embed(std::span<const std::string> tokens) const {
  std::vector<std::vector<double>> out;
  out.reserve(tokens.size());
  for (const auto& token : tokens) {
    auto it = table_.find(token);
    if (it == table_.end()) throw EmbedderError("no embedding for token '" + token + "'");
    out.push_back(it->second);
  }
  return out;
}

HttpEmbedder::HttpEmbedder(std::string endpoint, int timeout_ms)
    : endpoint_(std::move(endpoint)), timeout_ms_(timeout_ms) {
  if (!detail::parse_url(endpoint_)) throw EmbedderError("invalid embedding endpoint '" + endpoint_ + "'");
  if (timeout_ms_ <= 0) throw EmbedderError("embedding timeout must be positive");
}

std::vector<std::vector<double>> HttpEmbedder::embed(std::span<const std::string> tokens) const {
  const auto url = *detail::parse_url(endpoint_);
  auto client = detail::make_client(url, timeout_ms_);
  const nlohmann::json body = {{"tokens", std::vector<std::string>(tokens.begin(), tokens.end())}};
  auto res = client->Post(url.path, body.dump(), "application/json");
  if (!res) throw EmbedderError("embedding request failed: " + httplib::to_string(res.error()));
  if (res->status < 200 || res->status >= 300) {
    throw EmbedderError("embedding endpoint returned status " + std::to_string(res->status));
  }
  try {
    const auto doc = nlohmann::json::parse(res->body);
    return doc.at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception& e) {
    throw EmbedderError(std::string("malformed embedding response: ") + e.what());
  }
}

PrfScore embed_score(const TokenSequence& candidate, const TokenSequence& reference,
                     const Embedder& embedder) {
  if (candidate.empty() || reference.empty()) return {};
  std::set<std::string> unique(candidate.begin(), candidate.end());
  unique.insert(reference.begin(), reference.end());
  const std::vector<std::string> tokens(unique.begin(), unique.end());

  auto vectors = embedder.embed(tokens);
  if (vectors.size() != tokens.size()) {
    throw EmbedderError("embedder returned " + std::to_string(vectors.size()) + " vectors for " +
                        std::to_string(tokens.size()) + " tokens");
  }
  std::unordered_map<std::string, std::vector<double>> by_token;
  const std::size_t dimension = vectors.front().size();
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (vectors[i].size() != dimension || dimension == 0) {
      throw EmbedderError("embedder returned vectors of unequal or zero dimension");
    }
    by_token.emplace(tokens[i], unit(std::move(vectors[i])));
  }
  return make_prf(greedy_match(candidate, reference, by_token), greedy_match(reference, candidate, by_token));
}

}  // namespace stepeval
