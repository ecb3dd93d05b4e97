#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "stepeval/metrics.hpp"

namespace stepeval {

IdfModel::IdfModel(std::size_t doc_count, std::map<std::string, double, std::less<>> idf)
    : doc_count_(doc_count), idf_(std::move(idf)) {}

double IdfModel::idf(std::string_view term) const {
  if (auto it = idf_.find(term); it != idf_.end()) return it->second;
  return std::log(static_cast<double>(1 + doc_count_)) + 1.0;
}

IdfModel fit_idf(std::span<const TokenSequence> corpus) {
  if (corpus.empty()) throw std::invalid_argument("fit_idf requires a non-empty corpus");
  std::map<std::string, std::size_t, std::less<>> df;
  for (const auto& doc : corpus) {
    const std::set<std::string> terms(doc.begin(), doc.end());
    for (const auto& t : terms) ++df[t];
  }
  const auto n = static_cast<double>(corpus.size());
  std::map<std::string, double, std::less<>> idf;
  for (const auto& [term, count] : df) {
    idf.emplace(term, std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return IdfModel(corpus.size(), std::move(idf));
}

TfIdfVector::TfIdfVector(std::map<std::string, double, std::less<>> weights) {
  double sum_sq = 0.0;
  for (auto& [term, w] : weights) {
    if (w < 0.0 || std::isnan(w)) throw std::invalid_argument("TF-IDF weights must be non-negative");
    if (w == 0.0) continue;
    sum_sq += w * w;
    weights_.emplace(term, w);
  }
  norm_ = std::sqrt(sum_sq);
}

TfIdfVector vectorize(const IdfModel& model, const TokenSequence& doc) {
  std::map<std::string, double, std::less<>> counts;
  for (const auto& t : doc) counts[t] += 1.0;
  for (auto& [term, w] : counts) w *= model.idf(term);
  return TfIdfVector(std::move(counts));
}

double cosine_similarity(const TfIdfVector& a, const TfIdfVector& b) {
  if (a.norm() == 0.0 || b.norm() == 0.0) return 0.0;
  const auto& small = a.weights().size() <= b.weights().size() ? a.weights() : b.weights();
  const auto& large = &small == &a.weights() ? b.weights() : a.weights();
  double dot = 0.0;
  for (const auto& [term, w] : small) {
    if (auto it = large.find(term); it != large.end()) dot += w * it->second;
  }
  return std::clamp(dot / (a.norm() * b.norm()), 0.0, 1.0);
}

double text_cosine(std::string_view a, std::string_view b, const IdfModel& model) {
  return cosine_similarity(vectorize(model, tokenize(a)), vectorize(model, tokenize(b)));
}

double text_cosine(std::string_view a, std::string_view b) {
  const std::vector<TokenSequence> docs{tokenize(a), tokenize(b)};
  const IdfModel model = fit_idf(docs);
  return cosine_similarity(vectorize(model, docs[0]), vectorize(model, docs[1]));
}

}  // namespace stepeval
