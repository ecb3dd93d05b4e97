#include <algorithm>
#include <map>
#include <stdexcept>
#include <vector>

#include "stepeval/metrics.hpp"

namespace stepeval {
namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const TokenSequence& seq, std::size_t n) {
  NgramCounts counts;
  if (seq.size() < n) return counts;
  const auto& tokens = seq.tokens();
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

double harmonic_mean(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

PrfScore make_prf(double precision, double recall) {
  return {precision, recall, harmonic_mean(precision, recall)};
}

PrfScore rouge_n(const TokenSequence& candidate, const TokenSequence& reference, int n) {
  if (n < 1) throw std::invalid_argument("rouge_n requires n >= 1");
  const auto width = static_cast<std::size_t>(n);
  if (candidate.size() < width || reference.size() < width) return {};

  const NgramCounts cand = count_ngrams(candidate, width);
  const NgramCounts ref = count_ngrams(reference, width);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    if (auto it = ref.find(gram); it != ref.end()) overlap += std::min(count, it->second);
  }
  const double cand_total = static_cast<double>(candidate.size() - width + 1);
  const double ref_total = static_cast<double>(reference.size() - width + 1);
  return make_prf(static_cast<double>(overlap) / cand_total, static_cast<double>(overlap) / ref_total);
}

std::size_t lcs_length(const TokenSequence& a, const TokenSequence& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> curr(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      curr[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], curr[j - 1]);
    }
    std::swap(prev, curr);
  }
  return prev[b.size()];
}

PrfScore rouge_l(const TokenSequence& candidate, const TokenSequence& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const auto lcs = static_cast<double>(lcs_length(candidate, reference));
  return make_prf(lcs / static_cast<double>(candidate.size()), lcs / static_cast<double>(reference.size()));
}

}  // namespace stepeval
