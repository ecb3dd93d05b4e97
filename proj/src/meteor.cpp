#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stepeval/metrics.hpp"

namespace stepeval {
namespace {

// Among maximum exact-match alignments, find one with the most "links": a
// link is a candidate position i matched to reference j while i-1 is matched
// to j-1. chunks = matches - links.
//
// Minimising chunks is NP-hard in general (it contains minimum common string
// partition), so this is a depth-first branch and bound with a node budget.
// Candidate positions are assigned left to right; the search tries to extend
// the current chunk first, so the first leaf reached is already a greedy
// tiling and every later leaf can only improve on it.
class ChunkSearch {
 public:
  ChunkSearch(const TokenSequence& candidate, const TokenSequence& reference, std::size_t budget)
      : budget_(budget) {
    std::unordered_map<std::string, int> ids;
    auto intern = [&](const std::string& token) {
      return ids.try_emplace(token, static_cast<int>(ids.size())).first->second;
    };
    for (const auto& t : reference) ref_.push_back(intern(t));
    for (const auto& t : candidate) cand_.push_back(intern(t));

    const std::size_t types = ids.size();
    positions_.resize(types);
    for (std::size_t j = 0; j < ref_.size(); ++j) positions_[static_cast<std::size_t>(ref_[j])].push_back(j);

    std::vector<std::size_t> cand_count(types, 0);
    for (int t : cand_) ++cand_count[static_cast<std::size_t>(t)];
    skips_left_.resize(types);
    for (std::size_t t = 0; t < types; ++t) {
      const std::size_t matched = std::min(cand_count[t], positions_[t].size());
      matches_ += matched;
      skips_left_[t] = cand_count[t] - matched;
    }

    std::set<std::pair<int, int>> ref_bigrams;
    for (std::size_t j = 1; j < ref_.size(); ++j) ref_bigrams.emplace(ref_[j - 1], ref_[j]);
    link_bound_.assign(cand_.size() + 1, 0);
    for (std::size_t i = cand_.size(); i-- > 0;) {
      const bool linkable = i > 0 && ref_bigrams.count({cand_[i - 1], cand_[i]}) > 0;
      link_bound_[i] = link_bound_[i + 1] + (linkable ? 1 : 0);
    }
    used_.assign(ref_.size(), false);
  }

  MeteorAlignment run() {
    if (matches_ == 0) return {};
    search(0, kNone, 0);
    return {matches_, matches_ - static_cast<std::size_t>(best_links_), !exhausted_};
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  void search(std::size_t i, std::size_t prev_j, long links) {
    if (exhausted_) return;
    if (++nodes_ > budget_ && best_links_ >= 0) {
      exhausted_ = true;
      return;
    }
    if (i == cand_.size()) {
      best_links_ = std::max(best_links_, links);
      return;
    }
    if (links + static_cast<long>(link_bound_[i]) <= best_links_) return;

    const auto type = static_cast<std::size_t>(cand_[i]);
    const std::size_t extend = prev_j == kNone ? kNone : prev_j + 1;
    if (extend != kNone && extend < ref_.size() && !used_[extend] &&
        static_cast<std::size_t>(ref_[extend]) == type) {
      assign(i, extend, links + 1);
    }
    // Positions that could start a chunk with the next candidate token go first.
    const auto& options = positions_[type];
    for (int pass = 0; pass < 2 && !exhausted_; ++pass) {
      for (std::size_t j : options) {
        if (used_[j] || j == extend) continue;
        const bool opens_chunk = i + 1 < cand_.size() && j + 1 < ref_.size() && ref_[j + 1] == cand_[i + 1];
        if (opens_chunk != (pass == 0)) continue;
        assign(i, j, links);
        if (exhausted_) return;
      }
    }
    if (skips_left_[type] > 0 && !exhausted_) {
      --skips_left_[type];
      search(i + 1, kNone, links);
      ++skips_left_[type];
    }
  }

  void assign(std::size_t i, std::size_t j, long links) {
    used_[j] = true;
    search(i + 1, j, links);
    used_[j] = false;
  }

  std::vector<int> cand_;
  std::vector<int> ref_;
  std::vector<std::vector<std::size_t>> positions_;
  std::vector<std::size_t> skips_left_;
  std::vector<std::size_t> link_bound_;
  std::vector<bool> used_;
  std::size_t matches_ = 0;
  long best_links_ = -1;
  std::size_t budget_;
  std::size_t nodes_ = 0;
  bool exhausted_ = false;
};

}  // namespace

MeteorAlignment meteor_align(const TokenSequence& candidate, const TokenSequence& reference,
                             std::size_t search_budget) {
  return ChunkSearch(candidate, reference, search_budget).run();
}

MeteorScore meteor_details(const TokenSequence& candidate, const TokenSequence& reference) {
  MeteorScore s;
  s.alignment = meteor_align(candidate, reference);
  if (s.alignment.matches == 0) return s;
  const auto m = static_cast<double>(s.alignment.matches);
  s.precision = m / static_cast<double>(candidate.size());
  s.recall = m / static_cast<double>(reference.size());
  s.fmean = 10.0 * s.precision * s.recall / (s.recall + 9.0 * s.precision);
  s.penalty = 0.5 * std::pow(static_cast<double>(s.alignment.chunks) / m, 3.0);
  s.score = s.fmean * (1.0 - s.penalty);
  return s;
}

double meteor(const TokenSequence& candidate, const TokenSequence& reference) {
  return meteor_details(candidate, reference).score;
}

}  // namespace stepeval
