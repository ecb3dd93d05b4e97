#include "stepeval/metrics.hpp"

namespace stepeval {

MetricReport score_pair(std::string_view candidate, std::string_view reference, const IdfModel& idf,
                        const Embedder* embedder) {
  const TokenSequence cand = tokenize(candidate);
  const TokenSequence ref = tokenize(reference);
  MetricReport report;
  report.rouge1 = rouge_n(cand, ref, 1);
  report.rouge2 = rouge_n(cand, ref, 2);
  report.rougeL = rouge_l(cand, ref);
  report.meteor = meteor(cand, ref);
  report.tfidf_cosine = cosine_similarity(vectorize(idf, cand), vectorize(idf, ref));
  if (embedder != nullptr) report.embed_f1 = embed_score(cand, ref, *embedder).f1;
  return report;
}

}  // namespace stepeval
