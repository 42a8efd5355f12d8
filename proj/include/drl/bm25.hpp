#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace drl {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

// Minimal in-memory inverted index with smoothed-idf BM25:
//   idf(t)   = ln(1 + (N - df + 0.5) / (df + 0.5))        (never negative)
//   score(d) = sum over query tokens of idf * tf*(k1+1) / (tf + k1*(1 - b + b*dl/avgdl))
// Repeated query tokens contribute once per occurrence.
class Bm25Index {
 public:
  explicit Bm25Index(Bm25Params p = {}) : params_(p) {}

  size_t add_document(const std::vector<std::string>& terms);

  size_t size() const { return doc_len_.size(); }
  size_t doc_length(size_t doc) const { return doc_len_.at(doc); }
  double avg_doc_length() const;
  const Bm25Params& params() const { return params_; }

  double idf(const std::string& term) const;
  double score(const std::vector<std::string>& query_terms, size_t doc) const;

  // (doc, score) for every document sharing at least one term with the query,
  // ascending doc order. Scores for all other documents are implicitly 0.
  std::vector<std::pair<size_t, double>> match_scores(
      const std::vector<std::string>& query_terms) const;

  // term -> sorted (doc, tf); exposed so rebuild-equivalence can be asserted
  const std::map<std::string, std::vector<std::pair<size_t, int>>>& postings() const {
    return postings_;
  }

 private:
  Bm25Params params_;
  std::map<std::string, std::vector<std::pair<size_t, int>>> postings_;
  std::vector<size_t> doc_len_;
  size_t total_len_ = 0;
};

}  // namespace drl
