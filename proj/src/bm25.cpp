#include "drl/bm25.hpp"

#include <algorithm>
#include <cmath>

namespace drl {

size_t Bm25Index::add_document(const std::vector<std::string>& terms) {
  size_t doc = doc_len_.size();
  std::map<std::string, int> tf;
  for (const auto& t : terms) ++tf[t];
  for (const auto& [term, count] : tf) postings_[term].emplace_back(doc, count);
  doc_len_.push_back(terms.size());
  total_len_ += terms.size();
  return doc;
}

double Bm25Index::avg_doc_length() const {
  if (doc_len_.empty()) return 0.0;
  return static_cast<double>(total_len_) / static_cast<double>(doc_len_.size());
}

double Bm25Index::idf(const std::string& term) const {
  double n = static_cast<double>(doc_len_.size());
  auto it = postings_.find(term);
  double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

namespace {
int tf_in_doc(const std::vector<std::pair<size_t, int>>& plist, size_t doc) {
  auto it = std::lower_bound(plist.begin(), plist.end(), doc,
                             [](const std::pair<size_t, int>& p, size_t d) { return p.first < d; });
  if (it == plist.end() || it->first != doc) return 0;
  return it->second;
}
}  // namespace

double Bm25Index::score(const std::vector<std::string>& query_terms, size_t doc) const {
  double s = 0.0;
  double avgdl = avg_doc_length();
  for (const auto& term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    int tf = tf_in_doc(it->second, doc);
    if (tf == 0) continue;
    double dl = static_cast<double>(doc_len_[doc]);
    double norm = tf + params_.k1 * (1.0 - params_.b + params_.b * dl / avgdl);
    s += idf(term) * (tf * (params_.k1 + 1.0)) / norm;
  }
  return s;
}

std::vector<std::pair<size_t, double>> Bm25Index::match_scores(
    const std::vector<std::string>& query_terms) const {
  std::map<size_t, double> acc;
  double avgdl = avg_doc_length();
  for (const auto& term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    double idf_t = idf(term);
    for (const auto& [doc, tf] : it->second) {
      double dl = static_cast<double>(doc_len_[doc]);
      double norm = tf + params_.k1 * (1.0 - params_.b + params_.b * dl / avgdl);
      acc[doc] += idf_t * (tf * (params_.k1 + 1.0)) / norm;
    }
  }
  return {acc.begin(), acc.end()};
}

}  // namespace drl
