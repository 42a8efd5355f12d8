#include "drl/kb.hpp"

#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>

namespace drl {

KnowledgeBase::KnowledgeBase(Bm25Params params)
    : params_(params), mu_(std::make_unique<std::shared_mutex>()), index_(params) {}

AddOutcome KnowledgeBase::add_instruction(Instruction inst) {
  std::unique_lock lock(*mu_);

  auto incoming = dedup_tokens(inst);
  std::set<std::string> incoming_set(incoming.begin(), incoming.end());
  for (const auto& existing : docs_) {
    auto ex = dedup_tokens(existing);
    std::set<std::string> ex_set(ex.begin(), ex.end());
    if (jaccard(incoming_set, ex_set) >= 0.9) {
      return {false, 0,
              "near-duplicate of " + existing.instruction_id.substr(0, 12) + " (seq " +
                  std::to_string(existing.created_seq) + ")"};
    }
  }

  inst.created_seq = next_seq_++;
  finalize_instruction_id(inst);
  index_.add_document(tokenize(doc_text(inst)));
  docs_.push_back(std::move(inst));
  return {true, docs_.back().created_seq, ""};
}

std::vector<RetrievalResult> KnowledgeBase::retrieve_top_k(const std::string& query,
                                                           size_t k) const {
  std::shared_lock lock(*mu_);
  std::vector<RetrievalResult> out;
  if (k == 0 || docs_.empty()) return out;
  auto scored = index_.match_scores(tokenize(query));
  std::stable_sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return docs_[a.first].created_seq < docs_[b.first].created_seq;
  });
  size_t take = std::min(k, scored.size());
  for (size_t i = 0; i < take; ++i) {
    const auto& d = docs_[scored[i].first];
    out.push_back({d.instruction_id, d.created_seq, scored[i].second, i + 1});
  }
  return out;
}

double KnowledgeBase::bm25_score(const std::vector<std::string>& query_terms,
                                 std::uint64_t created_seq) const {
  std::shared_lock lock(*mu_);
  for (size_t i = 0; i < docs_.size(); ++i) {
    if (docs_[i].created_seq == created_seq) return index_.score(query_terms, i);
  }
  throw UnknownDocument("no instruction with created_seq " + std::to_string(created_seq));
}

size_t KnowledgeBase::size() const {
  std::shared_lock lock(*mu_);
  return docs_.size();
}

std::vector<Instruction> KnowledgeBase::instructions() const {
  std::shared_lock lock(*mu_);
  return docs_;
}

std::optional<Instruction> KnowledgeBase::find_by_id(const std::string& instruction_id) const {
  std::shared_lock lock(*mu_);
  for (const auto& d : docs_)
    if (d.instruction_id == instruction_id) return d;
  return std::nullopt;
}

std::optional<Instruction> KnowledgeBase::find_by_seq(std::uint64_t created_seq) const {
  std::shared_lock lock(*mu_);
  for (const auto& d : docs_)
    if (d.created_seq == created_seq) return d;
  return std::nullopt;
}

double KnowledgeBase::avg_doc_length() const {
  std::shared_lock lock(*mu_);
  return index_.avg_doc_length();
}

std::map<std::string, std::vector<std::pair<size_t, int>>> KnowledgeBase::postings_snapshot()
    const {
  std::shared_lock lock(*mu_);
  return index_.postings();
}

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreWriteFailure("cannot open for write: " + path.string());
  for (const auto& inst : kb.instructions()) {
    out << instruction_to_json(inst).dump() << '\n';
    if (!out) throw StoreWriteFailure("write failed: " + path.string());
  }
}

struct KbLoader {
  static void raw_append(KnowledgeBase& kb, Instruction inst) {
    kb.index_.add_document(tokenize(doc_text(inst)));
    kb.next_seq_ = std::max(kb.next_seq_, inst.created_seq + 1);
    kb.docs_.push_back(std::move(inst));
  }
};

KbLoadResult load_kb(const std::filesystem::path& path, Bm25Params params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw StoreCorrupt("cannot open knowledge base: " + path.string());
  KbLoadResult res{KnowledgeBase(params), 0, {}};
  std::set<std::uint64_t> seen_seq;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto doc = nlohmann::json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      ++res.corrupt_lines;
      res.notes.push_back("line " + std::to_string(lineno) + ": not valid JSON");
      continue;
    }
    try {
      Instruction inst = instruction_from_json(doc);
      if (inst.created_seq == 0) throw SchemaViolation("missing created_seq");
      if (!seen_seq.insert(inst.created_seq).second)
        throw SchemaViolation("duplicate created_seq " + std::to_string(inst.created_seq));
      finalize_instruction_id(inst);
      KbLoader::raw_append(res.kb, std::move(inst));
    } catch (const Error& e) {
      ++res.corrupt_lines;
      res.notes.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return res;
}

}  // namespace drl
