#pragma once

#include "drl/bm25.hpp"
#include "drl/instruction.hpp"

#include <filesystem>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace drl {

struct RetrievalResult {
  std::string instruction_id;
  std::uint64_t created_seq;
  double score;
  size_t rank;  // 1-based, contiguous
};

struct AddOutcome {
  bool added;
  std::uint64_t created_seq;  // valid when added
  std::string note;           // dedup reason when skipped
};

// Ordered instruction store + incremental BM25 index over doc_text.
// add/save must be externally serialized; queries are safe concurrently and always
// observe a complete pre- or post-add index.
class KnowledgeBase {
 public:
  explicit KnowledgeBase(Bm25Params params = {});

  // Assigns the next created_seq, computes instruction_id when missing.
  // Skips near-duplicates: Jaccard over title+trigger_keywords tokens >= 0.9.
  AddOutcome add_instruction(Instruction inst);

  std::vector<RetrievalResult> retrieve_top_k(const std::string& query, size_t k) const;
  double bm25_score(const std::vector<std::string>& query_terms, std::uint64_t created_seq) const;

  size_t size() const;
  std::vector<Instruction> instructions() const;
  std::optional<Instruction> find_by_id(const std::string& instruction_id) const;
  std::optional<Instruction> find_by_seq(std::uint64_t created_seq) const;
  double avg_doc_length() const;
  Bm25Params params() const { return params_; }

  // snapshot of term -> (doc position, tf); for consistency tests
  std::map<std::string, std::vector<std::pair<size_t, int>>> postings_snapshot() const;

 private:
  Bm25Params params_;
  std::unique_ptr<std::shared_mutex> mu_;
  std::vector<Instruction> docs_;
  Bm25Index index_;
  std::uint64_t next_seq_ = 1;

  friend struct KbLoader;
};

void save_kb(const KnowledgeBase& kb, const std::filesystem::path& path);

struct KbLoadResult {
  KnowledgeBase kb;
  size_t corrupt_lines = 0;
  std::vector<std::string> notes;  // "line N: reason" for each corrupt line
};

// Newline-delimited records; corrupt lines are skipped and counted, valid lines load.
// Throws StoreCorrupt when the file cannot be opened.
KbLoadResult load_kb(const std::filesystem::path& path, Bm25Params params = {});

}  // namespace drl
