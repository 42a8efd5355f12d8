#pragma once

#include "drl/dataset.hpp"
#include "drl/kb.hpp"
#include "drl/provider.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace drl {

enum class PromptMode { drl, icl, none };

PromptMode prompt_mode_from(const std::string& name);  // throws ConfigError
const char* prompt_mode_name(PromptMode m);

struct PromptConfig {
  size_t k = 5;
  PromptMode mode = PromptMode::drl;
  size_t char_budget = 24000;  // crude token proxy; overflow raises PromptBudgetExceeded
  std::string guideline_header = "Guidelines:";
  bool render_full = false;  // inject full instruction records instead of the short form
  bool include_options_in_query = false;
};

// "Question: <q>" alone, or followed by the guideline header and "1."-numbered items
// in rank order. Throws PromptBudgetExceeded when the result exceeds cfg.char_budget.
std::string build_prompt(const std::string& question, const std::vector<std::string>& items,
                         const PromptConfig& cfg);

// Short form: title, situation_context, "Prevention: " + "; "-joined steps (empties
// skipped). Full form: every populated field, one per line.
std::string render_instruction(const Instruction& inst, bool full = false);

// Strategies in order: last <answer>X</answer> tag, last "The answer is X" phrase,
// last standalone yes/no/0/1 token (binary) or option letter (multiple choice).
// Output is normalized via normalize_answer. Throws AnswerParseFailure.
std::string parse_answer(const std::string& cot, Task task);

// BM25 index over exemplar question text; retrieval mirrors the instruction KB
// (nonzero overlap only, score desc, insertion order on ties).
class ExemplarStore {
 public:
  explicit ExemplarStore(Bm25Params params = {});
  void add(const QaCase& c);
  size_t size() const { return cases_.size(); }
  std::vector<RetrievalResult> retrieve(const std::string& query, size_t k) const;
  // "Q: <question>\nA: <answer>"; seq is 1-based insertion order.
  std::string render(std::uint64_t seq) const;

 private:
  Bm25Params params_;
  std::vector<QaCase> cases_;
  Bm25Index index_;
};

ExemplarStore load_exemplars(const std::string& path, Bm25Params params = {});

struct Prediction {
  std::string qid;
  std::string answer;  // normalized
  std::string cot;
  std::vector<RetrievalResult> retrieved;
  size_t prompt_chars = 0;
  size_t k_used = 0;
};

// Retrieve (per cfg.mode), assemble the prompt, complete with the agent tag, parse.
// exemplars is required for icl mode. Throws ProviderFailure, PromptBudgetExceeded,
// AnswerParseFailure, ConfigError.
Prediction infer(Provider& prov, const KnowledgeBase& kb, const QaCase& c,
                 const PromptConfig& cfg, const ExemplarStore* exemplars = nullptr,
                 std::string* prompt_out = nullptr);

// The exact prompt infer would send, without calling the provider.
std::string assemble_prompt(const KnowledgeBase& kb, const QaCase& c, const PromptConfig& cfg,
                            const ExemplarStore* exemplars,
                            std::vector<RetrievalResult>* retrieved_out = nullptr);

// One record per line: qid, answer, k_used, retrieved ids, prompt_chars.
void write_predictions(const std::vector<Prediction>& preds, const std::filesystem::path& path);

}  // namespace drl
