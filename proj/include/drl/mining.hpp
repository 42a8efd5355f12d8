#pragma once

#include "drl/dataset.hpp"
#include "drl/discrepancy.hpp"
#include "drl/inference.hpp"
#include "drl/kb.hpp"
#include "drl/provider.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace drl {

enum class AnalysisMode { deterministic, judge };
enum class InsightMode { deterministic, llm };

struct MiningOptions {
  bool use_rationale = true;
  AnalysisMode analysis = AnalysisMode::deterministic;
  InsightMode insight = InsightMode::deterministic;
  WeightConfig weights;
  PromptConfig prompt;  // agent_solve runs with these settings and no guidelines
  int jobs = 1;
  int max_output = 4096;
  double agent_temperature = 0.0;
};

// Fills the extraction template (rationale section included when given), sends with
// the extract tag, parses. Any parse failure triggers one retry with an appended
// repair note; a second failure raises ExtractionFailure.
ReasoningGraph extract_graph(Provider& prov, const QaCase& c, const std::string& answer_for_graph,
                             const std::optional<std::string>& rationale, int max_output = 4096);

// Builds the inference prompt with the given guidelines (rank order preserved),
// completes with the agent tag, returns (normalized answer, full completion).
std::pair<std::string, std::string> agent_solve(Provider& prov, const QaCase& c,
                                                const std::vector<Instruction>& guidelines,
                                                const PromptConfig& cfg,
                                                double temperature = 0.0, int max_output = 4096);

// match_nodes + compute_discrepancy + sanity_check with the lexical matcher.
DiscrepancyReport analyze_case_deterministic(const ReasoningGraph& ref,
                                             const ReasoningGraph& agent, bool answer_correct,
                                             const WeightConfig& cfg);

struct JudgeAnalysis {
  DiscrepancyReport report;
  std::vector<Instruction> instructions;  // validated improvement_instructions entries
  std::vector<std::string> notices;       // dropped-entry and correction notes
};

// Issues the judged-evaluation prompt and parses its output object. The total is
// recomputed from the three parsed penalties; a mismatch beyond 1e-6 is replaced by
// the sum and flagged "judge-formula-corrected". Throws JudgeParseFailure.
JudgeAnalysis analyze_case_judge(Provider& prov, const QaCase& c, const ReasoningGraph& ref,
                                 const ReasoningGraph& agent, bool answer_correct,
                                 int max_output = 4096);

// One instruction per discrepancy category present: missed_fact for missing facts,
// diagnosis_error for missing hypotheses, treatment_error for missing or hallucinated
// actions, reasoning_error for edge diffs and hallucinated facts/hypotheses.
// Trigger keywords are the affected node label tokens.
std::vector<Instruction> generate_insight_deterministic(const DiscrepancyReport& report,
                                                        const ReasoningGraph& ref,
                                                        const ReasoningGraph& agent,
                                                        const QaCase& c);

// Issues the judged-evaluation prompt with the insight tag and keeps only the
// schema-valid improvement_instructions entries; invalid ones are dropped with a
// notice. Throws InsightParseFailure when the array cannot be located at all.
std::vector<Instruction> generate_insight_llm(Provider& prov, const QaCase& c,
                                              const ReasoningGraph& ref,
                                              const ReasoningGraph& agent, bool answer_correct,
                                              std::vector<std::string>* notices,
                                              int max_output = 4096);

struct MiningRecord {
  std::string qid;
  std::optional<ReasoningGraph> ref_graph;
  std::optional<ReasoningGraph> agent_graph;
  std::string agent_answer;  // normalized
  std::string agent_cot;
  bool answer_correct = false;
  std::optional<DiscrepancyReport> report;
  std::vector<Instruction> candidates;        // produced before KB dedup
  std::vector<std::string> instructions_added;  // ids actually stored
  bool skipped = false;
  std::string skip_reason;
  std::vector<std::string> notices;
};

struct MiningResult {
  std::vector<MiningRecord> records;  // dataset order
  size_t instructions_added = 0;
  size_t cases_skipped = 0;
};

// Stage 1 over a dataset: per case, extract the reference graph (rationale included
// iff opts.use_rationale and present), solve with empty guidelines, extract the agent
// graph from the chain-of-thought, analyze, and add instructions iff the report is
// nonempty. Case failures are recorded as skipped; the run continues. Graph and
// analysis work fans out across opts.jobs threads; KB insertion is a serial fold in
// dataset order.
MiningResult mine_dataset(Provider& prov, const std::vector<QaCase>& dataset, KnowledgeBase& kb,
                          const MiningOptions& opts);

// One line per record: qid, answer_correct, penalties, added ids, skip state.
void write_mining_records(const std::vector<MiningRecord>& records,
                          const std::filesystem::path& path);

}  // namespace drl
