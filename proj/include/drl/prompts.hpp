#pragma once

#include "drl/graph.hpp"

#include <map>
#include <optional>
#include <string>

namespace drl {
namespace prompts {

// Single-pass {name} substitution; inserted values are never re-scanned, unknown
// markers pass through untouched.
std::string fill_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& values);

// Graph-extraction prompt for a QA pair. When a physician rationale is supplied it is
// inserted as a "## PHYSICIAN RATIONALE:" section immediately after the answer block.
std::string extraction_prompt(const std::string& question, const std::string& answer,
                              const std::string& artifact_id, const std::string& qid,
                              const std::optional<std::string>& rationale = std::nullopt);

// Judged-evaluation prompt: GED scoring rules plus improvement-instruction generation.
std::string judge_prompt(const std::string& question, const std::string& answer,
                         bool answer_correct, const std::string& qid,
                         const ReasoningGraph& ref, const ReasoningGraph& agent);

// Clinical-note to QA-pair conversion prompt.
std::string note_to_qa_prompt(const std::string& clinical_note);

}  // namespace prompts
}  // namespace drl
