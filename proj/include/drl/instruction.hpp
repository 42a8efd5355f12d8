#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace drl {

inline const std::vector<std::string> kErrorTypes = {
    "diagnosis_error", "treatment_error", "reasoning_error", "missed_fact"};

bool valid_error_type(const std::string& s);

struct Instruction {
  std::string instruction_id;  // hex digest over doc_text + source_qid
  std::string title;
  std::string error_type;
  std::string clinical_domain;
  std::string situation_context;
  std::string example_situation;
  std::vector<std::string> similar_case_patterns;
  std::string what_went_wrong;
  std::string why_it_matters;
  std::vector<std::string> potential_risks;
  std::vector<std::string> prevention_steps;
  std::vector<std::string> contraindications;
  std::vector<std::string> trigger_keywords;
  std::string medical_principle;
  std::string similar_case_examples;
  std::string source_qid;
  std::uint64_t created_seq = 0;  // assigned by the knowledge base
};

// Indexed text: title, clinical_domain, situation_context, example_situation,
// similar_case_patterns, what_went_wrong, prevention_steps, trigger_keywords,
// medical_principle, similar_case_examples, in that order, space-joined, empties
// skipped. potential_risks / contraindications / why_it_matters stay out by default.
std::string doc_text(const Instruction& inst, bool include_consequence_fields = false);

// Fills instruction_id when empty.
void finalize_instruction_id(Instruction& inst);

// Token basis for near-duplicate detection: title + trigger keywords.
std::vector<std::string> dedup_tokens(const Instruction& inst);

nlohmann::json instruction_to_json(const Instruction& inst);

// Throws SchemaViolation on missing title / bad error_type / wrong field types.
Instruction instruction_from_json(const nlohmann::json& o);

}  // namespace drl
