#include "drl/instruction.hpp"

#include "drl/digest.hpp"
#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <algorithm>

using nlohmann::json;

namespace drl {

bool valid_error_type(const std::string& s) {
  return std::find(kErrorTypes.begin(), kErrorTypes.end(), s) != kErrorTypes.end();
}

std::string doc_text(const Instruction& inst, bool include_consequence_fields) {
  std::vector<std::string> parts;
  auto push = [&](const std::string& s) {
    if (!s.empty()) parts.push_back(s);
  };
  push(inst.title);
  push(inst.clinical_domain);
  push(inst.situation_context);
  push(inst.example_situation);
  for (const auto& s : inst.similar_case_patterns) push(s);
  push(inst.what_went_wrong);
  if (include_consequence_fields) {
    push(inst.why_it_matters);
    for (const auto& s : inst.potential_risks) push(s);
  }
  for (const auto& s : inst.prevention_steps) push(s);
  if (include_consequence_fields) {
    for (const auto& s : inst.contraindications) push(s);
  }
  for (const auto& s : inst.trigger_keywords) push(s);
  push(inst.medical_principle);
  push(inst.similar_case_examples);
  return join(parts, " ");
}

void finalize_instruction_id(Instruction& inst) {
  if (inst.instruction_id.empty()) {
    inst.instruction_id = sha256_hex(doc_text(inst) + '\x1e' + inst.source_qid);
  }
}

std::vector<std::string> dedup_tokens(const Instruction& inst) {
  return tokenize(inst.title + " " + join(inst.trigger_keywords, " "));
}

json instruction_to_json(const Instruction& i) {
  return json{
      {"instruction_id", i.instruction_id},
      {"title", i.title},
      {"error_type", i.error_type},
      {"clinical_domain", i.clinical_domain},
      {"situation_context", i.situation_context},
      {"example_situation", i.example_situation},
      {"similar_case_patterns", i.similar_case_patterns},
      {"what_went_wrong", i.what_went_wrong},
      {"why_it_matters", i.why_it_matters},
      {"potential_risks", i.potential_risks},
      {"prevention_steps", i.prevention_steps},
      {"contraindications", i.contraindications},
      {"trigger_keywords", i.trigger_keywords},
      {"medical_principle", i.medical_principle},
      {"similar_case_examples", i.similar_case_examples},
      {"source_qid", i.source_qid},
      {"created_seq", i.created_seq},
  };
}

namespace {

std::string get_str(const json& o, const char* key) {
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return "";
  if (!it->is_string()) throw SchemaViolation(std::string("instruction field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::vector<std::string> get_list(const json& o, const char* key) {
  std::vector<std::string> out;
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return out;
  if (it->is_string()) {  // tolerate scalar where a list belongs
    out.push_back(it->get<std::string>());
    return out;
  }
  if (!it->is_array()) throw SchemaViolation(std::string("instruction field '") + key + "' must be a list");
  for (const auto& e : *it) {
    if (e.is_string()) out.push_back(e.get<std::string>());
    else out.push_back(e.dump());
  }
  return out;
}

}  // namespace

Instruction instruction_from_json(const json& o) {
  if (!o.is_object()) throw SchemaViolation("instruction must be a JSON object");
  Instruction i;
  i.instruction_id = get_str(o, "instruction_id");
  i.title = get_str(o, "title");
  if (i.title.empty()) throw SchemaViolation("instruction title must be non-empty");
  i.error_type = get_str(o, "error_type");
  if (!valid_error_type(i.error_type))
    throw SchemaViolation("invalid error_type '" + i.error_type + "'");
  i.clinical_domain = get_str(o, "clinical_domain");
  i.situation_context = get_str(o, "situation_context");
  i.example_situation = get_str(o, "example_situation");
  i.similar_case_patterns = get_list(o, "similar_case_patterns");
  i.what_went_wrong = get_str(o, "what_went_wrong");
  i.why_it_matters = get_str(o, "why_it_matters");
  i.potential_risks = get_list(o, "potential_risks");
  i.prevention_steps = get_list(o, "prevention_steps");
  i.contraindications = get_list(o, "contraindications");
  i.trigger_keywords = get_list(o, "trigger_keywords");
  i.medical_principle = get_str(o, "medical_principle");
  i.similar_case_examples = get_str(o, "similar_case_examples");
  i.source_qid = get_str(o, "source_qid");
  if (auto it = o.find("created_seq"); it != o.end() && it->is_number_unsigned()) {
    i.created_seq = it->get<std::uint64_t>();
  }
  return i;
}

}  // namespace drl
