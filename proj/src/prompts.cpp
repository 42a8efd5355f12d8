#include "drl/prompts.hpp"

#include <nlohmann/json.hpp>

namespace drl {
namespace prompts {

namespace {

const std::string kExtractionTemplate = R"(
You are a medical AI expert. You will be give a question generated from clinical note, and corresponding answer.
Extract the reasoning graph from this question-answer pair.

## QUESTION generated from CLINICAL NOTE:
{question}
## ANSWER:
{answer}

## EXTRACTION INSTRUCTIONS:

1. **FACTS (F1, F2, ...)**: Extract observable clinical findings:
   - Vital signs, lab values, physical exam findings
   - Patient demographics, medical history
   - Symptoms reported, medications listed
   - Use "present", "absent", or "uncertain" for polarity
   - Include verbatim quote from the note as support

2. **HYPOTHESES (H1, H2, ...)**: Extract diagnoses or clinical conditions:
   - Primary and secondary diagnoses mentioned
   - Suspected or ruled-out conditions
   - Problem list items that represent clinical reasoning
   - Confidence based on how definitively stated in the note

3. **ACTIONS (A1, A2, ...)**: Extract clinical actions documented:
   - Medications prescribed (PRESCRIBE)
   - Tests ordered (TEST)
   - Treatments given (TREAT)
   - Assessments performed (ASSESS)
   - Monitoring plans (OBSERVE)

4. **FINAL**: The final answer of the question, which is given

5. **EDGES (E1, E2, ...)**: Infer connections between nodes:
   - Fact → Hypothesis: What findings support which diagnoses?
   - Hypothesis → Action: What conditions led to which treatments?
   - Fact → Action: Direct fact-to-action relationships
   - Action → Hypothesis: What actions suggest which diagnoses?
   - Fact or Hypothesis or Action → FINAL: What overall conclusion is supported?
   - Use "supports", "contradicts", or "suggests_test" as edge types
   - For each edge, there should be only one source and one destination


## OUTPUT SCHEMA:
{
  "artifact_id": "{artifact_id}",
  "qid": "{qid}",
  "guideline_bundle_id": "extracted",
  "facts": [
    {
      "fid": "F1",
      "label": "finding description",
      "value": "specific value or null",
      "polarity": "present|absent|uncertain",
      "support": [{"source": "case", "ref": null, "quote": "verbatim from note"}]
    }
  ],
  "hypotheses": [
    {
      "hid": "H1",
      "label": "diagnosis or condition",
      "confidence": "high|medium|low|uncertain",
      "support": [{"source": "case", "ref": "F1", "quote": "supporting text"}]
    }
  ],
  "actions": [
    {
      "aid": "A1",
      "label": "action description",
      "action_type": "TEST|TREAT|ASSESS|OBSERVE|PRESCRIBE",
      "status": "recommended|contraindicated|optional|not_specified",
      "support": [{"source": "case", "ref": null, "quote": "from note"}]
    }
  ],
  "edges": [
    {
      "eid": "E1",
      "src": "F1",
      "dst": "H1",
      "type": "supports|contradicts|suggests_test",
      "justification": "why this connection exists based on the note",
      "guideline_support": null
    }
  ],
  "final": {
    "answer": "{answer}",
    "answer_text": "reasoning behind the answer",
    "confidence": "high|medium|low|uncertain",
    "uncertainties": ["list of unclear aspects"]
  }
}

Return ONLY the JSON object.
)";

const std::string kJudgeTemplate = R"(You are a medical expert evaluating an agent's reasoning quality using Graph Edit Distance (GED).

QUESTION: {question}
CORRECT ANSWER: {answer}
AGENT ANSWER CORRECT: {answer_correct_yesno}

REFERENCE GRAPH (G_REF):
Facts: {g_ref_facts}
Hypotheses: {g_ref_hyps}
Actions: {g_ref_actions}

AGENT GRAPH (G_AGENT):
Facts: {g_agent_facts}
Hypotheses: {g_agent_hyps}
Actions: {g_agent_actions}

---

STEP 1: CALCULATE GED SCORE

Evaluate GED between G_REF and G_AGENT using these rules:

1. SEMANTIC NODE MATCHING: Match by meaning, not exact text
2. CONTEXT-BASED REASONABLENESS: Accept facts from question context
3. NODE IMPORTANCE: Facts=1.0x, Hypotheses=1.5x, Actions=2.0x
4. ANSWER IMPACT:
   - Correct + correct path: GED 0.1-0.3
   - Correct + wrong path: GED 0.6-0.8
   - Wrong: GED > 0.8
5. REASONING PATH QUALITY: Check edge connectivity

IMPORTANT CALCULATION FORMULA:
- Calculate three penalty components (each between 0.0-1.0):
  * node_mismatch_penalty: Penalty for missing or mismatched nodes
  * hallucination_penalty: Penalty for hallucinated (extra) nodes
  * reasoning_path_penalty: Penalty for incorrect reasoning path structure
- Calculate total_ged_score EXACTLY as:
  total_ged_score = node_mismatch_penalty + hallucination_penalty + reasoning_path_penalty
- The total_ged_score can exceed 1.0 if the sum of penalties is greater than 1.0

---

STEP 2: GENERATE ENHANCED IMPROVEMENT INSTRUCTIONS

Generate improvement instructions that could be used in a future prompt
when the agent encounters similar medical questions. These instructions should help
the agent avoid the same mistakes and reason more effectively.

Each instruction should include:

{
  "title": "Brief error title",
  "error_type": "diagnosis_error|treatment_error|reasoning_error|missed_fact",
  "clinical_domain": "<domain>",

  "situation_context": "This instruction applies when: [clinical scenario where error occurred]",
  "example_situation": "For example: [specific example from this case]",

  "similar_case_patterns": [
    "Pattern 1: [how to recognize similar cases]",
    "Pattern 2: [clinical signs to watch for]",
    "Pattern 3: [key indicators]"
  ],

  "what_went_wrong": "[Specific mistake made]",
  "why_it_matters": "[Clinical consequences and impact]",

  "potential_risks": [
    "Risk 1: [specific bad outcome if error repeated]",
    "Risk 2: [patient safety impact]",
    "Risk 3: [clinical consequences]"
  ],

  "prevention_steps": [
    "Step 1: [concrete action]",
    "Step 2: [concrete action]",
    "Step 3: [concrete action]"
  ],

  "contraindications": [
    "DO NOT: [specific thing to avoid]",
    "NEVER: [explicit warning]",
    "AVOID: [specific practice]"
  ],

  "trigger_keywords": ["keyword1", "keyword2"],
  "medical_principle": "[Clinical foundation]",
  "similar_case_examples": "[When this guidance applies]"
}

Important: Include practical, actionable guidance that prevents the EXACT error that occurred.

---

CRITICAL: When calculating total_ged_score, you MUST:
1. First calculate node_mismatch_penalty, hallucination_penalty, and reasoning_path_penalty (each 0.0-1.0)
2. Then calculate: total_ged_score = node_mismatch_penalty + hallucination_penalty + reasoning_path_penalty
3. Do NOT use any other formula or normalization - use the exact sum of the three penalties

---

OUTPUT FORMAT:

Return ONLY valid JSON with these fields:

{
  "qid": "{qid}",
  "answer_correct": {answer_correct_json},

  "node_matching": {
    "matched_facts": <number>,
    "matched_hypotheses": <number>,
    "matched_actions": <number>,
    "hallucinated_nodes": <list or empty>,
    "hallucination_severity": "none|minor|moderate|severe"
  },

  "graph_structure": {
    "reasoning_path_correct": <boolean>,
    "missing_edges": <list>,
    "extra_edges": <list or empty>
  },

  "ged_calculation": {
    "node_mismatch_penalty": <0.0-1.0>,
    "hallucination_penalty": <0.0-1.0>,
    "reasoning_path_penalty": <0.0-1.0>,
    "total_ged_score": <EXACTLY: node_mismatch_penalty + hallucination_penalty + reasoning_path_penalty>,
    "explanation": "<brief explanation>"
  },

  "assessment": {
    "overall": "Excellent|Good|Fair|Poor|Very Poor",
    "strengths": <list of 1-2 strengths>,
    "weaknesses": <list of 1-2 weaknesses>
  },

  "improvement_instructions": [
    {
      "title": "Brief title",
      "error_type": "diagnosis_error|treatment_error|reasoning_error|missed_fact",
      "clinical_domain": "<domain>",
      "situation_context": "This instruction applies when: ...",
      "example_situation": "For example: ...",
      "similar_case_patterns": ["Pattern 1: ...", "Pattern 2: ..."],
      "what_went_wrong": "...",
      "why_it_matters": "...",
      "potential_risks": ["Risk 1: ...", "Risk 2: ...", "Risk 3: ..."],
      "prevention_steps": ["Step 1: ...", "Step 2: ...", "Step 3: ..."],
      "contraindications": ["DO NOT: ...", "NEVER: ...", "AVOID: ..."],
      "trigger_keywords": ["keyword1", "keyword2"],
      "medical_principle": "...",
      "similar_case_examples": "..."
    }
  ]
}

Return ONLY JSON, no other text.)";

const std::string kNoteToQaTemplate = R"(
You are a clinician-grade medical language model. Your task is to transform emergency department (ED) clinical notes into a single, comprehensive clinical question suitable for clinical prognosis and reasoning.
You are given an emergency department clinical note composed of the following sections:
- Chief Complaint
- Patient History
- Review of Systems
- Physical Exam
- Medical Decision Making
- Assessment and Plan
Rewrite the note as one self-contained clinical question that could be posed to a clinical decision-support system or clinician at the time of ED discharge. The clinical question is concerned with whether this patient will return to ED and get admitted to inpatient within 9 days after the discharge of the index ED visit. The answer should be yes or no.
Constraints:
1. Do not omit any clinical facts, findings, symptoms, comorbidities, diagnostics, treatments, or disposition details.
2. Do not introduce new information or reinterpret findings.
3. Preserve uncertainty, negations, and clinician reasoning exactly as stated.
4. Use medically precise language.
5. Do not answer the question.
6. Do not include probabilities, risk estimates, or predictions.
7. Remove all names of patients and physicians and all other identifying information.
Output format:
1. A single paragraph written as a clinical question beginning with:“Given the following emergency department presentation and evaluation…”
2. The question must end with: “Will this patient return to ED and get admitted to inpatient within 9 days after the discharge of the index ED visit”

Clinical Note:
{clinical_note}
)";

std::string node_list_json(const ReasoningGraph& g, NodeKind kind) {
  nlohmann::json arr = nlohmann::json::array();
  switch (kind) {
    case NodeKind::fact:
      for (const auto& n : g.facts)
        arr.push_back({{"fid", n.fid}, {"label", n.label}, {"polarity", n.polarity}});
      break;
    case NodeKind::hypothesis:
      for (const auto& n : g.hypotheses)
        arr.push_back({{"hid", n.hid}, {"label", n.label}, {"confidence", n.confidence}});
      break;
    case NodeKind::action:
      for (const auto& n : g.actions)
        arr.push_back({{"aid", n.aid},
                       {"label", n.label},
                       {"action_type", n.action_type},
                       {"status", n.status}});
      break;
  }
  return arr.dump();
}

}  // namespace

std::string fill_template(const std::string& tmpl,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      size_t close = tmpl.find('}', i + 1);
      if (close != std::string::npos) {
        auto it = values.find(tmpl.substr(i + 1, close - i - 1));
        if (it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(tmpl[i++]);
  }
  return out;
}

std::string extraction_prompt(const std::string& question, const std::string& answer,
                              const std::string& artifact_id, const std::string& qid,
                              const std::optional<std::string>& rationale) {
  std::string tmpl = kExtractionTemplate;
  std::map<std::string, std::string> values = {
      {"question", question}, {"answer", answer}, {"artifact_id", artifact_id}, {"qid", qid}};
  if (rationale && !rationale->empty()) {
    static const std::string anchor = "\n\n## EXTRACTION INSTRUCTIONS:";
    size_t pos = tmpl.find(anchor);
    tmpl.insert(pos, "\n## PHYSICIAN RATIONALE:\n{rationale}");
    values.emplace("rationale", *rationale);
  }
  return fill_template(tmpl, values);
}

std::string judge_prompt(const std::string& question, const std::string& answer,
                         bool answer_correct, const std::string& qid, const ReasoningGraph& ref,
                         const ReasoningGraph& agent) {
  return fill_template(
      kJudgeTemplate,
      {
          {"question", question},
          {"answer", answer},
          {"answer_correct_yesno", answer_correct ? "YES" : "NO"},
          {"answer_correct_json", answer_correct ? "true" : "false"},
          {"qid", qid},
          {"g_ref_facts", node_list_json(ref, NodeKind::fact)},
          {"g_ref_hyps", node_list_json(ref, NodeKind::hypothesis)},
          {"g_ref_actions", node_list_json(ref, NodeKind::action)},
          {"g_agent_facts", node_list_json(agent, NodeKind::fact)},
          {"g_agent_hyps", node_list_json(agent, NodeKind::hypothesis)},
          {"g_agent_actions", node_list_json(agent, NodeKind::action)},
      });
}

std::string note_to_qa_prompt(const std::string& clinical_note) {
  return fill_template(kNoteToQaTemplate, {{"clinical_note", clinical_note}});
}

}  // namespace prompts
}  // namespace drl
