#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drl/graph.hpp"
#include "drl/prompts.hpp"
#include "support/testutil.hpp"

#include <string>
#include <vector>

using namespace drl;

TEST_CASE("fill_template substitutes known markers in one pass") {
  std::map<std::string, std::string> vals = {{"a", "1"}, {"b", "{a}"}};
  CHECK(prompts::fill_template("x {a} y {b} z", vals) == "x 1 y {a} z");  // no re-scan
  CHECK(prompts::fill_template("{unknown} stays", vals) == "{unknown} stays");
  CHECK(prompts::fill_template("json {\"k\": \"v\"} braces", vals) ==
        "json {\"k\": \"v\"} braces");
  CHECK(prompts::fill_template("{a}{a}{a}", vals) == "111");
  CHECK(prompts::fill_template("dangling {", vals) == "dangling {");
}

TEST_CASE("the extraction prompt carries the case and no leftover markers") {
  auto p = prompts::extraction_prompt("Is the patient septic?", "yes", "graph-q7", "q7");
  CHECK(p.find("Is the patient septic?") != std::string::npos);
  CHECK(p.find("## ANSWER:\nyes") != std::string::npos);
  CHECK(p.find("\"artifact_id\": \"graph-q7\"") != std::string::npos);
  CHECK(p.find("\"qid\": \"q7\"") != std::string::npos);
  for (const char* residue : {"{question}", "{answer}", "{artifact_id}", "{qid}", "{{"}) {
    INFO("residue ", residue);
    CHECK(p.find(residue) == std::string::npos);
  }
  // the embedded output schema keeps its JSON structure
  CHECK(p.find("\"facts\"") != std::string::npos);
  CHECK(p.find("\"hypotheses\"") != std::string::npos);
  CHECK(p.find("\"edges\"") != std::string::npos);
  CHECK(p.find("FINAL") != std::string::npos);
  CHECK(p.find("## PHYSICIAN RATIONALE:") == std::string::npos);
}

TEST_CASE("a rationale lands in its own section after the answer") {
  auto p = prompts::extraction_prompt("Q?", "no", "graph-q8", "q8",
                                      std::optional<std::string>("because of the vitals"));
  auto section = p.find("## PHYSICIAN RATIONALE:\nbecause of the vitals");
  REQUIRE(section != std::string::npos);
  CHECK(section > p.find("## ANSWER:"));
  CHECK(section < p.find("## EXTRACTION INSTRUCTIONS:"));

  // an empty rationale is treated as absent
  auto q = prompts::extraction_prompt("Q?", "no", "graph-q8", "q8", std::optional<std::string>(""));
  CHECK(q.find("## PHYSICIAN RATIONALE:") == std::string::npos);
}

namespace {

ReasoningGraph tiny_graph(const std::string& hyp_label) {
  ReasoningGraph g;
  FactNode f;
  f.fid = "F1";
  f.label = "fever";
  f.polarity = "present";
  g.facts.push_back(f);
  HypothesisNode h;
  h.hid = "H1";
  h.label = hyp_label;
  h.confidence = "high";
  g.hypotheses.push_back(h);
  ActionNode a;
  a.aid = "A1";
  a.label = "order blood cultures";
  a.action_type = "TEST";
  a.status = "recommended";
  g.actions.push_back(a);
  EdgeRec e;
  e.eid = "E1";
  e.src = "F1";
  e.dst = "H1";
  e.type = "supports";
  g.edges.push_back(e);
  g.final.answer = "1";
  g.final.confidence = "high";
  return g;
}

}  // namespace

TEST_CASE("the judge prompt embeds both graphs and the grading arithmetic") {
  auto ref = tiny_graph("sepsis");
  auto agent = tiny_graph("dehydration");
  auto p = prompts::judge_prompt("Q text?", "yes", false, "q2", ref, agent);

  CHECK(p.find("Q text?") != std::string::npos);
  CHECK(p.find("\"sepsis\"") != std::string::npos);
  CHECK(p.find("\"dehydration\"") != std::string::npos);
  CHECK(p.find("\"order blood cultures\"") != std::string::npos);
  CHECK(p.find("AGENT ANSWER CORRECT: NO") != std::string::npos);
  CHECK(p.find("\"answer_correct\": false") != std::string::npos);
  CHECK(p.find("CORRECT ANSWER: yes") != std::string::npos);
  for (const char* residue :
       {"{question}", "{qid}", "{ref_nodes}", "{agent_nodes}", "{answer_correct_yesno}",
        "{answer_correct_json}", "{{"}) {
    INFO("residue ", residue);
    CHECK(p.find(residue) == std::string::npos);
  }
  // weighted-cost language for the three node kinds survives templating
  CHECK(p.find("1.0") != std::string::npos);
  CHECK(p.find("1.5") != std::string::npos);
  CHECK(p.find("2.0") != std::string::npos);
  // the instruction schema block keeps its braces
  CHECK(p.find("\"title\"") != std::string::npos);
  CHECK(p.find("\"error_type\"") != std::string::npos);
  CHECK(p.find("\"trigger_keywords\"") != std::string::npos);
}

TEST_CASE("the judge prompt renders the correct flag both ways") {
  auto ref = tiny_graph("sepsis");
  auto p = prompts::judge_prompt("Q?", "no", true, "q3", ref, ref);
  CHECK(p.find("AGENT ANSWER CORRECT: YES") != std::string::npos);
  CHECK(p.find("\"answer_correct\": true") != std::string::npos);
}

TEST_CASE("the note conversion prompt wraps the note verbatim") {
  auto p = prompts::note_to_qa_prompt("HPI: 62yo with fever.\nExam: unremarkable.");
  CHECK(p.find("HPI: 62yo with fever.\nExam: unremarkable.") != std::string::npos);
  CHECK(p.find("{clinical_note}") == std::string::npos);
}
