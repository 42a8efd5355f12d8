#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drl/errors.hpp"
#include "drl/inference.hpp"
#include "drl/kb.hpp"
#include "support/testutil.hpp"

#include <nlohmann/json.hpp>

#include <fstream>

using namespace drl;

namespace {

Instruction inst(const std::string& title, std::vector<std::string> keywords,
                 const std::string& qid) {
  Instruction i;
  i.title = title;
  i.error_type = "missed_fact";
  i.situation_context = "when evaluating " + title;
  i.prevention_steps = {"check " + title};
  i.trigger_keywords = std::move(keywords);
  i.source_qid = qid;
  return i;
}

struct StubProvider : Provider {
  std::string reply;
  ChatRequest last;
  size_t calls = 0;
  explicit StubProvider(std::string r) : reply(std::move(r)) {}
  ChatResponse complete(const ChatRequest& req) override {
    last = req;
    ++calls;
    return {reply, name()};
  }
  std::string name() const override { return "stub"; }
};

}  // namespace

TEST_CASE("prompts carry numbered items under the header") {
  PromptConfig cfg;
  cfg.mode = PromptMode::drl;
  std::string p = build_prompt("Admit?", {"first rule", "second rule"}, cfg);
  CHECK(p == "Question: Admit?\nGuidelines:\n1. first rule\n2. second rule");

  cfg.guideline_header = "Consider:";
  CHECK(build_prompt("Admit?", {"only rule"}, cfg) == "Question: Admit?\nConsider:\n1. only rule");
}

TEST_CASE("no retrieved items and mode none yield the same bare prompt") {
  PromptConfig drl_cfg;
  drl_cfg.mode = PromptMode::drl;
  PromptConfig none_cfg;
  none_cfg.mode = PromptMode::none;

  std::string bare = build_prompt("Admit?", {}, drl_cfg);
  CHECK(bare == "Question: Admit?");
  CHECK(bare == build_prompt("Admit?", {}, none_cfg));
  // mode none ignores items entirely
  CHECK(build_prompt("Admit?", {"ignored"}, none_cfg) == "Question: Admit?");
}

TEST_CASE("the character budget is inclusive at the boundary") {
  PromptConfig cfg;
  cfg.mode = PromptMode::none;
  cfg.char_budget = 32;
  // "Question: " is 10 chars
  std::string q22(22, 'x');
  CHECK(build_prompt(q22, {}, cfg).size() == 32);
  std::string q23(23, 'x');
  CHECK_THROWS_WITH_AS(build_prompt(q23, {}, cfg), doctest::Contains("exceeds budget 32"),
                       PromptBudgetExceeded);
}

TEST_CASE("short rendering keeps title, context, and prevention") {
  Instruction i = inst("social support", {"alone"}, "q1");
  CHECK(render_instruction(i, false) ==
        "social support\nwhen evaluating social support\nPrevention: check social support");

  i.situation_context.clear();
  CHECK(render_instruction(i, false) == "social support\nPrevention: check social support");

  i.prevention_steps = {"", ""};
  CHECK(render_instruction(i, false) == "social support");
}

TEST_CASE("full rendering emits one labeled line per populated field") {
  Instruction i;
  i.title = "T";
  i.error_type = "missed_fact";
  i.clinical_domain = "geriatrics";
  i.situation_context = "S";
  i.example_situation = "E";
  i.similar_case_patterns = {"p1", "p2"};
  i.what_went_wrong = "W";
  i.why_it_matters = "Y";
  i.potential_risks = {"r1"};
  i.prevention_steps = {"s1", "s2"};
  i.contraindications = {"c1"};
  i.trigger_keywords = {"k1", "k2"};
  i.medical_principle = "M";
  i.similar_case_examples = "X";
  CHECK(render_instruction(i, true) ==
        "Title: T\n"
        "Error type: missed_fact\n"
        "Clinical domain: geriatrics\n"
        "Situation: S\n"
        "Example: E\n"
        "Similar case patterns: p1; p2\n"
        "What went wrong: W\n"
        "Why it matters: Y\n"
        "Potential risks: r1\n"
        "Prevention: s1; s2\n"
        "Contraindications: c1\n"
        "Trigger keywords: k1; k2\n"
        "Principle: M\n"
        "Applies to: X");

  Instruction sparse;
  sparse.title = "T";
  sparse.prevention_steps = {"s"};
  CHECK(render_instruction(sparse, true) == "Title: T\nPrevention: s");
}

TEST_CASE("answer parsing prefers the last explicit tag") {
  CHECK(parse_answer("thinking... <answer>0</answer>", Task::binary) == "0");
  CHECK(parse_answer("<answer>yes</answer> wait, no: <answer>no</answer>", Task::binary) == "0");
  // tags match case-insensitively and tolerate decoration inside
  CHECK(parse_answer("conclusion <ANSWER>No</ANSWER>", Task::binary) == "0");
  CHECK(parse_answer("final: **<answer>** B.</answer>", Task::multiple_choice) == "B");
}

TEST_CASE("answer parsing falls back to the answer phrase") {
  CHECK(parse_answer("Weighing both sides. The answer is no.", Task::binary) == "0");
  CHECK(parse_answer("The answer is: **yes**, given the vitals.", Task::binary) == "1");
  CHECK(parse_answer("the answer is (C), final", Task::multiple_choice) == "C");
  // the last occurrence of the phrase wins
  CHECK(parse_answer("The answer is yes. On reflection the answer is no.", Task::binary) == "0");
}

TEST_CASE("answer parsing falls back to the last standalone token") {
  CHECK(parse_answer("arguments for yes, but overall: no", Task::binary) == "0");
  CHECK(parse_answer("risk is high so 1", Task::binary) == "1");
  CHECK(parse_answer("of the options I pick B", Task::multiple_choice) == "B");
  // an unclosed tag is ignored and the later strategies still apply
  CHECK(parse_answer("<answer>garbled... the answer is no", Task::binary) == "0");
}

TEST_CASE("a completion without any marker fails to parse") {
  CHECK_THROWS_AS(parse_answer("inconclusive rambling", Task::binary), AnswerParseFailure);
  CHECK_THROWS_AS(parse_answer("none of these options work", Task::multiple_choice),
                  AnswerParseFailure);
  CHECK_THROWS_AS(parse_answer("", Task::binary), AnswerParseFailure);
}

TEST_CASE("exemplars render as QA pairs and retrieve by question overlap") {
  ExemplarStore store;
  QaCase a;
  a.qid = "e1";
  a.question = "chest pain with troponin rise";
  a.answer = "1";
  QaCase b;
  b.qid = "e2";
  b.question = "ankle sprain after a fall";
  b.answer = "0";
  QaCase c;
  c.qid = "e3";
  c.question = "fall risk in elderly patient";
  c.answer = "1";
  store.add(a);
  store.add(b);
  store.add(c);
  REQUIRE(store.size() == 3);

  CHECK(store.render(1) == "Q: chest pain with troponin rise\nA: 1");
  CHECK(store.render(3) == "Q: fall risk in elderly patient\nA: 1");
  CHECK_THROWS_AS(store.render(0), UnknownDocument);
  CHECK_THROWS_AS(store.render(4), UnknownDocument);

  auto hits = store.retrieve("fall", 5);
  REQUIRE(hits.size() == 2);  // only overlapping exemplars are candidates
  // equal scores break by insertion order
  CHECK(hits[0].instruction_id == "e2");
  CHECK(hits[1].instruction_id == "e3");
  CHECK(hits[0].rank == 1);
  CHECK(hits[1].rank == 2);

  CHECK(store.retrieve("fall", 0).empty());
  CHECK(store.retrieve("zzzz", 5).empty());
  CHECK(store.retrieve("fall", 1).size() == 1);
}

TEST_CASE("the fixture exemplar file loads in order") {
  ExemplarStore store = load_exemplars((testutil::fixtures_dir() / "exemplars12.ndjson").string());
  REQUIRE(store.size() == 12);
  CHECK(store.render(1).rfind("Q: ", 0) == 0);
  CHECK(store.render(1).find("\nA: ") != std::string::npos);
}

TEST_CASE("retrieved instructions appear in rank order in the prompt") {
  KnowledgeBase kb;
  kb.add_instruction(inst("zeta alpha handling", {"zeta", "alpha"}, "q1"));
  kb.add_instruction(inst("zeta checks", {"zeta"}, "q2"));
  kb.add_instruction(inst("zeta review", {"zeta"}, "q3"));
  kb.add_instruction(inst("unrelated topic", {"omega"}, "q4"));

  QaCase c;
  c.qid = "t1";
  c.question = "zeta alpha presentation";
  c.answer = "1";

  PromptConfig cfg;
  cfg.mode = PromptMode::drl;
  cfg.k = 3;
  std::vector<RetrievalResult> retrieved;
  std::string p = assemble_prompt(kb, c, cfg, nullptr, &retrieved);

  REQUIRE(retrieved.size() == 3);
  // doc 1 matches both query tokens, docs 2 and 3 tie and keep insertion order
  CHECK(retrieved[0].created_seq == 1);
  CHECK(retrieved[1].created_seq == 2);
  CHECK(retrieved[2].created_seq == 3);

  std::string expected = "Question: zeta alpha presentation\nGuidelines:";
  expected += "\n1. " + render_instruction(*kb.find_by_seq(1));
  expected += "\n2. " + render_instruction(*kb.find_by_seq(2));
  expected += "\n3. " + render_instruction(*kb.find_by_seq(3));
  CHECK(p == expected);
}

TEST_CASE("k zero and mode none assemble byte-identical prompts") {
  KnowledgeBase kb;
  kb.add_instruction(inst("zeta checks", {"zeta"}, "q1"));

  QaCase c;
  c.qid = "t1";
  c.question = "zeta alpha presentation";
  c.answer = "1";

  PromptConfig k0;
  k0.mode = PromptMode::drl;
  k0.k = 0;
  PromptConfig none_cfg;
  none_cfg.mode = PromptMode::none;
  none_cfg.k = 5;

  std::vector<RetrievalResult> retrieved;
  std::string a = assemble_prompt(kb, c, k0, nullptr, &retrieved);
  CHECK(retrieved.empty());
  CHECK(a == assemble_prompt(kb, c, none_cfg, nullptr));
  CHECK(a == "Question: zeta alpha presentation");
}

TEST_CASE("options join the retrieval query only when asked") {
  KnowledgeBase kb;
  kb.add_instruction(inst("thoracotomy caution", {"thoracotomy"}, "q1"));

  QaCase c;
  c.qid = "t1";
  c.question = "best next step for this trauma patient";
  c.options = {{"A", "observation"}, {"B", "thoracotomy"}};
  c.answer = "B";

  PromptConfig cfg;
  cfg.mode = PromptMode::drl;
  cfg.k = 5;
  std::vector<RetrievalResult> retrieved;
  assemble_prompt(kb, c, cfg, nullptr, &retrieved);
  CHECK(retrieved.empty());  // question text alone has no overlap

  cfg.include_options_in_query = true;
  std::string p = assemble_prompt(kb, c, cfg, nullptr, &retrieved);
  REQUIRE(retrieved.size() == 1);
  CHECK(retrieved[0].created_seq == 1);
  // the rendered question block still lists the options either way
  CHECK(p.find("Options:\nA) observation\nB) thoracotomy") != std::string::npos);
}

TEST_CASE("icl mode demands an exemplar store") {
  KnowledgeBase kb;
  QaCase c;
  c.qid = "t1";
  c.question = "anything";
  c.answer = "1";
  PromptConfig cfg;
  cfg.mode = PromptMode::icl;
  CHECK_THROWS_AS(assemble_prompt(kb, c, cfg, nullptr), ConfigError);
}

TEST_CASE("icl mode injects rendered exemplars") {
  KnowledgeBase kb;  // ignored in icl mode
  ExemplarStore store;
  QaCase e;
  e.qid = "e1";
  e.question = "prior zeta case";
  e.answer = "0";
  store.add(e);

  QaCase c;
  c.qid = "t1";
  c.question = "new zeta case";
  c.answer = "1";
  PromptConfig cfg;
  cfg.mode = PromptMode::icl;
  cfg.k = 2;
  std::vector<RetrievalResult> retrieved;
  std::string p = assemble_prompt(kb, c, cfg, &store, &retrieved);
  REQUIRE(retrieved.size() == 1);
  CHECK(p == "Question: new zeta case\nGuidelines:\n1. Q: prior zeta case\nA: 0");
}

TEST_CASE("inference fills every prediction field") {
  KnowledgeBase kb;
  kb.add_instruction(inst("zeta checks", {"zeta"}, "q1"));
  kb.add_instruction(inst("unrelated", {"omega"}, "q2"));

  QaCase c;
  c.qid = "t9";
  c.question = "zeta workup needed";
  c.answer = "0";

  StubProvider prov("Given the zeta findings, the answer is yes. <answer>no</answer>");
  PromptConfig cfg;
  cfg.mode = PromptMode::drl;
  cfg.k = 3;
  std::string prompt;
  Prediction pred = infer(prov, kb, c, cfg, nullptr, &prompt);

  CHECK(prov.calls == 1);
  CHECK(prov.last.user == prompt);
  CHECK(prov.last.tag == Tag::agent);
  CHECK(pred.qid == "t9");
  CHECK(pred.answer == "0");  // the tag outranks the phrase
  CHECK(pred.cot == prov.reply);
  REQUIRE(pred.retrieved.size() == 1);
  CHECK(pred.retrieved[0].instruction_id == kb.find_by_seq(1)->instruction_id);
  CHECK(pred.k_used == 1);
  CHECK(pred.prompt_chars == prompt.size());
}

TEST_CASE("prediction files hold one record per line") {
  Prediction a;
  a.qid = "t1";
  a.answer = "1";
  a.cot = "not persisted";
  RetrievalResult r;
  r.instruction_id = "abc123";
  r.created_seq = 1;
  r.score = 2.0;
  r.rank = 1;
  a.retrieved = {r};
  a.prompt_chars = 40;
  a.k_used = 1;
  Prediction b;
  b.qid = "t2";
  b.answer = "B";
  b.prompt_chars = 17;

  testutil::TempDir tmp;
  write_predictions({a, b}, tmp.path("preds.ndjson"));

  std::ifstream in(tmp.path("preds.ndjson"));
  std::string line;
  REQUIRE(std::getline(in, line));
  nlohmann::json ja = nlohmann::json::parse(line);
  CHECK(ja["qid"] == "t1");
  CHECK(ja["answer"] == "1");
  CHECK(ja["k_used"] == 1);
  CHECK(ja["retrieved"] == nlohmann::json::array({"abc123"}));
  CHECK(ja["prompt_chars"] == 40);
  CHECK_FALSE(ja.contains("cot"));

  REQUIRE(std::getline(in, line));
  nlohmann::json jb = nlohmann::json::parse(line);
  CHECK(jb["qid"] == "t2");
  CHECK(jb["k_used"] == 0);
  CHECK(jb["retrieved"].empty());
  CHECK_FALSE(std::getline(in, line));
}
