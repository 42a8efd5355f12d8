#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "drl/digest.hpp"
#include "drl/errors.hpp"
#include "drl/instruction.hpp"
#include "drl/kb.hpp"
#include "drl/text.hpp"
#include "support/naive_bm25.hpp"
#include "support/testutil.hpp"

#include <atomic>
#include <cmath>
#include <thread>

using namespace drl;

namespace {

Instruction inst_titled(const std::string& title, const std::string& qid = "q0") {
  Instruction i;
  i.title = title;
  i.error_type = "missed_fact";
  i.source_qid = qid;
  return i;
}

Instruction full_instruction() {
  Instruction i;
  i.title = "Missed finding: tachycardia";
  i.error_type = "missed_fact";
  i.clinical_domain = "emergency medicine";
  i.situation_context = "applies when vitals are abnormal";
  i.example_situation = "case q2 involved tachycardia";
  i.similar_case_patterns = {"pattern one", "pattern two"};
  i.what_went_wrong = "a corroborating vital sign was ignored";
  i.why_it_matters = "sepsis can be missed";
  i.potential_risks = {"delayed treatment"};
  i.prevention_steps = {"verify the vital signs", "re-check the chain"};
  i.contraindications = {"DO NOT conclude early"};
  i.trigger_keywords = {"tachycardia", "fever"};
  i.medical_principle = "complete evidence review";
  i.similar_case_examples = "resembles q2";
  i.source_qid = "q2";
  return i;
}

}  // namespace

TEST_CASE("indexed text keeps its field order and skips consequence fields") {
  auto i = full_instruction();
  CHECK(doc_text(i) ==
        "Missed finding: tachycardia emergency medicine applies when vitals are abnormal "
        "case q2 involved tachycardia pattern one pattern two "
        "a corroborating vital sign was ignored verify the vital signs re-check the chain "
        "tachycardia fever complete evidence review resembles q2");
  // consequence fields slot in after what_went_wrong and after prevention_steps
  CHECK(doc_text(i, true) ==
        "Missed finding: tachycardia emergency medicine applies when vitals are abnormal "
        "case q2 involved tachycardia pattern one pattern two "
        "a corroborating vital sign was ignored sepsis can be missed delayed treatment "
        "verify the vital signs re-check the chain DO NOT conclude early "
        "tachycardia fever complete evidence review resembles q2");

  Instruction sparse = inst_titled("Only a title");
  CHECK(doc_text(sparse) == "Only a title");
}

TEST_CASE("the instruction id is a digest over indexed text and source case") {
  auto i = full_instruction();
  finalize_instruction_id(i);
  CHECK(i.instruction_id == sha256_hex(doc_text(i) + '\x1e' + i.source_qid));

  // same content from a different source case gets a different id
  auto j = full_instruction();
  j.source_qid = "q9";
  finalize_instruction_id(j);
  CHECK(j.instruction_id != i.instruction_id);

  // a preset id is left alone
  Instruction k = full_instruction();
  k.instruction_id = "fixed";
  finalize_instruction_id(k);
  CHECK(k.instruction_id == "fixed");
}

TEST_CASE("near duplicates are skipped at the 0.9 boundary") {
  KnowledgeBase kb;
  auto first = inst_titled("w1 w2 w3 w4 w5 w6 w7 w8 w9 w10");
  REQUIRE(kb.add_instruction(first).added);

  // 9 of 10 tokens: jaccard 9/10 = 0.9, inclusive -> skipped
  auto at_boundary = inst_titled("w1 w2 w3 w4 w5 w6 w7 w8 w9");
  auto out = kb.add_instruction(at_boundary);
  CHECK_FALSE(out.added);
  CHECK(out.note.find("near-duplicate") != std::string::npos);
  CHECK(out.note.find("seq 1") != std::string::npos);

  // 9 shared, 2 extra: 9/11 < 0.9 -> added
  auto below = inst_titled("w1 w2 w3 w4 w5 w6 w7 w8 w9 x1 x2");
  CHECK(kb.add_instruction(below).added);
  CHECK(kb.size() == 2);

  // trigger keywords participate in the dedup basis
  auto kw = inst_titled("w1 w2 w3 w4 w5 w6 w7 w8 w9");
  kw.trigger_keywords = {"y1", "y2", "y3", "y4", "y5"};
  CHECK(kb.add_instruction(kw).added);
}

TEST_CASE("sequence numbers start at one and follow insertion order") {
  KnowledgeBase kb;
  auto a = kb.add_instruction(inst_titled("alpha beta gamma"));
  auto b = kb.add_instruction(inst_titled("delta epsilon zeta"));
  CHECK(a.created_seq == 1);
  CHECK(b.created_seq == 2);
  CHECK(kb.find_by_seq(1)->title == "alpha beta gamma");
  auto by_id = kb.find_by_id(kb.instructions()[1].instruction_id);
  REQUIRE(by_id.has_value());
  CHECK(by_id->created_seq == 2);
  CHECK_FALSE(kb.find_by_seq(99).has_value());
}

TEST_CASE("a one-term query on a uniform corpus scores exactly the smoothed idf") {
  KnowledgeBase kb;
  kb.add_instruction(inst_titled("alpha beta gamma"));
  kb.add_instruction(inst_titled("delta epsilon zeta"));
  kb.add_instruction(inst_titled("eta theta iota"));
  // all lengths equal avgdl, tf = 1: the length norm cancels and the score is
  // ln(1 + (3 - 1 + 0.5) / 1.5) = ln(8/3)
  double got = kb.bm25_score({"alpha"}, 1);
  CHECK(got == doctest::Approx(0.9808292530117262).epsilon(1e-12));
  CHECK(got == doctest::Approx(std::log(8.0 / 3.0)).epsilon(1e-12));
  CHECK(kb.bm25_score({"alpha"}, 2) == 0.0);
  CHECK_THROWS_AS(kb.bm25_score({"alpha"}, 9), UnknownDocument);
}

TEST_CASE("scores agree with a from-scratch evaluation") {
  KnowledgeBase kb;
  std::vector<std::string> titles = {
      "fever sepsis cultures",
      "fever fluids response fever",
      "fall risk home support assessment",
      "wound infection antibiotics drainage erythema",
      "rib fracture analgesia breathing",
  };
  for (const auto& t : titles) REQUIRE(kb.add_instruction(inst_titled(t)).added);

  std::vector<std::vector<std::string>> docs;
  for (const auto& t : titles) docs.push_back(tokenize(t));

  std::vector<std::vector<std::string>> queries = {
      {"fever"},
      {"fever", "sepsis"},
      {"fever", "fever", "cultures"},  // repeated terms count per occurrence
      {"wound", "rib", "home"},
      {"absent"},
  };
  for (const auto& q : queries) {
    for (size_t d = 0; d < docs.size(); ++d) {
      INFO("query ", join(q, " "), " doc ", d);
      CHECK(kb.bm25_score(q, d + 1) ==
            doctest::Approx(testutil::naive_bm25(docs, q, d, 1.2, 0.75)).epsilon(1e-9));
    }
  }
}

TEST_CASE("retrieval returns only overlapping documents in a stable order") {
  KnowledgeBase kb;
  kb.add_instruction(inst_titled("shared one"));
  kb.add_instruction(inst_titled("shared two"));
  kb.add_instruction(inst_titled("unrelated topic"));

  auto r = kb.retrieve_top_k("shared", 10);
  REQUIRE(r.size() == 2);  // the non-overlapping document is not padded in
  CHECK(r[0].created_seq == 1);  // equal scores fall back to insertion order
  CHECK(r[1].created_seq == 2);
  CHECK(r[0].score == r[1].score);
  CHECK(r[0].rank == 1);
  CHECK(r[1].rank == 2);

  CHECK(kb.retrieve_top_k("shared", 0).empty());
  CHECK(kb.retrieve_top_k("nothing matches this", 5).empty());
  CHECK(KnowledgeBase{}.retrieve_top_k("shared", 5).empty());
}

TEST_CASE("every top-k list is a prefix of the full ranking") {
  KnowledgeBase kb;
  for (int i = 0; i < 25; ++i) {
    std::string title = "common term" + std::to_string(i);
    for (int j = 0; j < i % 4; ++j) title += " filler" + std::to_string(i) + "x" + std::to_string(j);
    REQUIRE(kb.add_instruction(inst_titled(title)).added);
  }
  auto full = kb.retrieve_top_k("common", 25);
  REQUIRE(full.size() == 25);
  for (size_t k : {1u, 3u, 5u, 10u}) {
    auto part = kb.retrieve_top_k("common", k);
    REQUIRE(part.size() == k);
    for (size_t i = 0; i < k; ++i) {
      CHECK(part[i].instruction_id == full[i].instruction_id);
      CHECK(part[i].rank == i + 1);
      CHECK(part[i].score == full[i].score);
    }
  }
}

TEST_CASE("the store round-trips through its file format") {
  testutil::TempDir tmp;
  auto path = tmp.path("kb.ndjson");

  KnowledgeBase kb;
  kb.add_instruction(full_instruction());
  kb.add_instruction(inst_titled("second entry keywords", "q3"));
  save_kb(kb, path);

  auto loaded = load_kb(path);
  CHECK(loaded.corrupt_lines == 0);
  REQUIRE(loaded.kb.size() == 2);
  auto a = kb.instructions();
  auto b = loaded.kb.instructions();
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK(instruction_to_json(a[i]) == instruction_to_json(b[i]));
  }
  // the index rebuilds identically
  CHECK(kb.postings_snapshot() == loaded.kb.postings_snapshot());

  // appending after a load continues the sequence
  auto out = loaded.kb.add_instruction(inst_titled("third entry unique words", "q4"));
  CHECK(out.created_seq == 3);
}

TEST_CASE("corrupt store lines are skipped and reported") {
  testutil::TempDir tmp;
  auto path = tmp.path("kb.ndjson");

  KnowledgeBase kb;
  kb.add_instruction(inst_titled("alpha beta gamma"));
  kb.add_instruction(inst_titled("delta epsilon zeta"));
  save_kb(kb, path);

  std::string content = testutil::read_file(path);
  content.insert(0, "this line is not json\n");
  content += "{\"title\": \"no error type\"}\n";
  content += "\n";  // blank lines are not corruption
  testutil::write_file(path, content);

  auto loaded = load_kb(path);
  CHECK(loaded.kb.size() == 2);
  CHECK(loaded.corrupt_lines == 2);
  REQUIRE(loaded.notes.size() == 2);
  CHECK(loaded.notes[0].find("line 1") != std::string::npos);

  CHECK_THROWS_AS(load_kb(tmp.path("missing.ndjson")), StoreCorrupt);
}

TEST_CASE("instruction parsing enforces the required fields") {
  nlohmann::json good = instruction_to_json(full_instruction());
  CHECK(instruction_from_json(good).title == "Missed finding: tachycardia");

  auto no_title = good;
  no_title["title"] = "";
  CHECK_THROWS_AS(instruction_from_json(no_title), SchemaViolation);

  auto bad_type = good;
  bad_type["error_type"] = "oops";
  CHECK_THROWS_AS(instruction_from_json(bad_type), SchemaViolation);

  // a scalar where a list belongs is tolerated
  auto scalar = good;
  scalar["prevention_steps"] = "single step";
  CHECK(instruction_from_json(scalar).prevention_steps ==
        std::vector<std::string>{"single step"});

  CHECK_THROWS_AS(instruction_from_json(nlohmann::json::array()), SchemaViolation);
}

TEST_CASE("readers are safe while the store grows") {
  KnowledgeBase kb;
  kb.add_instruction(inst_titled("seed common entry"));
  // the seed matches every query, so each bounded reader pass must come back nonempty
  std::atomic<int> nonempty{0};
  std::vector<std::thread> readers;
  for (int t = 0; t < 4; ++t) {
    readers.emplace_back([&] {
      for (int i = 0; i < 200; ++i) {
        auto r = kb.retrieve_top_k("common", 5);
        if (!r.empty()) ++nonempty;
        std::this_thread::yield();
      }
    });
  }
  for (int i = 0; i < 50; ++i)
    kb.add_instruction(inst_titled("common word" + std::to_string(i) + " extra" +
                                   std::to_string(i * 7)));
  for (auto& t : readers) t.join();
  CHECK(nonempty.load() == 800);
  CHECK(kb.size() == 51);
  auto run = kb.retrieve_top_k("common", 5);
  CHECK(run.size() == 5);
}
