// Generates the committed test fixtures: small QA datasets, a scripted mock
// provider keyed by prompt fingerprints, a corrupt-document corpus, and a few
// standalone graph files. The script is built by running the real pipeline
// against a rule-driven provider and recording every (fingerprint, response)
// pair, then replayed through MockProvider to prove the script is complete.

#include "drl/dataset.hpp"
#include "drl/discrepancy.hpp"
#include "drl/errors.hpp"
#include "drl/evalharness.hpp"
#include "drl/graph.hpp"
#include "drl/inference.hpp"
#include "drl/kb.hpp"
#include "drl/mining.hpp"
#include "drl/provider.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require(bool ok, const std::string& what) {
  if (ok) return;
  std::cerr << "fixture self-check failed: " << what << "\n";
  std::exit(1);
}

json support_for(const std::string& quote) {
  return json::array({json{{"source", "case"}, {"ref", nullptr}, {"quote", quote}}});
}

json jfact(const std::string& fid, const std::string& label) {
  return json{{"fid", fid},
              {"label", label},
              {"value", nullptr},
              {"polarity", "present"},
              {"support", support_for(label)}};
}

json jhyp(const std::string& hid, const std::string& label, const std::string& conf = "high") {
  return json{{"hid", hid}, {"label", label}, {"confidence", conf}, {"support", support_for(label)}};
}

json jact(const std::string& aid, const std::string& label, const std::string& type = "ASSESS",
          const std::string& status = "recommended") {
  return json{{"aid", aid},
              {"label", label},
              {"action_type", type},
              {"status", status},
              {"support", support_for(label)}};
}

json jedge(const std::string& eid, const std::string& src, const std::string& dst,
           const std::string& type = "supports") {
  return json{{"eid", eid},       {"src", src},
              {"dst", dst},       {"type", type},
              {"justification", "stated in the case description"},
              {"guideline_support", nullptr}};
}

json jgraph(const std::string& qid, json facts, json hyps, json acts, json edges,
            const std::string& answer) {
  return json{{"artifact_id", "graph-" + qid},
              {"qid", qid},
              {"guideline_bundle_id", "extracted"},
              {"facts", std::move(facts)},
              {"hypotheses", std::move(hyps)},
              {"actions", std::move(acts)},
              {"edges", std::move(edges)},
              {"final",
               json{{"answer", answer},
                    {"answer_text", "derived from the documented findings"},
                    {"confidence", "high"},
                    {"uncertainties", json::array()}}}};
}

struct TrainFixture {
  drl::QaCase c;
  std::string cot;
  json ref_with;                // reference graph when the rationale is available
  std::optional<json> ref_no;   // reference graph without it (only q1 differs)
  json agent;
  bool fence_ref = false;       // wrap the reference response in prose + a code fence
  size_t expect_with = 0;       // instructions mined with rationale
  size_t expect_no = 0;         // and without
};

struct TestFixture {
  drl::QaCase c;
  std::string cot;
};

const std::string kReturnTail =
    ": will this patient return to ED and get admitted to inpatient within 9 days after "
    "the discharge of the index ED visit?";

std::vector<TrainFixture> build_train() {
  std::vector<TrainFixture> out;

  {  // q1: the missed social factor; only visible through the physician rationale
    TrainFixture t;
    t.c.qid = "q1";
    t.c.question =
        "Given the following emergency department presentation of an 82 year old patient "
        "brought in after a ground level fall at home, with bruising of the left hip, normal "
        "radiographs, stable vital signs, two prior falls this year, and documentation of "
        "living alone without social support" + kReturnTail;
    t.c.answer = "yes";
    t.c.rationale =
        "Recurrent falls in an elderly patient living alone without social support carry a "
        "high short-term readmission risk; home safety must be assessed before discharge.";
    t.cot =
        "Radiographs are normal and vital signs are stable, but repeated falls this year "
        "suggest ongoing risk of another injury. <answer>1</answer>";
    json f1 = jfact("F1", "recurrent falls reported this year");
    json f2 = jfact("F2", "living alone without social support");
    json h1 = jhyp("H1", "high risk of recurrent fall injury");
    json a1 = jact("A1", "arrange home safety assessment");
    t.ref_with = jgraph("q1", json::array({f1, f2}), json::array({h1}), json::array({a1}),
                        json::array({jedge("E1", "F1", "H1"), jedge("E2", "F2", "H1"),
                                     jedge("E3", "H1", "A1", "suggests_test"),
                                     jedge("E4", "H1", "FINAL")}),
                        "1");
    t.ref_no = jgraph("q1", json::array({f1}), json::array({h1}), json::array({a1}),
                      json::array({jedge("E1", "F1", "H1"),
                                   jedge("E2", "H1", "A1", "suggests_test"),
                                   jedge("E3", "H1", "FINAL")}),
                      "1");
    t.agent = jgraph("q1", json::array({f1}), json::array({h1}), json::array({a1}),
                     json::array({jedge("E1", "F1", "H1"),
                                  jedge("E2", "H1", "A1", "suggests_test"),
                                  jedge("E3", "H1", "FINAL")}),
                     "1");
    t.expect_with = 2;  // missed_fact + reasoning_error
    t.expect_no = 0;
    out.push_back(std::move(t));
  }

  {  // q2: missed corroborating vital sign and the workup it mandates; wrong answer
    TrainFixture t;
    t.c.qid = "q2";
    t.c.question =
        "Given the following emergency department presentation of a 67 year old patient with "
        "fever of 38.9, heart rate 118, mild hypotension responding to fluids, and a suspected "
        "urinary source" + kReturnTail;
    t.c.answer = "yes";
    t.cot =
        "The vital sign changes can be explained by dehydration alone and responded to fluids, "
        "so outpatient management should suffice. The answer is no";
    t.ref_with = jgraph(
        "q2", json::array({jfact("F1", "fever"), jfact("F2", "tachycardia")}),
        json::array({jhyp("H1", "sepsis")}), json::array({jact("A1", "order blood cultures", "TEST")}),
        json::array({jedge("E1", "F1", "H1"), jedge("E2", "F2", "H1"),
                     jedge("E3", "H1", "A1", "suggests_test")}),
        "1");
    t.agent = jgraph("q2", json::array({jfact("F1", "fever")}), json::array({jhyp("H1", "sepsis")}),
                     json::array(), json::array({jedge("E1", "F1", "H1")}), "0");
    t.expect_with = 3;  // missed_fact + treatment_error + reasoning_error
    t.expect_no = 3;
    out.push_back(std::move(t));
  }

  {  // q3: agent reproduces the reference exactly
    TrainFixture t;
    t.c.qid = "q3";
    t.c.question =
        "Given the following emergency department presentation of a 45 year old patient with "
        "atypical chest pain, negative serial troponins, a normal electrocardiogram, and a low "
        "risk score" + kReturnTail;
    t.c.answer = "no";
    t.cot = "Low risk features throughout; discharge with follow-up is appropriate. <answer>0</answer>";
    t.ref_with = jgraph(
        "q3", json::array({jfact("F1", "negative serial troponins")}),
        json::array({jhyp("H1", "low risk chest pain presentation")}),
        json::array({jact("A1", "discharge with outpatient follow-up", "OBSERVE")}),
        json::array({jedge("E1", "F1", "H1"), jedge("E2", "H1", "A1", "suggests_test"),
                     jedge("E3", "H1", "FINAL")}),
        "0");
    t.agent = t.ref_with;
    out.push_back(std::move(t));
  }

  {  // q4: missed differential plus an invented disposition; reference arrives fenced
    TrainFixture t;
    t.c.qid = "q4";
    t.c.question =
        "Given the following emergency department presentation of a 58 year old patient two "
        "weeks after breast surgery, with erythema around the surgical wound, purulent "
        "drainage, and a low grade fever" + kReturnTail;
    t.c.answer = "yes";
    t.cot =
        "Wound erythema with purulent drainage indicates an infection that often needs "
        "escalation after discharge. <answer>1</answer>";
    json f1 = jfact("F1", "erythema around the surgical wound");
    json f2 = jfact("F2", "purulent drainage documented");
    json h1 = jhyp("H1", "surgical site infection");
    json a1 = jact("A1", "start empiric antibiotics", "PRESCRIBE");
    json shared_edges = json::array({jedge("E1", "F1", "H1"), jedge("E2", "F2", "H1"),
                                     jedge("E3", "H1", "A1", "suggests_test")});
    t.ref_with = jgraph("q4", json::array({f1, f2}),
                        json::array({h1, jhyp("H2", "possible abscess formation", "medium")}),
                        json::array({a1}), shared_edges, "1");
    t.agent = jgraph("q4", json::array({f1, f2}), json::array({h1}),
                     json::array({a1, jact("A2", "plan early discharge", "OBSERVE", "not_specified")}),
                     shared_edges, "1");
    t.fence_ref = true;
    t.expect_with = 2;  // diagnosis_error + treatment_error
    t.expect_no = 2;
    out.push_back(std::move(t));
  }

  {  // q5: two missed isolated findings, no structural differences
    TrainFixture t;
    t.c.qid = "q5";
    t.c.question =
        "Given the following emergency department presentation of a 51 year old patient with "
        "left sided rib pain after a bicycle fall, isolated nondisplaced fractures of ribs "
        "seven and eight, normal oxygen saturation, and splinting on deep inspiration" +
        kReturnTail;
    t.c.answer = "no";
    t.cot =
        "Isolated nondisplaced rib fractures with normal oxygenation rarely require "
        "readmission when analgesia is adequate. <answer>no</answer>";
    json f1 = jfact("F1", "left sided rib pain after a fall");
    json f2 = jfact("F2", "normal oxygen saturation");
    json h1 = jhyp("H1", "uncomplicated rib fractures");
    json a1 = jact("A1", "provide analgesia and breathing exercises", "TREAT");
    json edges = json::array({jedge("E1", "F1", "H1"), jedge("E2", "F2", "H1"),
                              jedge("E3", "H1", "A1", "suggests_test"),
                              jedge("E4", "A1", "FINAL")});
    t.ref_with = jgraph("q5",
                        json::array({f1, f2, jfact("F3", "splinting on deep inspiration")}),
                        json::array({h1, jhyp("H2", "possible pulmonary contusion", "low")}),
                        json::array({a1}), edges, "0");
    t.agent = jgraph("q5", json::array({f1, f2}), json::array({h1}), json::array({a1}), edges, "0");
    t.expect_with = 2;  // missed_fact + diagnosis_error
    t.expect_no = 2;
    out.push_back(std::move(t));
  }

  {  // q6: another clean reproduction
    TrainFixture t;
    t.c.qid = "q6";
    t.c.question =
        "Given the following emergency department presentation of a 73 year old patient seen "
        "after a syncopal episode attributed to a newly started antihypertensive, now resolved "
        "after dose adjustment and medication reconciliation" + kReturnTail;
    t.c.answer = "yes";
    t.cot =
        "The trigger was identified, but elderly patients adjusting to new agents often "
        "re-present within days. <answer>yes</answer>";
    t.ref_with = jgraph(
        "q6", json::array({jfact("F1", "syncope after starting a new antihypertensive")}),
        json::array({jhyp("H1", "medication induced orthostatic syncope")}),
        json::array({jact("A1", "adjust dose and reconcile medications", "TREAT")}),
        json::array({jedge("E1", "F1", "H1"), jedge("E2", "H1", "A1", "suggests_test"),
                     jedge("E3", "H1", "FINAL")}),
        "1");
    t.agent = t.ref_with;
    out.push_back(std::move(t));
  }

  return out;
}

std::vector<TestFixture> build_tests() {
  std::vector<TestFixture> out;

  {
    TestFixture t;
    t.c.qid = "t1";
    t.c.question =
        "Given the following emergency department presentation of an elderly patient after a "
        "ground level fall at home, who lives alone with limited social support and has had "
        "prior falls this year" + kReturnTail;
    t.c.answer = "yes";
    t.cot =
        "Given the home circumstances and the prior falls, early recurrence is likely. "
        "<answer>1</answer>";
    out.push_back(std::move(t));
  }
  {
    TestFixture t;
    t.c.qid = "t2";
    t.c.question =
        "Given the following emergency department presentation of a middle aged patient with "
        "fever and tachycardia from a suspected urinary source, treated with fluids and "
        "discharged on oral antibiotics with close follow-up arranged" + kReturnTail;
    t.c.answer = "no";
    t.cot =
        "Vital signs normalized after fluids and a concrete follow-up plan is in place. "
        "The answer is no.";
    out.push_back(std::move(t));
  }
  {
    TestFixture t;
    t.c.qid = "t3";
    t.c.question =
        "A patient develops a new oxygen requirement during observation for multiple rib "
        "fractures. What is the most appropriate next step in management?";
    t.c.options = {{"A", "Discharge home with oral analgesia"},
                   {"B", "Admit for observation and serial examinations"},
                   {"C", "Immediate thoracotomy"},
                   {"D", "No further care required"}};
    t.c.answer = "B";
    t.cot = "A new oxygen requirement after rib fractures warrants inpatient monitoring. "
            "<answer>B</answer>";
    out.push_back(std::move(t));
  }
  {
    TestFixture t;
    t.c.qid = "t4";
    t.c.question =
        "Given the following emergency department presentation of a patient two weeks after "
        "breast surgery with spreading erythema, purulent drainage, and fever despite oral "
        "antibiotics" + kReturnTail;
    t.c.answer = "yes";
    t.cot =
        "A wound infection progressing on oral therapy usually needs admission for "
        "intravenous treatment. <answer>yes</answer>";
    out.push_back(std::move(t));
  }

  return out;
}

// Long exemplar questions so that ten in-context items overflow the default
// character budget while five stay comfortably inside it.
std::vector<drl::QaCase> build_exemplars() {
  static const char* themes[12] = {
      "transient dizziness after standing up quickly",
      "a mechanical ankle sprain without instability",
      "a resolving allergic rash after antihistamines",
      "an uncomplicated urinary tract infection",
      "mild dehydration after a gastrointestinal illness",
      "a superficial laceration repaired without complication",
      "stable asthma symptoms improving after a nebulizer",
      "a first episode of uncomplicated renal colic",
      "mild intermittent back pain without red flags",
      "a brief palpitation episode with a normal tracing",
      "a low grade fever with a viral syndrome",
      "a minor head strike without loss of consciousness"};
  const std::string filler =
      "The patient was monitored, reassessed, and counseled about returning for any worsening "
      "symptoms, with documentation of stable vital signs and a clear follow-up plan. ";
  std::vector<drl::QaCase> out;
  for (int i = 0; i < 12; ++i) {
    drl::QaCase c;
    c.qid = "ex" + std::to_string(i + 1);
    std::string q = "Given the following emergency department presentation of a patient with ";
    q += themes[i];
    q += ", consider the documented course. ";
    while (q.size() < 2400) q += filler;
    q += "Will this patient return to ED and get admitted to inpatient within 9 days after the "
         "discharge of the index ED visit?";
    c.question = std::move(q);
    c.answer = (i % 2 == 0) ? "yes" : "no";
    out.push_back(std::move(c));
  }
  return out;
}

// Answers by matching prompt content against the fixture tables and records every
// completion under its fingerprint.
class RecordingProvider : public drl::Provider {
 public:
  RecordingProvider(const std::vector<TrainFixture>& train, const std::vector<TestFixture>& tests)
      : train_(train), tests_(tests) {}

  drl::ChatResponse complete(const drl::ChatRequest& req) override {
    std::string text = resolve(req);
    {
      std::lock_guard<std::mutex> lk(mu_);
      entries_[drl::fingerprint(req)] = text;
    }
    return {text, "rules", 0};
  }
  std::string name() const override { return "rules"; }

  std::map<std::string, std::string> entries() const {
    std::lock_guard<std::mutex> lk(mu_);
    return entries_;
  }

 private:
  static std::string fenced(const json& g) {
    return "Extraction complete. The graph follows.\n```json\n" + g.dump(2) +
           "\n```\nEnd of output.";
  }

  std::string resolve(const drl::ChatRequest& req) const {
    if (req.tag == drl::Tag::extract) {
      for (const auto& t : train_) {
        if (req.user.find("\"qid\": \"" + t.c.qid + "\"") == std::string::npos) continue;
        if (req.user.find(t.cot) != std::string::npos) return t.agent.dump(2);
        if (req.user.find("## PHYSICIAN RATIONALE:") != std::string::npos)
          return t.fence_ref ? fenced(t.ref_with) : t.ref_with.dump(2);
        const json& ref = t.ref_no ? *t.ref_no : t.ref_with;
        return t.fence_ref ? fenced(ref) : ref.dump(2);
      }
      throw drl::ProviderFailure("no extraction rule matches this prompt");
    }
    if (req.tag == drl::Tag::agent) {
      for (const auto& t : train_)
        if (req.user.find(t.c.question) != std::string::npos) return t.cot;
      for (const auto& t : tests_)
        if (req.user.find(t.c.question) != std::string::npos) return t.cot;
      throw drl::ProviderFailure("no agent rule matches this prompt");
    }
    throw drl::ProviderFailure("no rule for this tag");
  }

  const std::vector<TrainFixture>& train_;
  const std::vector<TestFixture>& tests_;
  mutable std::mutex mu_;
  std::map<std::string, std::string> entries_;
};

json qa_line(const drl::QaCase& c) {
  json o{{"qid", c.qid}, {"question", c.question}, {"answer", c.answer}};
  if (!c.options.empty()) {
    json opts = json::array();
    for (const auto& [label, text] : c.options) opts.push_back(json::array({label, text}));
    o["options"] = std::move(opts);
  }
  if (c.rationale) o["rationale"] = *c.rationale;
  return o;
}

void write_ndjson(const fs::path& path, const std::vector<json>& lines) {
  std::ofstream f(path);
  require(f.good(), "cannot open " + path.string());
  for (const auto& l : lines) f << l.dump() << "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  require(f.good(), "cannot open " + path.string());
  f << text;
}

// 20 documents: 2 malformed, 10 schema-level, 8 integrity-level.
json build_corrupt_corpus() {
  auto base = [] {
    return jgraph("c1", json::array({jfact("F1", "fever")}), json::array({jhyp("H1", "sepsis")}),
                  json::array({jact("A1", "order blood cultures", "TEST")}),
                  json::array({jedge("E1", "F1", "H1"),
                               jedge("E2", "H1", "A1", "suggests_test")}),
                  "1");
  };
  json corpus = json::array();
  auto add = [&](const std::string& name, const std::string& expect, const std::string& doc) {
    corpus.push_back(json{{"name", name}, {"expect", expect}, {"doc", doc}});
  };

  add("prose-only", "malformed", "The graph could not be produced for this case.");
  add("fenced-garbage", "malformed", "```json\n{\"facts\": [,]\n```");

  {
    json d = base();
    d.erase("facts");
    add("missing-facts-array", "schema", d.dump());
  }
  {
    json d = base();
    d["facts"][0].erase("fid");
    add("fact-without-id", "schema", d.dump());
  }
  {
    json d = base();
    d["facts"][0]["polarity"] = "POSITIVE";
    add("bad-polarity", "schema", d.dump());
  }
  {
    json d = base();
    d["hypotheses"][0]["confidence"] = "certain";
    add("bad-confidence", "schema", d.dump());
  }
  {
    json d = base();
    d["actions"][0]["action_type"] = "MEDICATE";
    add("bad-action-type", "schema", d.dump());
  }
  {
    json d = base();
    d["actions"][0]["status"] = "mandatory";
    add("bad-action-status", "schema", d.dump());
  }
  {
    json d = base();
    d["edges"][0]["type"] = "implies";
    add("bad-edge-type", "schema", d.dump());
  }
  {
    json d = base();
    d["facts"][0]["support"][0]["source"] = "guideline";
    add("bad-evidence-source", "schema", d.dump());
  }
  {
    json d = base();
    d["facts"][0]["support"][0]["quote"] = "";
    add("empty-evidence-quote", "schema", d.dump());
  }
  {
    json d = base();
    d["final"]["answer"] = "";
    add("empty-final-answer", "schema", d.dump());
  }

  {
    json d = base();
    json dup = d["facts"][0];
    dup["label"] = "rigors";
    d["facts"].push_back(dup);
    add("duplicate-node-id", "integrity", d.dump());
  }
  {
    json d = base();
    json dup = jedge("E1", "F1", "H1");
    d["edges"].push_back(dup);
    add("duplicate-edge-id", "integrity", d.dump());
  }
  {
    json d = base();
    d["edges"].push_back(jedge("E3", "F1", "H9"));
    add("dangling-edge-dst", "integrity", d.dump());
  }
  {
    json d = base();
    d["edges"].push_back(jedge("E3", "F9", "H1"));
    add("dangling-edge-src", "integrity", d.dump());
  }
  {
    json d = base();
    d["edges"].push_back(jedge("E3", "H1", "F1"));
    add("two-node-cycle", "integrity", d.dump());
  }
  {
    json d = base();
    d["edges"].push_back(jedge("E3", "F1", "F1"));
    add("self-loop", "integrity", d.dump());
  }
  {
    json d = base();
    d["edges"].push_back(jedge("E3", "FINAL", "H1"));
    add("final-as-source", "integrity", d.dump());
  }
  {
    json d = base();
    d["facts"][0]["support"][0]["source"] = "other-node-ref";
    d["facts"][0]["support"][0]["ref"] = "Z9";
    add("dangling-node-ref", "integrity", d.dump());
  }

  return corpus;
}

std::vector<drl::QaCase> cases_of(const std::vector<TrainFixture>& train) {
  std::vector<drl::QaCase> out;
  for (const auto& t : train) out.push_back(t.c);
  return out;
}

std::vector<drl::QaCase> cases_of(const std::vector<TestFixture>& tests) {
  std::vector<drl::QaCase> out;
  for (const auto& t : tests) out.push_back(t.c);
  return out;
}

std::string kb_signature(const drl::KnowledgeBase& kb) {
  std::string sig;
  for (const auto& inst : kb.instructions()) {
    sig += std::to_string(inst.created_seq) + ":" + inst.instruction_id + "\n";
  }
  return sig;
}

void check_mining(const drl::MiningResult& res, const std::vector<TrainFixture>& train,
                  bool with_rationale) {
  require(res.records.size() == train.size(), "mining produced one record per case");
  require(res.cases_skipped == 0, "no case was skipped");
  for (size_t i = 0; i < train.size(); ++i) {
    size_t expect = with_rationale ? train[i].expect_with : train[i].expect_no;
    require(res.records[i].instructions_added.size() == expect,
            train[i].c.qid + ": expected " + std::to_string(expect) + " instructions, got " +
                std::to_string(res.records[i].instructions_added.size()) +
                (with_rationale ? " (with rationale)" : " (without rationale)"));
    require(!res.records[i].skipped, train[i].c.qid + " not skipped");
  }
}

void check_grid(const drl::GridReport& grid, size_t k10_index) {
  require(grid.rows.size() == 3, "grid has two KB rows and one in-context row");
  for (const auto& row : grid.rows) {
    for (size_t i = 0; i < row.cells.size(); ++i) {
      bool icl10 = (row.mode == drl::PromptMode::icl && i == k10_index);
      require(row.cells[i].available != icl10,
              "grid cell availability for " + row.label + " k index " + std::to_string(i));
      if (row.cells[i].available) {
        require(std::abs(row.cells[i].mean - 1.0) < 1e-12,
                "scripted answers all score correct in " + row.label);
        require(row.cells[i].stddev == 0.0, "identical runs have zero spread");
      }
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  fs::path out = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(out);

  auto train = build_train();
  auto tests = build_tests();
  auto exemplars = build_exemplars();

  std::vector<json> train_lines, test_lines, ex_lines;
  for (const auto& t : train) train_lines.push_back(qa_line(t.c));
  for (const auto& t : tests) test_lines.push_back(qa_line(t.c));
  for (const auto& c : exemplars) ex_lines.push_back(qa_line(c));
  write_ndjson(out / "train6.ndjson", train_lines);
  write_ndjson(out / "test4.ndjson", test_lines);
  write_ndjson(out / "exemplars12.ndjson", ex_lines);

  auto train_cases = cases_of(train);
  auto test_cases = cases_of(tests);

  RecordingProvider prov(train, tests);

  drl::MiningOptions mo;
  drl::KnowledgeBase kb_with, kb_without;
  auto res_with = mine_dataset(prov, train_cases, kb_with, mo);
  check_mining(res_with, train, true);
  require(kb_with.size() == 9, "rationale-assisted mining yields 9 instructions, got " +
                                   std::to_string(kb_with.size()));

  mo.use_rationale = false;
  auto res_without = mine_dataset(prov, train_cases, kb_without, mo);
  check_mining(res_without, train, false);
  require(kb_without.size() == 7, "mining without rationale yields 7 instructions, got " +
                                      std::to_string(kb_without.size()));

  // hand-checked numbers for the q2 pair
  {
    const auto& r = res_with.records[1];
    require(r.qid == "q2" && r.report.has_value(), "q2 record carries a report");
    require(!r.answer_correct, "q2 agent answer scored incorrect");
    const auto& rep = *r.report;
    require(std::abs(rep.node_mismatch_penalty - 3.0 / 5.5) < 1e-12, "q2 node mismatch penalty");
    require(rep.hallucination_penalty == 0.0, "q2 hallucination penalty");
    require(std::abs(rep.reasoning_path_penalty - 0.5) < 1e-12, "q2 reasoning path penalty");
    require(std::abs(rep.total_ged_score - (3.0 / 5.5 + 0.5)) < 1e-12, "q2 total");
  }
  {
    const auto& r = res_with.records[3];
    require(r.qid == "q4" && r.report.has_value(), "q4 record carries a report");
    require(r.report->hallucination_severity == drl::Severity::moderate, "q4 severity moderate");
    require(r.report->edge_diff.missing_edges.empty() &&
                r.report->edge_diff.extra_edges.empty(),
            "q4 has no edge differences");
  }

  require(kb_with.retrieve_top_k(tests[0].c.question, 3).size() == 3,
          "t1 retrieves a full top-3 from the rationale-assisted store");

  auto ex_store = drl::load_exemplars((out / "exemplars12.ndjson").string());
  require(ex_store.size() == 12, "12 exemplars load");

  std::vector<size_t> ks = {0, 1, 3, 5, 10};
  std::vector<drl::KbVariant> variants = {{"kb-with-rationale", &kb_with},
                                          {"kb-no-rationale", &kb_without}};
  drl::GridReport grid =
      run_ablation_grid(prov, variants, &ex_store, test_cases, ks, 1, drl::PromptConfig{});
  check_grid(grid, 4);

  drl::MockScript script;
  script.entries = prov.entries();
  script.fallback = drl::MockScript::Fallback::fail;
  save_mock_script(script, (out / "mock_script.json").string());

  // replay everything through the saved script to prove it is complete
  {
    drl::MockProvider mock(drl::load_mock_script((out / "mock_script.json").string()));
    drl::MiningOptions ro;
    drl::KnowledgeBase kb2_with, kb2_without;
    auto replay_with = mine_dataset(mock, train_cases, kb2_with, ro);
    ro.use_rationale = false;
    auto replay_without = mine_dataset(mock, train_cases, kb2_without, ro);
    check_mining(replay_with, train, true);
    check_mining(replay_without, train, false);
    require(kb_signature(kb2_with) == kb_signature(kb_with), "replayed store matches");
    require(kb_signature(kb2_without) == kb_signature(kb_without),
            "replayed no-rationale store matches");
    std::vector<drl::KbVariant> v2 = {{"kb-with-rationale", &kb2_with},
                                      {"kb-no-rationale", &kb2_without}};
    drl::GridReport g2 = run_ablation_grid(mock, v2, &ex_store, test_cases, ks, 1,
                                           drl::PromptConfig{});
    check_grid(g2, 4);
  }

  write_text(out / "corrupt_cases.json", build_corrupt_corpus().dump(2) + "\n");

  // standalone graph pair with hand-computable distances, plus a cyclic document
  json ref_sepsis = train[1].ref_with;
  json agent_sepsis = train[1].agent;
  write_text(out / "ref_sepsis.json", ref_sepsis.dump(2) + "\n");
  write_text(out / "agent_sepsis.json", agent_sepsis.dump(2) + "\n");
  {
    json cyc = jgraph("cyc", json::array({jfact("F1", "fever")}),
                      json::array({jhyp("H1", "sepsis")}), json::array(),
                      json::array({jedge("E1", "F1", "H1"), jedge("E2", "H1", "F1")}), "1");
    write_text(out / "bad_cycle.json", cyc.dump(2) + "\n");
  }

  {
    auto ref = drl::parse_graph(ref_sepsis.dump());
    auto agent = drl::parse_graph(agent_sepsis.dump());
    auto rep = drl::diff_graphs(ref, agent);
    require(std::abs(rep.total_ged_score - (3.0 / 5.5 + 0.5)) < 1e-12,
            "standalone pair reproduces the hand-computed total");
  }
  {
    json corpus = build_corrupt_corpus();
    for (const auto& entry : corpus) {
      const std::string expect = entry["expect"];
      const std::string doc = entry["doc"];
      std::string got;
      try {
        drl::parse_graph(doc);
        got = "accepted";
      } catch (const drl::MalformedDocument&) {
        got = "malformed";
      } catch (const drl::SchemaViolation&) {
        got = "schema";
      } catch (const drl::IntegrityViolation&) {
        got = "integrity";
      }
      require(got == expect,
              "corrupt case " + entry["name"].get<std::string>() + ": expected " + expect +
                  ", got " + got);
    }
  }

  std::cout << "fixtures written to " << out.string() << "\n"
            << "  mock script entries: " << script.entries.size() << "\n"
            << "  kb sizes: " << kb_with.size() << " with rationale, " << kb_without.size()
            << " without\n";
  return 0;
}
