// Release gate. Each check prints one [PASS]/[FAIL] line and the process exits
// nonzero when any check fails. Tolerances and counts are pinned right here so a
// change in behavior cannot pass silently.

#include "drl/config.hpp"
#include "drl/dataset.hpp"
#include "drl/discrepancy.hpp"
#include "drl/errors.hpp"
#include "drl/evalharness.hpp"
#include "drl/graph.hpp"
#include "drl/inference.hpp"
#include "drl/kb.hpp"
#include "drl/mining.hpp"
#include "drl/provider.hpp"

#include "support/naive_bm25.hpp"
#include "support/randgraph.hpp"
#include "support/testutil.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

constexpr double kOracleTol = 1e-9;   // production matcher vs exhaustive search
constexpr double kScoreTol = 1e-9;    // indexed scoring vs direct-formula evaluation
constexpr double kIdfPin = 0.9808292530117262;  // ln(8/3): 3 docs, df=1, tf=1, dl=avgdl
constexpr double kIdfTol = 1e-12;
constexpr int kOraclePairs = 500;
constexpr int kSelfDiffGraphs = 100;
constexpr int kRoundTripGraphs = 200;
constexpr double kOracleBudgetSec = 30.0;
constexpr double kPipelineBudgetSec = 10.0;
// identity checks (penalty sum, self-distance, weight ratios, zero variance) use
// exact == comparisons: tolerance zero

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// reports produced anywhere in this run; the sum identity is asserted over all of them
std::vector<drl::DiscrepancyReport> g_reports;

void check_sum_identity(const drl::DiscrepancyReport& r, const std::string& where) {
  double resum =
      r.node_mismatch_penalty + r.hallucination_penalty + r.reasoning_path_penalty;
  require(r.total_ged_score - resum == 0.0, where + ": total drifted from the penalty sum");
}

// fixture-backed environment shared by the pipeline-level checks
struct FixtureEnv {
  std::vector<drl::QaCase> train;
  std::vector<drl::QaCase> tests;
  drl::MockProvider prov;
  drl::ExemplarStore exemplars;
  drl::KnowledgeBase kb_with;
  drl::KnowledgeBase kb_without;
  drl::MiningResult mined_with;
  drl::MiningResult mined_without;
  std::optional<drl::GridReport> grid;
};

FixtureEnv& env() {
  static FixtureEnv e = [] {
    auto fx = testutil::fixtures_dir();
    FixtureEnv v{drl::load_dataset((fx / "train6.ndjson").string()),
                 drl::load_dataset((fx / "test4.ndjson").string()),
                 drl::MockProvider(drl::load_mock_script((fx / "mock_script.json").string())),
                 drl::load_exemplars((fx / "exemplars12.ndjson").string()),
                 drl::KnowledgeBase{},
                 drl::KnowledgeBase{},
                 {},
                 {},
                 {}};
    v.mined_with = drl::mine_dataset(v.prov, v.train, v.kb_with, drl::MiningOptions{});
    drl::MiningOptions no_rationale;
    no_rationale.use_rationale = false;
    v.mined_without = drl::mine_dataset(v.prov, v.train, v.kb_without, no_rationale);
    return v;
  }();
  return e;
}

const drl::GridReport& fixture_grid() {
  auto& e = env();
  if (!e.grid) {
    std::vector<drl::KbVariant> variants = {{"kb-with-rationale", &e.kb_with},
                                            {"kb-no-rationale", &e.kb_without}};
    e.grid = drl::run_ablation_grid(e.prov, variants, &e.exemplars, e.tests, {0, 1, 3, 5, 10},
                                    1, drl::PromptConfig{});
  }
  return *e.grid;
}

// ---- checks ----

std::string check_oracle_equivalence() {
  auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(977001);
  drl::WeightConfig cfg;
  drl::LexicalMatcher lex;
  double worst = 0.0;
  for (int i = 0; i < kOraclePairs; ++i) {
    auto [ref, agent] = testutil::random_oracle_pair(rng);
    auto fast = drl::diff_graphs(ref, agent, cfg);
    auto oracle = drl::exact_oracle(ref, agent, cfg, lex);
    for (double d : {std::abs(fast.node_mismatch_penalty - oracle.report.node_mismatch_penalty),
                     std::abs(fast.hallucination_penalty - oracle.report.hallucination_penalty),
                     std::abs(fast.reasoning_path_penalty - oracle.report.reasoning_path_penalty),
                     std::abs(fast.total_ged_score - oracle.report.total_ged_score)}) {
      worst = std::max(worst, d);
    }
    require(std::abs(fast.total_ged_score - oracle.report.total_ged_score) < kOracleTol,
            "pair " + std::to_string(i) + ": totals differ by more than 1e-9");
    g_reports.push_back(std::move(fast));
    g_reports.push_back(std::move(oracle.report));
  }
  double secs = seconds_since(t0);
  require(secs < kOracleBudgetSec, "exceeded the 30 s budget: " + fmt("%.1f", secs) + " s");
  return std::to_string(kOraclePairs) + " pairs, max penalty gap " + fmt("%.2e", worst) +
         ", " + fmt("%.1f", secs) + " s";
}

std::string check_penalty_sum_identity() {
  auto& e = env();
  size_t n = 0;
  for (const auto& r : g_reports) {
    check_sum_identity(r, "random pair report");
    ++n;
  }
  for (const auto* res : {&e.mined_with, &e.mined_without}) {
    for (const auto& rec : res->records) {
      if (!rec.report) continue;
      check_sum_identity(*rec.report, "mining record " + rec.qid);
      ++n;
    }
  }
  auto fx = testutil::fixtures_dir();
  auto ref = drl::parse_graph(testutil::read_file(fx / "ref_sepsis.json"));
  auto agent = drl::parse_graph(testutil::read_file(fx / "agent_sepsis.json"));
  check_sum_identity(drl::diff_graphs(ref, agent), "fixture graph pair");
  ++n;
  require(n > size_t(kOraclePairs), "too few reports were collected");
  return std::to_string(n) + " reports, exact sum in every one";
}

std::string check_self_distance_zero() {
  std::mt19937_64 rng(411002);
  for (int i = 0; i < kSelfDiffGraphs; ++i) {
    auto g = testutil::random_valid_graph(rng);
    auto r = drl::diff_graphs(g, g);
    require(r.node_mismatch_penalty == 0.0 && r.hallucination_penalty == 0.0 &&
                r.reasoning_path_penalty == 0.0 && r.total_ged_score == 0.0,
            "graph " + std::to_string(i) + ": self comparison is not exactly zero");
    require(r.match_set.unmatched_ref.empty() && r.match_set.unmatched_agent.empty() &&
                r.edge_diff.missing_edges.empty() && r.edge_diff.extra_edges.empty(),
            "graph " + std::to_string(i) + ": self comparison left differences");
    require(r.hallucination_severity == drl::Severity::none,
            "graph " + std::to_string(i) + ": severity should be none");
    check_sum_identity(r, "self comparison");
  }
  return std::to_string(kSelfDiffGraphs) + " graphs, all penalties exactly 0";
}

std::string check_weight_ratios() {
  auto single = [](drl::NodeKind kind) {
    drl::ReasoningGraph g;
    if (kind == drl::NodeKind::fact) {
      g.facts.push_back({"F1", "baseline marker", std::nullopt, "present", {}, {}});
    } else if (kind == drl::NodeKind::hypothesis) {
      g.hypotheses.push_back({"H1", "baseline marker", "high", {}, {}});
    } else {
      g.actions.push_back({"A1", "baseline marker", "TEST", "recommended", {}, {}});
    }
    g.final.answer = "1";
    g.final.confidence = "high";
    return g;
  };
  drl::ReasoningGraph empty_agent;
  auto rf = drl::diff_graphs(single(drl::NodeKind::fact), empty_agent);
  auto rh = drl::diff_graphs(single(drl::NodeKind::hypothesis), empty_agent);
  auto ra = drl::diff_graphs(single(drl::NodeKind::action), empty_agent);
  require(rf.missing_mass == 1.0, "missing fact mass is not exactly 1.0");
  require(rh.missing_mass == 1.5 * rf.missing_mass,
          "missing hypothesis mass is not exactly 1.5x a fact");
  require(ra.missing_mass == 2.0 * rf.missing_mass,
          "missing action mass is not exactly 2.0x a fact");
  return "masses 1.0 / 1.5 / 2.0, ratios exact";
}

std::string check_scoring_against_direct_formula() {
  const std::vector<std::vector<std::string>> docs = {
      {"chest", "pain", "acute", "onset"},
      {"chest", "xray", "films", "onset"},
      {"fever", "cough", "pain"},
      {"sepsis", "lactate", "elevated", "blood", "cultures"},
      {"pain", "pain", "chronic"},
  };
  const std::vector<std::vector<std::string>> queries = {
      {"pain"},
      {"chest", "pain"},
      {"onset"},  // equal-score pair: docs 0 and 1
      {"sepsis", "cultures"},
      {"pain", "pain"},  // repeated term counts per occurrence
      {"chest", "fever", "lactate", "absentterm"},
      {"absentterm"},
  };
  drl::Bm25Params params;
  double worst = 0.0;
  size_t compared = 0;

  auto ranking_for = [&](const drl::Bm25Index& index, const std::vector<std::string>& q) {
    auto scored = index.match_scores(q);
    std::stable_sort(scored.begin(), scored.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return scored;
  };

  std::vector<std::vector<std::pair<size_t, double>>> first_rankings;
  for (int run = 0; run < 10; ++run) {
    drl::Bm25Index index(params);
    for (const auto& d : docs) index.add_document(d);
    for (size_t qi = 0; qi < queries.size(); ++qi) {
      for (size_t di = 0; di < docs.size(); ++di) {
        double got = index.score(queries[qi], di);
        double want = testutil::naive_bm25(docs, queries[qi], di, params.k1, params.b);
        worst = std::max(worst, std::abs(got - want));
        require(std::abs(got - want) <= kScoreTol,
                "query " + std::to_string(qi) + " doc " + std::to_string(di) +
                    ": indexed score disagrees with the direct formula");
        ++compared;
      }
      auto ranking = ranking_for(index, queries[qi]);
      if (run == 0) {
        first_rankings.push_back(ranking);
      } else {
        require(ranking == first_rankings[qi],
                "query " + std::to_string(qi) + ": ranking changed between runs");
      }
    }
  }

  // a term held by one of three equal-length docs scores exactly its idf
  drl::Bm25Index pinned(params);
  pinned.add_document({"sepsis", "lactate"});
  pinned.add_document({"chest", "pain"});
  pinned.add_document({"fever", "cough"});
  double pin = pinned.score({"sepsis"}, 0);
  require(std::abs(pin - kIdfPin) <= kIdfTol, "pinned single-term score drifted: " +
                                                  fmt("%.16f", pin));
  return std::to_string(compared) + " score pairs, max gap " + fmt("%.2e", worst) +
         ", rankings stable over 10 runs, pinned idf holds";
}

std::string check_topk_prefix_nesting() {
  const char* words[25] = {"alpha",   "bravo",   "charlie", "delta",  "echo",
                           "foxtrot", "golf",    "hotel",   "india",  "juliett",
                           "kilo",    "lima",    "mike",    "november", "oscar",
                           "papa",    "quebec",  "romeo",   "sierra", "tango",
                           "uniform", "victor",  "whiskey", "xray",   "yankee"};
  drl::KnowledgeBase kb;
  for (int i = 0; i < 25; ++i) {
    drl::Instruction inst;
    inst.title = std::string("sepsis marker ") + words[i];
    inst.error_type = "missed_fact";
    inst.trigger_keywords = {words[i]};
    if (i % 3 == 0) inst.situation_context = std::string("when reviewing ") + words[i] + " trends";
    inst.source_qid = "s" + std::to_string(i);
    auto out = kb.add_instruction(inst);
    require(out.added, "instruction " + std::to_string(i) + " was not stored");
  }
  require(kb.size() == 25, "store should hold 25 instructions");

  const std::string query = "sepsis marker";
  require(kb.retrieve_top_k(query, 0).empty(), "k=0 must return nothing");
  auto full = kb.retrieve_top_k(query, 10);
  require(full.size() == 10, "k=10 should fill all ten slots");
  for (size_t i = 0; i < full.size(); ++i)
    require(full[i].rank == i + 1, "ranks must be contiguous from 1");
  for (size_t k : {size_t(1), size_t(3), size_t(5)}) {
    auto part = kb.retrieve_top_k(query, k);
    require(part.size() == k, "k=" + std::to_string(k) + " should return k results");
    for (size_t i = 0; i < k; ++i) {
      require(part[i].instruction_id == full[i].instruction_id &&
                  part[i].created_seq == full[i].created_seq,
              "k=" + std::to_string(k) + " is not a prefix of k=10");
    }
  }

  std::vector<size_t> expected_ks = {0, 1, 3, 5, 10};
  require(drl::CliConfig{}.grid_ks == expected_ks,
          "default sweep columns are not {0,1,3,5,10}");
  return "k in {1,3,5} each a prefix of k=10; k=0 empty; default columns {0,1,3,5,10}";
}

std::string check_pipeline_replay() {
  auto t0 = std::chrono::steady_clock::now();
  auto& e = env();
  testutil::TempDir tmp("drlgate");

  drl::PromptConfig cfg;
  cfg.k = 3;

  auto run_once = [&](const std::string& stem, drl::KnowledgeBase* kb_out,
                      std::vector<drl::RetrievalResult>* retr_out, std::string* prompt_out) {
    drl::KnowledgeBase kb;
    auto mined = drl::mine_dataset(e.prov, e.train, kb, drl::MiningOptions{});
    require(mined.cases_skipped == 0, "a scripted mining case was skipped");
    require(kb.size() == 9, "mined store should hold 9 instructions, has " +
                                std::to_string(kb.size()));
    drl::save_kb(kb, tmp.path(stem + ".kb"));

    std::vector<drl::Prediction> preds;
    for (const auto& c : e.tests) preds.push_back(drl::infer(e.prov, kb, c, cfg));
    drl::write_predictions(preds, tmp.path(stem + ".preds"));

    if (prompt_out) *prompt_out = drl::assemble_prompt(kb, e.tests[0], cfg, nullptr, retr_out);
    if (kb_out) *kb_out = std::move(kb);
  };

  drl::KnowledgeBase kb;
  std::vector<drl::RetrievalResult> retrieved;
  std::string prompt;
  run_once("a", &kb, &retrieved, &prompt);
  run_once("b", nullptr, nullptr, nullptr);

  require(testutil::read_file(tmp.path("a.kb")) == testutil::read_file(tmp.path("b.kb")),
          "two mining runs produced different store files");
  require(testutil::read_file(tmp.path("a.preds")) == testutil::read_file(tmp.path("b.preds")),
          "two inference runs produced different prediction files");

  require(retrieved.size() == 3, "top-3 retrieval should inject 3 guidelines");
  size_t at = 0;
  for (size_t i = 0; i < retrieved.size(); ++i) {
    require(retrieved[i].rank == i + 1, "retrieved ranks must be 1,2,3");
    auto inst = kb.find_by_seq(retrieved[i].created_seq);
    require(inst.has_value(), "retrieved id not present in the store");
    std::string needle = "\n" + std::to_string(i + 1) + ". " + drl::render_instruction(*inst);
    size_t pos = prompt.find(needle, at);
    require(pos != std::string::npos, "guideline " + std::to_string(i + 1) +
                                          " is missing or out of rank order in the prompt");
    at = pos + 1;
  }

  double secs = seconds_since(t0);
  require(secs < kPipelineBudgetSec, "exceeded the 10 s budget: " + fmt("%.1f", secs) + " s");
  return "9 instructions, replay byte-identical, 3 guidelines in rank order, " +
         fmt("%.1f", secs) + " s";
}

std::string check_k0_equals_bare_prompt() {
  auto& e = env();
  drl::PromptConfig none;
  none.mode = drl::PromptMode::none;
  drl::PromptConfig k0;
  k0.k = 0;
  drl::PromptConfig icl0;
  icl0.mode = drl::PromptMode::icl;
  icl0.k = 0;

  size_t n = 0;
  for (const auto* set : {&e.train, &e.tests}) {
    for (const auto& c : *set) {
      auto bare = drl::assemble_prompt(e.kb_with, c, none, nullptr);
      require(drl::assemble_prompt(e.kb_with, c, k0, nullptr) == bare,
              c.qid + ": k=0 prompt differs from the bare prompt");
      require(drl::assemble_prompt(e.kb_with, c, icl0, &e.exemplars) == bare,
              c.qid + ": exemplar mode at k=0 differs from the bare prompt");
      ++n;
    }
  }
  return std::to_string(n) + " questions, k=0 byte-identical to the bare prompt";
}

std::string check_exemplar_overflow() {
  auto& e = env();
  drl::PromptConfig cfg;
  cfg.mode = drl::PromptMode::icl;
  cfg.k = 10;
  for (const auto& c : e.tests) {
    bool threw = false;
    try {
      drl::assemble_prompt(e.kb_with, c, cfg, &e.exemplars);
    } catch (const drl::PromptBudgetExceeded&) {
      threw = true;
    }
    require(threw, c.qid + ": ten long exemplars should overflow the prompt budget");
  }

  const auto& grid = fixture_grid();
  require(grid.rows.size() == 3 && grid.rows[2].label == "icl",
          "expected the exemplar row last in the sweep");
  const auto& cell = grid.rows[2].cells[4];  // k=10 column
  require(!cell.available, "the overflowing cell must be marked unavailable");
  require(drl::format_cell(cell) == "-", "unavailable cells must render as '-'");
  std::istringstream tsv(grid.render_tsv());
  std::string line;
  std::getline(tsv, line);
  while (std::getline(tsv, line))
    if (line.rfind("icl\t", 0) == 0) break;
  require(line.rfind("icl\t", 0) == 0 && line.size() >= 2 &&
              line.compare(line.size() - 2, 2, "\t-") == 0,
          "exemplar sweep row should end with an unavailable cell");
  return "all 4 questions overflow at k=10; sweep renders that cell as '-'";
}

std::string check_document_round_trip() {
  std::mt19937_64 rng(733003);
  for (int i = 0; i < kRoundTripGraphs; ++i) {
    auto g = testutil::random_valid_graph(rng);
    auto back = drl::parse_graph(drl::serialize_graph(g));
    require(drl::graph_to_json(back) == drl::graph_to_json(g),
            "graph " + std::to_string(i) + " changed across serialize/parse");
  }

  auto corpus = nlohmann::json::parse(
      testutil::read_file(testutil::fixtures_dir() / "corrupt_cases.json"));
  require(corpus.size() == 20, "corrupt corpus should hold 20 documents");
  size_t malformed = 0, schema = 0, integrity = 0;
  for (const auto& entry : corpus) {
    std::string expect = entry.at("expect");
    std::string got = "accepted";
    try {
      drl::parse_graph(entry.at("doc").get<std::string>());
    } catch (const drl::MalformedDocument&) {
      got = "malformed";
      ++malformed;
    } catch (const drl::SchemaViolation&) {
      got = "schema";
      ++schema;
    } catch (const drl::IntegrityViolation&) {
      got = "integrity";
      ++integrity;
    }
    require(got == expect, entry.at("name").get<std::string>() + ": expected " + expect +
                               ", got " + got);
  }
  return std::to_string(kRoundTripGraphs) + " round trips identical; 20 corrupt docs (" +
         std::to_string(malformed) + " malformed, " + std::to_string(schema) + " schema, " +
         std::to_string(integrity) + " integrity) all rejected in class";
}

std::string check_eval_shape() {
  auto& e = env();
  auto report = drl::run_eval(e.prov, e.kb_with, e.tests, drl::PromptConfig{}, 5);
  require(report.trials.size() == 5, "expected 5 trials");
  require(report.std_accuracy == 0.0, "repeated scripted runs must have exactly zero spread");
  for (const auto& t : report.trials)
    require(t.accuracy == report.mean_accuracy, "trial accuracy drifted between runs");
  drl::GridCell cell{true, report.mean_accuracy, report.std_accuracy};
  require(drl::format_cell(cell).ends_with("±0.00"), "mean/std cell should end with a zero std");

  const auto& grid = fixture_grid();
  std::vector<size_t> expected_ks = {0, 1, 3, 5, 10};
  require(grid.ks == expected_ks, "sweep columns are not {0,1,3,5,10}");
  require(grid.rows.size() == 3, "expected one row per store variant plus the exemplar row");
  require(grid.rows[0].label == "kb-with-rationale" && grid.rows[1].label == "kb-no-rationale" &&
              grid.rows[2].label == "icl",
          "row labels or order changed");
  for (const auto& row : grid.rows)
    require(row.cells.size() == expected_ks.size(), row.label + ": wrong cell count");
  std::istringstream tsv(grid.render_tsv());
  std::string header;
  std::getline(tsv, header);
  require(header == "variant\tTop-k=0\tTop-k=1\tTop-k=3\tTop-k=5\tTop-k=10",
          "sweep header changed");
  return "5 runs, std exactly 0; sweep is 3 rows x 5 Top-k columns";
}

}  // namespace

int main() {
  struct Check {
    const char* name;
    std::function<std::string()> body;
  };
  const std::vector<Check> checks = {
      {"graph distance matches exhaustive search", check_oracle_equivalence},
      {"total is the exact sum of its three penalties", check_penalty_sum_identity},
      {"comparing a graph with itself scores exactly zero", check_self_distance_zero},
      {"node kind weights hold exactly (1.0/1.5/2.0)", check_weight_ratios},
      {"retrieval scoring matches the direct formula", check_scoring_against_direct_formula},
      {"top-k results nest as prefixes and default columns hold", check_topk_prefix_nesting},
      {"scripted mining and inference replay byte-identically", check_pipeline_replay},
      {"k=0 reduces to the bare question prompt", check_k0_equals_bare_prompt},
      {"ten long exemplars overflow the budget and render '-'", check_exemplar_overflow},
      {"documents survive serialize/parse; corrupt docs classify", check_document_round_trip},
      {"repeated runs report zero spread; sweep shape holds", check_eval_shape},
  };

  int failed = 0;
  for (const auto& c : checks) {
    std::string detail;
    bool ok = true;
    try {
      detail = c.body();
    } catch (const std::exception& ex) {
      ok = false;
      detail = ex.what();
    }
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << c.name << ": " << detail << "\n";
    if (!ok) ++failed;
  }
  std::cout << (checks.size() - size_t(failed)) << " of " << checks.size() << " checks passed\n";
  return failed == 0 ? 0 : 1;
}
