#include "drl/mining.hpp"

#include "drl/errors.hpp"
#include "drl/prompts.hpp"
#include "drl/text.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace drl {

namespace {

// pulls a JSON object out of raw model text: whole text, else first fenced block
nlohmann::json parse_json_loose(const std::string& raw, const char* what) {
  std::string body = trim(raw);
  nlohmann::json o = nlohmann::json::parse(body, nullptr, false);
  if (!o.is_discarded()) return o;
  size_t fence = body.find("```");
  while (fence != std::string::npos) {
    size_t start = body.find('\n', fence);
    if (start == std::string::npos) break;
    size_t end = body.find("```", start);
    if (end == std::string::npos) break;
    o = nlohmann::json::parse(body.substr(start + 1, end - start - 1), nullptr, false);
    if (!o.is_discarded()) return o;
    fence = body.find("```", end + 3);
  }
  // last resort: outermost brace span
  size_t open = body.find('{');
  size_t close = body.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    o = nlohmann::json::parse(body.substr(open, close - open + 1), nullptr, false);
    if (!o.is_discarded()) return o;
  }
  throw JudgeParseFailure(std::string(what) + ": no parseable JSON object in response");
}

}  // namespace

ReasoningGraph extract_graph(Provider& prov, const QaCase& c, const std::string& answer_for_graph,
                             const std::optional<std::string>& rationale, int max_output) {
  std::string prompt = prompts::extraction_prompt(render_question(c), answer_for_graph,
                                                  "graph-" + c.qid, c.qid, rationale);
  ChatRequest req;
  req.user = prompt;
  req.tag = Tag::extract;
  req.max_output = max_output;

  std::string first_error;
  try {
    return parse_graph(prov.complete(req).text);
  } catch (const Error& e) {
    if (dynamic_cast<const ProviderFailure*>(&e)) throw;
    first_error = e.what();
  }

  ChatRequest retry = req;
  retry.user += "\n\n## REPAIR NOTE:\nThe previous output was rejected: " + first_error +
                "\nReturn ONLY a corrected JSON object that satisfies the schema.";
  try {
    return parse_graph(prov.complete(retry).text);
  } catch (const Error& e) {
    if (dynamic_cast<const ProviderFailure*>(&e)) throw;
    throw ExtractionFailure("extraction failed twice for qid " + c.qid + ": " + e.what());
  }
}

std::pair<std::string, std::string> agent_solve(Provider& prov, const QaCase& c,
                                                const std::vector<Instruction>& guidelines,
                                                const PromptConfig& cfg, double temperature,
                                                int max_output) {
  std::vector<std::string> items;
  for (const auto& inst : guidelines) items.push_back(render_instruction(inst, cfg.render_full));
  std::string prompt = build_prompt(render_question(c), items, cfg);

  ChatRequest req;
  req.user = prompt;
  req.tag = Tag::agent;
  req.temperature = temperature;
  req.max_output = max_output;
  ChatResponse resp = prov.complete(req);
  return {parse_answer(resp.text, c.task()), resp.text};
}

DiscrepancyReport analyze_case_deterministic(const ReasoningGraph& ref,
                                             const ReasoningGraph& agent, bool answer_correct,
                                             const WeightConfig& cfg) {
  DiscrepancyReport report = diff_graphs(ref, agent, cfg);
  report.sanity_flags = sanity_check(report, answer_correct);
  return report;
}

namespace {

double require_penalty(const nlohmann::json& ged, const char* key) {
  if (!ged.contains(key) || !ged[key].is_number())
    throw JudgeParseFailure(std::string("ged_calculation missing numeric '") + key + "'");
  return ged[key].get<double>();
}

// judge edge lists arrive in whatever shape the model chose; accept strings
// ("F1->H1", "F1 -> H1 : supports"), [src,dst,type] arrays and {src,dst,type} objects
std::optional<EdgeKey> edge_from_json(const nlohmann::json& e) {
  if (e.is_string()) {
    std::string s = e.get<std::string>();
    size_t arrow = s.find("->");
    if (arrow == std::string::npos) return EdgeKey{trim(s), "", ""};
    std::string src = trim(s.substr(0, arrow));
    std::string rest = s.substr(arrow + 2);
    size_t colon = rest.find(':');
    std::string dst = colon == std::string::npos ? trim(rest) : trim(rest.substr(0, colon));
    std::string type = colon == std::string::npos ? "" : trim(rest.substr(colon + 1));
    return EdgeKey{src, dst, type};
  }
  if (e.is_array() && e.size() >= 2) {
    auto part = [&](size_t i) { return i < e.size() && e[i].is_string() ? e[i].get<std::string>() : std::string(); };
    return EdgeKey{part(0), part(1), part(2)};
  }
  if (e.is_object()) {
    auto part = [&](const char* k) {
      return e.contains(k) && e[k].is_string() ? e[k].get<std::string>() : std::string();
    };
    return EdgeKey{part("src"), part("dst"), part("type")};
  }
  return std::nullopt;
}

Severity severity_from_name(const std::string& s, double fallback_penalty) {
  if (s == "none") return Severity::none;
  if (s == "minor") return Severity::minor;
  if (s == "moderate") return Severity::moderate;
  if (s == "severe") return Severity::severe;
  return severity_for(fallback_penalty);
}

}  // namespace

JudgeAnalysis analyze_case_judge(Provider& prov, const QaCase& c, const ReasoningGraph& ref,
                                 const ReasoningGraph& agent, bool answer_correct,
                                 int max_output) {
  ChatRequest req;
  req.user = prompts::judge_prompt(render_question(c), c.answer, answer_correct, c.qid, ref, agent);
  req.tag = Tag::judge;
  req.max_output = max_output;
  ChatResponse resp = prov.complete(req);

  nlohmann::json o = parse_json_loose(resp.text, "judge");
  if (!o.is_object() || !o.contains("ged_calculation") || !o["ged_calculation"].is_object())
    throw JudgeParseFailure("judge output lacks a ged_calculation object");
  const auto& ged = o["ged_calculation"];

  JudgeAnalysis out;
  DiscrepancyReport& r = out.report;
  r.node_mismatch_penalty = require_penalty(ged, "node_mismatch_penalty");
  r.hallucination_penalty = require_penalty(ged, "hallucination_penalty");
  r.reasoning_path_penalty = require_penalty(ged, "reasoning_path_penalty");
  double sum = r.node_mismatch_penalty + r.hallucination_penalty + r.reasoning_path_penalty;
  double stated = ged.contains("total_ged_score") && ged["total_ged_score"].is_number()
                      ? ged["total_ged_score"].get<double>()
                      : sum;
  r.total_ged_score = sum;
  if (std::fabs(stated - sum) > 1e-6) {
    r.sanity_flags.push_back("judge-formula-corrected");
    std::ostringstream note;
    note << "judge stated total " << stated << " replaced by penalty sum " << sum;
    out.notices.push_back(note.str());
  }

  if (o.contains("node_matching") && o["node_matching"].is_object()) {
    const auto& nm = o["node_matching"];
    auto count = [&](const char* k) {
      return nm.contains(k) && nm[k].is_number_integer() ? nm[k].get<int>() : 0;
    };
    r.matched_facts = count("matched_facts");
    r.matched_hypotheses = count("matched_hypotheses");
    r.matched_actions = count("matched_actions");
    if (nm.contains("hallucinated_nodes") && nm["hallucinated_nodes"].is_array())
      for (const auto& h : nm["hallucinated_nodes"])
        if (h.is_string()) r.match_set.unmatched_agent.insert(h.get<std::string>());
    std::string sev = nm.contains("hallucination_severity") && nm["hallucination_severity"].is_string()
                          ? nm["hallucination_severity"].get<std::string>()
                          : std::string();
    r.hallucination_severity = severity_from_name(sev, r.hallucination_penalty);
  } else {
    r.hallucination_severity = severity_for(r.hallucination_penalty);
  }

  if (o.contains("graph_structure") && o["graph_structure"].is_object()) {
    const auto& gs = o["graph_structure"];
    if (gs.contains("missing_edges") && gs["missing_edges"].is_array())
      for (const auto& e : gs["missing_edges"])
        if (auto key = edge_from_json(e)) r.edge_diff.missing_edges.insert(*key);
    if (gs.contains("extra_edges") && gs["extra_edges"].is_array())
      for (const auto& e : gs["extra_edges"])
        if (auto key = edge_from_json(e)) r.edge_diff.extra_edges.insert(*key);
  }

  if (o.contains("improvement_instructions") && o["improvement_instructions"].is_array()) {
    size_t idx = 0;
    for (const auto& entry : o["improvement_instructions"]) {
      ++idx;
      try {
        Instruction inst = instruction_from_json(entry);
        inst.source_qid = c.qid;
        out.instructions.push_back(std::move(inst));
      } catch (const SchemaViolation& e) {
        std::ostringstream note;
        note << "improvement_instructions[" << idx - 1 << "] dropped: " << e.what();
        out.notices.push_back(note.str());
      }
    }
  }

  auto flags = sanity_check(r, answer_correct);
  r.sanity_flags.insert(r.sanity_flags.end(), flags.begin(), flags.end());
  return out;
}

namespace {

struct CategoryBucket {
  std::vector<std::string> labels;
  bool present() const { return !labels.empty(); }
};

std::string label_of(const ReasoningGraph& g, const std::string& id) {
  auto view = find_node(g, id);
  return view ? *view->label : id;
}

Instruction templated_instruction(const std::string& error_type, const std::string& title,
                                  const std::string& what_went_wrong,
                                  const std::vector<std::string>& labels, const QaCase& c) {
  Instruction inst;
  inst.title = title;
  inst.error_type = error_type;
  inst.clinical_domain = "general";
  inst.situation_context =
      "This instruction applies when: a case involves " + join(labels, ", ");
  inst.example_situation = "For example: case " + c.qid + " involved " + join(labels, ", ");
  for (const auto& label : labels)
    inst.similar_case_patterns.push_back("Pattern: case context mentions " + label);
  inst.what_went_wrong = what_went_wrong;
  inst.why_it_matters = "Overlooking these elements can change the conclusion for similar cases.";
  inst.potential_risks = {"Risk: the same reasoning gap recurs on similar presentations"};
  for (const auto& label : labels)
    inst.prevention_steps.push_back("Step: verify and document " + label);
  inst.prevention_steps.push_back("Step: re-check the reasoning chain before answering");
  inst.contraindications = {"DO NOT: conclude before accounting for every listed element"};
  std::set<std::string> kw;
  for (const auto& label : labels)
    for (const auto& tok : tokenize(label)) kw.insert(tok);
  inst.trigger_keywords.assign(kw.begin(), kw.end());
  inst.medical_principle = "Complete evidence review precedes the final conclusion.";
  inst.similar_case_examples = "Applies to cases resembling " + c.qid + ".";
  inst.source_qid = c.qid;
  return inst;
}

}  // namespace

std::vector<Instruction> generate_insight_deterministic(const DiscrepancyReport& report,
                                                        const ReasoningGraph& ref,
                                                        const ReasoningGraph& agent,
                                                        const QaCase& c) {
  CategoryBucket missing_facts, missing_hyps, action_gap, reasoning;

  // judge-path reports may list labels rather than ids; unresolvable entries land in
  // the reasoning bucket with the raw text as label
  for (const auto& id : report.match_set.unmatched_ref) {
    auto view = find_node(ref, id);
    if (!view) {
      reasoning.labels.push_back(id);
      continue;
    }
    switch (view->kind) {
      case NodeKind::fact: missing_facts.labels.push_back(*view->label); break;
      case NodeKind::hypothesis: missing_hyps.labels.push_back(*view->label); break;
      case NodeKind::action: action_gap.labels.push_back(*view->label); break;
    }
  }
  for (const auto& id : report.match_set.unmatched_agent) {
    auto view = find_node(agent, id);
    if (!view) {
      reasoning.labels.push_back(id);
      continue;
    }
    // hallucinated actions are treatment errors; other hallucinations are reasoning gaps
    if (view->kind == NodeKind::action)
      action_gap.labels.push_back(*view->label);
    else
      reasoning.labels.push_back(*view->label);
  }
  for (const auto& [src, dst, type] : report.edge_diff.missing_edges) {
    reasoning.labels.push_back(label_of(ref, src));
    reasoning.labels.push_back(label_of(ref, dst));
    (void)type;
  }
  for (const auto& [src, dst, type] : report.edge_diff.extra_edges) {
    reasoning.labels.push_back(label_of(agent, src));
    reasoning.labels.push_back(label_of(agent, dst));
    (void)type;
  }

  auto dedup = [](std::vector<std::string>& v) {
    std::vector<std::string> out;
    for (auto& s : v)
      if (s != "FINAL" && std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    v = std::move(out);
  };
  dedup(missing_facts.labels);
  dedup(missing_hyps.labels);
  dedup(action_gap.labels);
  dedup(reasoning.labels);

  std::vector<Instruction> out;
  if (missing_facts.present())
    out.push_back(templated_instruction(
        "missed_fact", "Missed finding: " + join(missing_facts.labels, "; "),
        "The agent's reasoning omitted documented findings: " + join(missing_facts.labels, "; "),
        missing_facts.labels, c));
  if (missing_hyps.present())
    out.push_back(templated_instruction(
        "diagnosis_error", "Missed diagnosis: " + join(missing_hyps.labels, "; "),
        "The agent failed to consider: " + join(missing_hyps.labels, "; "), missing_hyps.labels,
        c));
  if (action_gap.present())
    out.push_back(templated_instruction(
        "treatment_error", "Action gap: " + join(action_gap.labels, "; "),
        "Documented or indicated actions were mishandled: " + join(action_gap.labels, "; "),
        action_gap.labels, c));
  if (reasoning.present() || !report.edge_diff.missing_edges.empty() ||
      !report.edge_diff.extra_edges.empty()) {
    std::vector<std::string> labels = reasoning.labels;
    if (labels.empty()) labels.push_back("the documented reasoning chain");
    std::ostringstream wrong;
    wrong << "Reasoning structure diverged: " << report.edge_diff.missing_edges.size()
          << " missing and " << report.edge_diff.extra_edges.size() << " extra link(s)";
    out.push_back(templated_instruction("reasoning_error",
                                        "Reasoning path gap: " + join(labels, "; "),
                                        wrong.str(), labels, c));
  }
  return out;
}

std::vector<Instruction> generate_insight_llm(Provider& prov, const QaCase& c,
                                              const ReasoningGraph& ref,
                                              const ReasoningGraph& agent, bool answer_correct,
                                              std::vector<std::string>* notices, int max_output) {
  ChatRequest req;
  req.user = prompts::judge_prompt(render_question(c), c.answer, answer_correct, c.qid, ref, agent);
  req.tag = Tag::insight;
  req.max_output = max_output;
  ChatResponse resp = prov.complete(req);

  nlohmann::json o;
  try {
    o = parse_json_loose(resp.text, "insight");
  } catch (const JudgeParseFailure& e) {
    throw InsightParseFailure(e.what());
  }
  if (!o.contains("improvement_instructions") || !o["improvement_instructions"].is_array())
    throw InsightParseFailure("insight output lacks an improvement_instructions array");

  std::vector<Instruction> out;
  size_t idx = 0;
  for (const auto& entry : o["improvement_instructions"]) {
    ++idx;
    try {
      Instruction inst = instruction_from_json(entry);
      inst.source_qid = c.qid;
      out.push_back(std::move(inst));
    } catch (const SchemaViolation& e) {
      if (notices) {
        std::ostringstream note;
        note << "improvement_instructions[" << idx - 1 << "] dropped: " << e.what();
        notices->push_back(note.str());
      }
    }
  }
  return out;
}

namespace {

// gate for instruction generation; judge reports may carry penalties without
// listing concrete nodes, so a positive total also opens the gate
bool report_open(const DiscrepancyReport& r) {
  return nonempty(r) || r.total_ged_score > 0.0;
}

void mine_one(Provider& prov, const QaCase& c, const MiningOptions& opts, MiningRecord& rec) {
  rec.qid = c.qid;
  try {
    std::optional<std::string> rationale;
    if (opts.use_rationale && c.rationale) rationale = c.rationale;
    rec.ref_graph = extract_graph(prov, c, c.answer, rationale, opts.max_output);

    PromptConfig solve_cfg = opts.prompt;
    auto [answer, cot] = agent_solve(prov, c, {}, solve_cfg, opts.agent_temperature,
                                     opts.max_output);
    rec.agent_answer = answer;
    rec.agent_cot = cot;
    rec.answer_correct = (answer == normalize_answer(c.answer, c.task()));

    rec.agent_graph = extract_graph(prov, c, cot, std::nullopt, opts.max_output);

    if (opts.analysis == AnalysisMode::judge) {
      JudgeAnalysis ja = analyze_case_judge(prov, c, *rec.ref_graph, *rec.agent_graph,
                                            rec.answer_correct, opts.max_output);
      rec.report = std::move(ja.report);
      rec.notices.insert(rec.notices.end(), ja.notices.begin(), ja.notices.end());
      if (report_open(*rec.report)) {
        if (opts.insight == InsightMode::llm && !ja.instructions.empty()) {
          rec.candidates = std::move(ja.instructions);  // judge output already carries them
        } else if (opts.insight == InsightMode::llm) {
          rec.candidates = generate_insight_llm(prov, c, *rec.ref_graph, *rec.agent_graph,
                                                rec.answer_correct, &rec.notices,
                                                opts.max_output);
        } else {
          rec.candidates = generate_insight_deterministic(*rec.report, *rec.ref_graph,
                                                          *rec.agent_graph, c);
        }
      }
    } else {
      rec.report = analyze_case_deterministic(*rec.ref_graph, *rec.agent_graph,
                                              rec.answer_correct, opts.weights);
      if (report_open(*rec.report)) {
        if (opts.insight == InsightMode::llm) {
          rec.candidates = generate_insight_llm(prov, c, *rec.ref_graph, *rec.agent_graph,
                                                rec.answer_correct, &rec.notices,
                                                opts.max_output);
        } else {
          rec.candidates = generate_insight_deterministic(*rec.report, *rec.ref_graph,
                                                          *rec.agent_graph, c);
        }
      }
    }
  } catch (const std::exception& e) {
    rec.skipped = true;
    rec.skip_reason = e.what();
    rec.candidates.clear();
  }
}

}  // namespace

MiningResult mine_dataset(Provider& prov, const std::vector<QaCase>& dataset, KnowledgeBase& kb,
                          const MiningOptions& opts) {
  {
    std::set<std::string> qids;
    for (const auto& c : dataset)
      if (!qids.insert(c.qid).second)
        throw DatasetFormatFailure("duplicate qid in dataset: " + c.qid);
  }

  MiningResult result;
  result.records.resize(dataset.size());

  int jobs = std::max(1, opts.jobs);
  if (jobs == 1 || dataset.size() <= 1) {
    for (size_t i = 0; i < dataset.size(); ++i)
      mine_one(prov, dataset[i], opts, result.records[i]);
  } else {
    std::atomic<size_t> next{0};
    auto worker = [&] {
      for (;;) {
        size_t i = next.fetch_add(1);
        if (i >= dataset.size()) return;
        mine_one(prov, dataset[i], opts, result.records[i]);
      }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  // serial fold keeps created_seq assignment in dataset order
  for (auto& rec : result.records) {
    if (rec.skipped) {
      ++result.cases_skipped;
      continue;
    }
    for (auto& inst : rec.candidates) {
      AddOutcome outcome = kb.add_instruction(inst);
      if (outcome.added) {
        auto stored = kb.find_by_seq(outcome.created_seq);
        rec.instructions_added.push_back(stored ? stored->instruction_id : inst.instruction_id);
        ++result.instructions_added;
      } else {
        rec.notices.push_back(outcome.note);
      }
    }
  }
  return result;
}

void write_mining_records(const std::vector<MiningRecord>& records,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreWriteFailure("cannot open records file for writing: " + path.string());
  for (const auto& rec : records) {
    nlohmann::json o = {{"qid", rec.qid},
                        {"skipped", rec.skipped},
                        {"answer_correct", rec.answer_correct},
                        {"agent_answer", rec.agent_answer},
                        {"instructions_added", rec.instructions_added}};
    if (rec.skipped) o["skip_reason"] = rec.skip_reason;
    if (rec.report) {
      o["node_mismatch_penalty"] = rec.report->node_mismatch_penalty;
      o["hallucination_penalty"] = rec.report->hallucination_penalty;
      o["reasoning_path_penalty"] = rec.report->reasoning_path_penalty;
      o["total_ged_score"] = rec.report->total_ged_score;
      o["sanity_flags"] = rec.report->sanity_flags;
    }
    if (!rec.notices.empty()) o["notices"] = rec.notices;
    out << o.dump() << "\n";
  }
  if (!out.good()) throw StoreWriteFailure("write failed: " + path.string());
}

}  // namespace drl
