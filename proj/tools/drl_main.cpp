#include "drl/config.hpp"
#include "drl/dataset.hpp"
#include "drl/discrepancy.hpp"
#include "drl/errors.hpp"
#include "drl/evalharness.hpp"
#include "drl/graph.hpp"
#include "drl/inference.hpp"
#include "drl/kb.hpp"
#include "drl/mining.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using namespace drl;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw StoreWriteFailure("cannot write: " + path.string());
  out << content;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

std::string fmt4(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

KnowledgeBase load_kb_or_die(const std::string& path, const CliConfig& cfg) {
  KbLoadResult loaded = load_kb(path, cfg.bm25);
  if (loaded.corrupt_lines > 0)
    std::cerr << "warning: " << loaded.corrupt_lines << " corrupt line(s) skipped in " << path
              << "\n";
  return std::move(loaded.kb);
}

int cmd_mine(const CliConfig& cfg, const std::string& train_path, const std::string& kb_path,
             const std::string& records_path, const MiningOptions& opts) {
  std::vector<QaCase> dataset = load_dataset(train_path);
  if (dataset.empty()) throw DatasetFormatFailure("training set is empty: " + train_path);

  auto provider = make_provider(cfg);
  KnowledgeBase kb(cfg.bm25);
  MiningResult result = mine_dataset(*provider, dataset, kb, opts);

  for (const auto& rec : result.records) {
    if (rec.skipped) {
      std::cout << rec.qid << "  skipped: " << rec.skip_reason << "\n";
      continue;
    }
    std::cout << rec.qid << "  total_ged_score=" << fmt4(rec.report->total_ged_score)
              << "  added=" << rec.instructions_added.size()
              << (rec.answer_correct ? "  answer=correct" : "  answer=incorrect") << "\n";
  }
  save_kb(kb, kb_path);
  std::cout << "kb: " << kb.size() << " instruction(s) -> " << kb_path << "\n";
  if (!records_path.empty()) {
    write_mining_records(result.records, records_path);
    std::cout << "records -> " << records_path << "\n";
  }
  if (result.cases_skipped > 0)
    std::cout << "skipped " << result.cases_skipped << " case(s)\n";
  return 0;
}

int cmd_infer(const CliConfig& cfg, const std::string& kb_path, const std::string& question,
              const std::string& qid, const std::string& testset_path,
              const std::string& exemplars_path, const std::string& predictions_path,
              bool show_prompt, bool as_json) {
  KnowledgeBase kb = load_kb_or_die(kb_path, cfg);
  std::optional<ExemplarStore> exemplars;
  if (!exemplars_path.empty()) exemplars = load_exemplars(exemplars_path, cfg.bm25);
  if (cfg.prompt.mode == PromptMode::icl && !exemplars)
    throw ConfigError("icl mode requires --exemplars");

  std::vector<QaCase> cases;
  if (!testset_path.empty()) {
    cases = load_dataset(testset_path);
    if (cases.empty()) throw DatasetFormatFailure("testset is empty: " + testset_path);
  } else {
    QaCase c;
    c.qid = qid.empty() ? "q" : qid;
    c.question = question;
    c.answer = "?";  // unknown gold; scoring is not this command's job
    cases.push_back(std::move(c));
  }

  auto provider = make_provider(cfg);
  std::vector<Prediction> preds;
  int parse_failures = 0;
  for (const auto& c : cases) {
    std::string prompt;
    try {
      Prediction pred =
          infer(*provider, kb, c, cfg.prompt, exemplars ? &*exemplars : nullptr, &prompt);
      if (show_prompt) std::cout << "--- prompt (" << c.qid << ") ---\n" << prompt << "\n---\n";
      if (as_json) {
        nlohmann::json ids = nlohmann::json::array();
        for (const auto& r : pred.retrieved) ids.push_back(r.instruction_id);
        nlohmann::json o = {{"qid", pred.qid},
                            {"answer", pred.answer},
                            {"k_used", pred.k_used},
                            {"retrieved", ids},
                            {"prompt_chars", pred.prompt_chars}};
        std::cout << o.dump() << "\n";
      } else {
        std::cout << pred.qid << "  answer=" << pred.answer << "  k_used=" << pred.k_used << "\n";
        for (const auto& r : pred.retrieved)
          std::cout << "  [" << r.rank << "] " << r.instruction_id << "  score="
                    << fmt4(r.score) << "\n";
      }
      preds.push_back(std::move(pred));
    } catch (const AnswerParseFailure& e) {
      if (show_prompt && !prompt.empty())
        std::cout << "--- prompt (" << c.qid << ") ---\n" << prompt << "\n---\n";
      std::cerr << c.qid << "  answer parse failure: " << e.what() << "\n";
      ++parse_failures;
    }
  }
  if (!predictions_path.empty()) {
    write_predictions(preds, predictions_path);
    std::cout << "predictions -> " << predictions_path << "\n";
  }
  return parse_failures > 0 ? 1 : 0;
}

int cmd_eval(const CliConfig& cfg, const std::string& kb_path, const std::string& testset_path,
             const std::string& exemplars_path) {
  KnowledgeBase kb = load_kb_or_die(kb_path, cfg);
  std::vector<QaCase> testset = load_dataset(testset_path);
  if (testset.empty()) throw DatasetFormatFailure("testset is empty: " + testset_path);
  std::optional<ExemplarStore> exemplars;
  if (!exemplars_path.empty()) exemplars = load_exemplars(exemplars_path, cfg.bm25);
  if (cfg.prompt.mode == PromptMode::icl && !exemplars)
    throw ConfigError("icl mode requires --exemplars");

  auto provider = make_provider(cfg);
  EvalReport report = run_eval(*provider, kb, testset, cfg.prompt, cfg.runs,
                               exemplars ? &*exemplars : nullptr, cfg.jobs);

  std::cout << "runs=" << cfg.runs << " cases=" << testset.size() << " mode="
            << prompt_mode_name(cfg.prompt.mode) << " k=" << cfg.prompt.k << "\n";
  for (const auto& t : report.trials)
    std::cout << "  run " << t.run_index << ": " << t.correct << "/" << t.total
              << " failures=" << t.failures << "\n";
  std::cout << "accuracy " << fmt2(report.mean_accuracy * 100.0) << "±"
            << fmt2(report.std_accuracy * 100.0) << " % (population std)\n";

  fs::path out_dir(cfg.out_dir);
  write_file(out_dir / "eval_report.json", eval_report_to_json(report).dump(2) + "\n");
  std::cout << "report -> " << (out_dir / "eval_report.json").string() << "\n";
  return 0;
}

int cmd_grid(const CliConfig& cfg, const std::vector<std::string>& kb_specs,
             const std::string& testset_path, const std::string& exemplars_path, bool remine,
             const std::string& train_path, const MiningOptions& mine_opts) {
  std::vector<QaCase> testset = load_dataset(testset_path);
  if (testset.empty()) throw DatasetFormatFailure("testset is empty: " + testset_path);
  std::optional<ExemplarStore> exemplars;
  if (!exemplars_path.empty()) exemplars = load_exemplars(exemplars_path, cfg.bm25);

  auto provider = make_provider(cfg);

  std::vector<KnowledgeBase> kbs;
  std::vector<KbVariant> variants;
  if (remine) {
    if (train_path.empty()) throw ConfigError("--remine requires --train");
    std::vector<QaCase> train = load_dataset(train_path);
    // one freshly mined KB per rationale variant, in place of stored files
    for (bool with_rationale : {true, false}) {
      MiningOptions opts = mine_opts;
      opts.use_rationale = with_rationale;
      KnowledgeBase kb(cfg.bm25);
      mine_dataset(*provider, train, kb, opts);
      kbs.push_back(std::move(kb));
      variants.push_back({with_rationale ? "drl remined with-rationale" : "drl remined no-rationale",
                          nullptr});
    }
  } else {
    if (kb_specs.empty() && !exemplars)
      throw ConfigError("grid requires at least one --kb label=path or --exemplars");
    for (const auto& spec : kb_specs) {
      size_t eq = spec.find('=');
      std::string label = eq == std::string::npos ? spec : spec.substr(0, eq);
      std::string path = eq == std::string::npos ? spec : spec.substr(eq + 1);
      kbs.push_back(load_kb_or_die(path, cfg));
      variants.push_back({label, nullptr});
    }
  }
  for (size_t i = 0; i < kbs.size(); ++i) variants[i].kb = &kbs[i];

  GridReport grid = run_ablation_grid(*provider, variants, exemplars ? &*exemplars : nullptr,
                                      testset, cfg.grid_ks, cfg.runs, cfg.prompt, cfg.jobs);

  std::cout << grid.render_text();
  fs::path out_dir(cfg.out_dir);
  write_file(out_dir / "grid.tsv", grid.render_tsv());
  write_file(out_dir / "grid.txt", grid.render_text());
  std::cout << "grid -> " << (out_dir / "grid.tsv").string() << "\n";
  return 0;
}

int cmd_graph_validate(const std::string& path) {
  auto [graph, report] = parse_graph_report(read_file(path));
  (void)graph;
  for (const auto& v : report.violations)
    std::cout << (v.kind == Violation::Kind::schema ? "schema" : "integrity") << "  " << v.where
              << ": " << v.message << "\n";
  for (const auto& w : report.warnings) std::cout << "warning  " << w << "\n";
  if (report.ok()) {
    std::cout << "ok\n";
    return 0;
  }
  std::cout << report.violations.size() << " violation(s)\n";
  return 2;
}

int cmd_graph_diff(const CliConfig& cfg, const std::string& ref_path,
                   const std::string& agent_path, double max_ged, bool as_json) {
  ReasoningGraph ref = parse_graph(read_file(ref_path));
  ReasoningGraph agent = parse_graph(read_file(agent_path));
  DiscrepancyReport report = diff_graphs(ref, agent, cfg.weights);

  if (as_json) {
    std::cout << report_to_json(report, true, ref.qid).dump(2) << "\n";
  } else {
    std::cout << "node_mismatch_penalty   " << fmt4(report.node_mismatch_penalty) << "\n"
              << "hallucination_penalty   " << fmt4(report.hallucination_penalty) << "\n"
              << "reasoning_path_penalty  " << fmt4(report.reasoning_path_penalty) << "\n"
              << "total_ged_score         " << fmt4(report.total_ged_score) << "\n"
              << "hallucination_severity  " << severity_name(report.hallucination_severity)
              << "\n";
    auto label_of = [](const ReasoningGraph& g, const std::string& id) {
      auto v = find_node(g, id);
      return v ? *v->label : id;
    };
    for (const auto& id : report.match_set.unmatched_ref)
      std::cout << "missing node    " << id << " (" << label_of(ref, id) << ")\n";
    for (const auto& id : report.match_set.unmatched_agent)
      std::cout << "hallucinated    " << id << " (" << label_of(agent, id) << ")\n";
    for (const auto& [src, dst, type] : report.edge_diff.missing_edges)
      std::cout << "missing edge    " << src << " -> " << dst << " (" << type << ")\n";
    for (const auto& [src, dst, type] : report.edge_diff.extra_edges)
      std::cout << "extra edge      " << src << " -> " << dst << " (" << type << ")\n";
  }
  return report.total_ged_score <= max_ged ? 0 : 1;
}

int cmd_kb_list(const CliConfig& cfg, const std::string& kb_path) {
  KnowledgeBase kb = load_kb_or_die(kb_path, cfg);
  for (const auto& inst : kb.instructions())
    std::cout << inst.instruction_id.substr(0, 12) << "  " << inst.error_type << "  "
              << inst.title << "\n";
  std::cout << kb.size() << " instruction(s)\n";
  return 0;
}

int cmd_kb_search(const CliConfig& cfg, const std::string& kb_path, const std::string& query,
                  size_t k) {
  KnowledgeBase kb = load_kb_or_die(kb_path, cfg);
  auto results = kb.retrieve_top_k(query, k);
  for (const auto& r : results) {
    auto inst = kb.find_by_seq(r.created_seq);
    std::cout << "[" << r.rank << "] score=" << fmt4(r.score) << "  "
              << r.instruction_id.substr(0, 12) << "  " << (inst ? inst->title : "?") << "\n";
  }
  if (results.empty()) std::cout << "no matches\n";
  return 0;
}

int cmd_kb_show(const CliConfig& cfg, const std::string& kb_path, const std::string& id) {
  KnowledgeBase kb = load_kb_or_die(kb_path, cfg);
  auto inst = kb.find_by_id(id);
  if (!inst) {
    // prefix match is handy when ids come from kb list output
    for (const auto& cand : kb.instructions())
      if (cand.instruction_id.rfind(id, 0) == 0) {
        inst = cand;
        break;
      }
  }
  if (!inst) throw UnknownDocument("no instruction with id " + id);
  std::cout << instruction_to_json(*inst).dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differential reasoning pipeline: mine corrective instructions from reasoning-graph "
               "diffs, retrieve them with BM25, inject them at inference time"};
  app.require_subcommand(1);
  app.fallthrough();  // global options may appear after the subcommand name

  std::string config_path, provider_kind, mock_script, provider_url, provider_key, provider_model;
  std::string out_dir, guideline_header, prompt_mode, grid_ks_csv;
  long seed = 0;
  int jobs = 0, runs = 0;
  size_t top_k = 0, char_budget = 0;
  double w_fact = 0, w_hyp = 0, w_action = 0, tau = 0, bm25_k1 = 0, bm25_b = 0;
  bool render_full = false, options_in_query = false;

  auto* opt_config = app.add_option("--config", config_path, "key=value config file");
  auto* opt_provider = app.add_option("--provider", provider_kind, "mock|http")
                           ->check(CLI::IsMember({"mock", "http"}));
  auto* opt_script = app.add_option("--mock-script", mock_script, "mock provider script path");
  auto* opt_url = app.add_option("--provider-url", provider_url, "http provider base url");
  auto* opt_key = app.add_option("--provider-key", provider_key, "http provider api key");
  auto* opt_model = app.add_option("--provider-model", provider_model, "http provider model");
  auto* opt_out = app.add_option("--out", out_dir, "report output directory");
  auto* opt_jobs = app.add_option("--jobs", jobs, "max concurrent cases")->check(CLI::PositiveNumber);
  auto* opt_runs = app.add_option("--runs", runs, "evaluation repetitions")->check(CLI::PositiveNumber);
  auto* opt_seed = app.add_option("--seed", seed, "request seed passed to http providers");
  auto* opt_k = app.add_option("--top-k", top_k, "instructions to retrieve");
  auto* opt_mode = app.add_option("--mode", prompt_mode, "drl|icl|none")
                       ->check(CLI::IsMember({"drl", "icl", "none"}));
  auto* opt_budget = app.add_option("--char-budget", char_budget, "prompt character budget")
                         ->check(CLI::PositiveNumber);
  auto* opt_header = app.add_option("--guideline-header", guideline_header, "guideline block header");
  auto* opt_wf = app.add_option("--weight-fact", w_fact, "fact node weight");
  auto* opt_wh = app.add_option("--weight-hypothesis", w_hyp, "hypothesis node weight");
  auto* opt_wa = app.add_option("--weight-action", w_action, "action node weight");
  auto* opt_tau = app.add_option("--tau", tau, "node match threshold");
  auto* opt_k1 = app.add_option("--bm25-k1", bm25_k1, "BM25 k1");
  auto* opt_b = app.add_option("--bm25-b", bm25_b, "BM25 b");
  auto* opt_ks = app.add_option("--k", grid_ks_csv, "grid k values, comma separated");
  auto* flag_full = app.add_flag("--render-full", render_full, "inject full instruction records");
  auto* flag_oq = app.add_flag("--include-options-in-query", options_in_query,
                               "append option text to retrieval queries");

  // mine
  auto* mine = app.add_subcommand("mine", "mine instructions from a training set");
  std::string train_path, kb_path, records_path, analysis = "deterministic",
              insight = "deterministic";
  double agent_temperature = 0.0;
  bool with_rationale = true;
  mine->add_option("--train", train_path, "training set (one JSON record per line)")->required();
  mine->add_option("--kb", kb_path, "output knowledge base path")->required();
  mine->add_option("--records", records_path, "mining record output path");
  mine->add_flag("--with-rationale,!--no-rationale", with_rationale,
                 "include physician rationales in reference extraction");
  mine->add_option("--analysis", analysis, "deterministic|judge")
      ->check(CLI::IsMember({"deterministic", "judge"}));
  mine->add_option("--insight", insight, "deterministic|llm")
      ->check(CLI::IsMember({"deterministic", "llm"}));
  mine->add_option("--agent-temperature", agent_temperature, "agent sampling temperature");

  // infer
  auto* infer_cmd = app.add_subcommand("infer", "answer a question with retrieved guidance");
  std::string infer_kb, question, qid, infer_testset, exemplars_path, predictions_path;
  bool show_prompt = false, infer_json = false;
  infer_cmd->add_option("--kb", infer_kb, "knowledge base path")->required();
  infer_cmd->add_option("--question", question, "question text");
  infer_cmd->add_option("--qid", qid, "question id for single-question mode");
  infer_cmd->add_option("--testset", infer_testset, "answer every case in this file");
  infer_cmd->add_option("--exemplars", exemplars_path, "exemplar QA file for icl mode");
  infer_cmd->add_option("--predictions", predictions_path, "prediction output path");
  infer_cmd->add_flag("--show-prompt", show_prompt, "print the assembled prompt");
  infer_cmd->add_flag("--json", infer_json, "one JSON object per prediction");

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "repeated-run accuracy with mean and std");
  std::string eval_kb, eval_testset, eval_exemplars;
  eval_cmd->add_option("--kb", eval_kb, "knowledge base path")->required();
  eval_cmd->add_option("--testset", eval_testset, "test set path")->required();
  eval_cmd->add_option("--exemplars", eval_exemplars, "exemplar QA file for icl mode");

  // grid
  auto* grid_cmd = app.add_subcommand("grid", "ablation grid: variants x top-k");
  std::vector<std::string> grid_kbs;
  std::string grid_testset, grid_exemplars, grid_train;
  bool remine = false;
  grid_cmd->add_option("--kb", grid_kbs, "label=path knowledge base variant (repeatable)");
  grid_cmd->add_option("--testset", grid_testset, "test set path")->required();
  grid_cmd->add_option("--exemplars", grid_exemplars, "exemplar QA file (adds an icl row)");
  grid_cmd->add_flag("--remine", remine, "mine fresh KBs from --train instead of loading");
  grid_cmd->add_option("--train", grid_train, "training set for --remine");

  // graph validate / diff
  auto* graph_cmd = app.add_subcommand("graph", "reasoning graph utilities");
  graph_cmd->require_subcommand(1);
  auto* validate_cmd = graph_cmd->add_subcommand("validate", "structural validation report");
  std::string validate_path;
  validate_cmd->add_option("file", validate_path, "graph JSON file")->required();
  auto* diff_cmd = graph_cmd->add_subcommand("diff", "discrepancy between two graphs");
  std::string diff_ref, diff_agent;
  double max_ged = 3.0;
  bool diff_json = false;
  diff_cmd->add_option("ref", diff_ref, "reference graph file")->required();
  diff_cmd->add_option("agent", diff_agent, "agent graph file")->required();
  diff_cmd->add_option("--max-ged", max_ged, "success threshold on total_ged_score");
  diff_cmd->add_flag("--json", diff_json, "emit the full report as JSON");

  // kb list / search / show
  auto* kb_cmd = app.add_subcommand("kb", "knowledge base inspection");
  kb_cmd->require_subcommand(1);
  std::string kbi_path, kb_query, kb_id;
  size_t kb_k = 5;
  auto* list_cmd = kb_cmd->add_subcommand("list", "one row per instruction");
  list_cmd->add_option("--kb", kbi_path, "knowledge base path")->required();
  auto* search_cmd = kb_cmd->add_subcommand("search", "ranked BM25 retrieval");
  search_cmd->add_option("--kb", kbi_path, "knowledge base path")->required();
  search_cmd->add_option("query", kb_query, "query text")->required();
  search_cmd->add_option("-k", kb_k, "results to return");
  auto* show_cmd = kb_cmd->add_subcommand("show", "full instruction record");
  show_cmd->add_option("--kb", kbi_path, "knowledge base path")->required();
  show_cmd->add_option("id", kb_id, "instruction id (prefix accepted)")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    CliConfig cfg = load_config(*opt_config ? std::optional<std::string>(config_path)
                                            : std::nullopt);
    if (*opt_provider) apply_config_entry(cfg, "provider", provider_kind);
    if (*opt_script) apply_config_entry(cfg, "mock_script", mock_script);
    if (*opt_url) apply_config_entry(cfg, "provider_url", provider_url);
    if (*opt_key) apply_config_entry(cfg, "provider_key", provider_key);
    if (*opt_model) apply_config_entry(cfg, "provider_model", provider_model);
    if (*opt_out) cfg.out_dir = out_dir;
    if (*opt_jobs) cfg.jobs = jobs;
    if (*opt_runs) cfg.runs = runs;
    if (*opt_seed) cfg.seed = seed;
    if (*opt_k) cfg.prompt.k = top_k;
    if (*opt_mode) cfg.prompt.mode = prompt_mode_from(prompt_mode);
    if (*opt_budget) cfg.prompt.char_budget = char_budget;
    if (*opt_header) cfg.prompt.guideline_header = guideline_header;
    if (*flag_full) cfg.prompt.render_full = render_full;
    if (*flag_oq) cfg.prompt.include_options_in_query = options_in_query;
    if (*opt_wf) cfg.weights.fact = w_fact;
    if (*opt_wh) cfg.weights.hypothesis = w_hyp;
    if (*opt_wa) cfg.weights.action = w_action;
    if (*opt_tau) {
      if (tau < 0.0 || tau > 1.0) throw ConfigError("--tau must be in [0,1]");
      cfg.weights.tau = tau;
    }
    if (*opt_k1) cfg.bm25.k1 = bm25_k1;
    if (*opt_b) cfg.bm25.b = bm25_b;
    if (*opt_ks) cfg.grid_ks = parse_k_list(grid_ks_csv);

    MiningOptions mine_opts;
    mine_opts.use_rationale = with_rationale;
    mine_opts.analysis = analysis == "judge" ? AnalysisMode::judge : AnalysisMode::deterministic;
    mine_opts.insight = insight == "llm" ? InsightMode::llm : InsightMode::deterministic;
    mine_opts.weights = cfg.weights;
    mine_opts.prompt = cfg.prompt;
    mine_opts.prompt.mode = PromptMode::drl;  // mining solves with empty guidelines
    mine_opts.jobs = cfg.jobs;
    mine_opts.agent_temperature = agent_temperature;

    if (*mine) return cmd_mine(cfg, train_path, kb_path, records_path, mine_opts);
    if (*infer_cmd) {
      if (question.empty() && infer_testset.empty())
        throw ConfigError("infer requires --question or --testset");
      return cmd_infer(cfg, infer_kb, question, qid, infer_testset, exemplars_path,
                       predictions_path, show_prompt, infer_json);
    }
    if (*eval_cmd) return cmd_eval(cfg, eval_kb, eval_testset, eval_exemplars);
    if (*grid_cmd)
      return cmd_grid(cfg, grid_kbs, grid_testset, grid_exemplars, remine, grid_train, mine_opts);
    if (*validate_cmd) return cmd_graph_validate(validate_path);
    if (*diff_cmd) return cmd_graph_diff(cfg, diff_ref, diff_agent, max_ged, diff_json);
    if (*list_cmd) return cmd_kb_list(cfg, kbi_path);
    if (*search_cmd) return cmd_kb_search(cfg, kbi_path, kb_query, kb_k);
    if (*show_cmd) return cmd_kb_show(cfg, kbi_path, kb_id);
    std::cerr << "no subcommand\n";
    return 2;
  } catch (const AnswerParseFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
