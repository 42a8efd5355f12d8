#include "drl/evalharness.hpp"

#include "drl/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <thread>

namespace drl {

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size());
  return std::sqrt(var);
}

namespace {

struct CaseOutcome {
  bool correct = false;
  bool failed = false;
  bool budget = false;
};

CaseOutcome eval_case(Provider& prov, const KnowledgeBase& kb, const QaCase& c,
                      const PromptConfig& cfg, const ExemplarStore* exemplars) {
  CaseOutcome out;
  try {
    Prediction pred = infer(prov, kb, c, cfg, exemplars);
    out.correct = (pred.answer == normalize_answer(c.answer, c.task()));
  } catch (const PromptBudgetExceeded&) {
    out.failed = true;
    out.budget = true;
  } catch (const AnswerParseFailure&) {
    out.failed = true;
  } catch (const ProviderFailure&) {
    out.failed = true;
  }
  return out;
}

}  // namespace

EvalReport run_eval(Provider& prov, const KnowledgeBase& kb, const std::vector<QaCase>& testset,
                    const PromptConfig& cfg, int runs, const ExemplarStore* exemplars, int jobs) {
  {
    std::set<std::string> qids;
    for (const auto& c : testset)
      if (!qids.insert(c.qid).second)
        throw DatasetFormatFailure("duplicate qid in testset: " + c.qid);
  }

  EvalReport report;
  report.config = {{"k", cfg.k},
                   {"mode", prompt_mode_name(cfg.mode)},
                   {"char_budget", cfg.char_budget},
                   {"runs", runs},
                   {"cases", testset.size()},
                   {"std", "population"}};

  for (int run = 0; run < runs; ++run) {
    std::vector<CaseOutcome> outcomes(testset.size());
    int threads = std::max(1, jobs);
    if (threads == 1 || testset.size() <= 1) {
      for (size_t i = 0; i < testset.size(); ++i)
        outcomes[i] = eval_case(prov, kb, testset[i], cfg, exemplars);
    } else {
      std::atomic<size_t> next{0};
      auto worker = [&] {
        for (;;) {
          size_t i = next.fetch_add(1);
          if (i >= testset.size()) return;
          outcomes[i] = eval_case(prov, kb, testset[i], cfg, exemplars);
        }
      };
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& th : pool) th.join();
    }

    TrialResult trial;
    trial.run_index = run;
    trial.total = static_cast<int>(testset.size());
    for (const auto& o : outcomes) {
      if (o.correct) ++trial.correct;
      if (o.failed) ++trial.failures;
      if (o.budget) ++trial.budget_overflows;
    }
    trial.accuracy = trial.total == 0
                         ? 0.0
                         : static_cast<double>(trial.correct) / static_cast<double>(trial.total);
    report.trials.push_back(trial);
  }

  std::vector<double> accs;
  for (const auto& t : report.trials) accs.push_back(t.accuracy);
  double mean = 0.0;
  for (double a : accs) mean += a;
  report.mean_accuracy = accs.empty() ? 0.0 : mean / static_cast<double>(accs.size());
  report.std_accuracy = population_std(accs);
  return report;
}

std::string format_cell(const GridCell& cell) {
  if (!cell.available) return "-";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f±%.2f", cell.mean * 100.0, cell.stddev * 100.0);
  return buf;
}

namespace {

GridCell cell_from_report(const EvalReport& report, size_t case_count) {
  GridCell cell;
  bool all_budget = !report.trials.empty() && case_count > 0;
  for (const auto& t : report.trials)
    if (t.budget_overflows < t.total) all_budget = false;
  cell.available = !all_budget;
  cell.mean = report.mean_accuracy;
  cell.stddev = report.std_accuracy;
  return cell;
}

}  // namespace

GridReport run_ablation_grid(Provider& prov, const std::vector<KbVariant>& kb_variants,
                             const ExemplarStore* exemplars, const std::vector<QaCase>& testset,
                             const std::vector<size_t>& ks, int runs, const PromptConfig& base,
                             int jobs) {
  if (ks.empty()) throw ConfigError("ablation grid requires at least one k");
  if (kb_variants.empty() && !exemplars) throw ConfigError("ablation grid requires a KB or exemplars");

  GridReport grid;
  grid.ks = ks;
  grid.runs = runs;

  const KnowledgeBase empty_kb;

  auto run_row = [&](const std::string& label, PromptMode mode, const KnowledgeBase& kb) {
    GridRow row;
    row.label = label;
    row.mode = mode;
    for (size_t k : ks) {
      PromptConfig cfg = base;
      cfg.mode = mode;
      cfg.k = k;
      GridCell cell;
      try {
        EvalReport rep = run_eval(prov, kb, testset, cfg, runs, exemplars, jobs);
        cell = cell_from_report(rep, testset.size());
      } catch (const Error&) {
        cell.available = false;  // a cell failure never poisons the rest of the grid
      }
      row.cells.push_back(cell);
    }
    grid.rows.push_back(std::move(row));
  };

  for (const auto& variant : kb_variants)
    run_row(variant.label, PromptMode::drl, *variant.kb);
  if (exemplars) run_row("icl", PromptMode::icl, empty_kb);
  return grid;
}

std::string GridReport::render_tsv() const {
  std::ostringstream out;
  out << "variant";
  for (size_t k : ks) out << "\tTop-k=" << k;
  out << "\n";
  for (const auto& row : rows) {
    out << row.label;
    for (const auto& cell : row.cells) out << "\t" << format_cell(cell);
    out << "\n";
  }
  return out.str();
}

namespace {

// display width: ± inside cells is 2 bytes but 1 column
size_t display_width(const std::string& s) {
  size_t w = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++w;
  return w;
}

std::string pad(const std::string& s, size_t width) {
  std::string out = s;
  size_t w = display_width(s);
  while (w++ < width) out += ' ';
  return out;
}

}  // namespace

std::string GridReport::render_text() const {
  std::vector<std::string> headers = {"variant"};
  for (size_t k : ks) headers.push_back("Top-k=" + std::to_string(k));

  std::vector<std::vector<std::string>> table;
  table.push_back(headers);
  for (const auto& row : rows) {
    std::vector<std::string> cells = {row.label};
    for (const auto& cell : row.cells) cells.push_back(format_cell(cell));
    table.push_back(cells);
  }

  std::vector<size_t> widths(headers.size(), 0);
  for (const auto& row : table)
    for (size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], display_width(row[i]));

  std::ostringstream out;
  out << "accuracy % (mean±std over " << runs << " runs, population std)\n";
  for (const auto& row : table) {
    for (size_t i = 0; i < row.size(); ++i) {
      out << pad(row[i], widths[i]);
      if (i + 1 < row.size()) out << "  ";
    }
    out << "\n";
  }
  return out.str();
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials)
    trials.push_back({{"run_index", t.run_index},
                      {"correct", t.correct},
                      {"total", t.total},
                      {"accuracy", t.accuracy},
                      {"failures", t.failures},
                      {"budget_overflows", t.budget_overflows}});
  return {{"config", report.config},
          {"trials", trials},
          {"mean_accuracy", report.mean_accuracy},
          {"std_accuracy", report.std_accuracy}};
}

}  // namespace drl
