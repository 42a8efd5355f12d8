#pragma once

#include "drl/dataset.hpp"
#include "drl/inference.hpp"
#include "drl/kb.hpp"
#include "drl/provider.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <vector>

namespace drl {

struct TrialResult {
  int run_index = 0;
  int correct = 0;
  int total = 0;
  double accuracy = 0.0;  // correct / total
  int failures = 0;       // parse / provider / budget failures, scored as incorrect
  int budget_overflows = 0;
};

struct EvalReport {
  nlohmann::json config = nlohmann::json::object();
  std::vector<TrialResult> trials;
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // population standard deviation
};

double population_std(const std::vector<double>& xs);

// runs independent passes over the testset; every prediction is exact-match scored
// against the normalized gold answer; failures count as incorrect.
EvalReport run_eval(Provider& prov, const KnowledgeBase& kb, const std::vector<QaCase>& testset,
                    const PromptConfig& cfg, int runs, const ExemplarStore* exemplars = nullptr,
                    int jobs = 1);

struct GridCell {
  bool available = false;  // false when every inference overflowed the prompt budget
  double mean = 0.0;
  double stddev = 0.0;
};

struct GridRow {
  std::string label;
  PromptMode mode = PromptMode::drl;
  std::vector<GridCell> cells;  // one per k
};

struct GridReport {
  std::vector<size_t> ks;
  std::vector<GridRow> rows;
  int runs = 0;

  std::string render_text() const;  // aligned columns, "mean±std" percent, "-" cells
  std::string render_tsv() const;
};

// "mean±std" as percentages with two decimals, e.g. "100.00±0.00".
std::string format_cell(const GridCell& cell);

struct KbVariant {
  std::string label;
  const KnowledgeBase* kb;
};

// Cross product of rows (one per KB variant, plus one icl row when exemplars are
// given) and Top-k columns. A cell whose every inference raises the prompt budget
// error is marked unavailable; cells never affect each other.
GridReport run_ablation_grid(Provider& prov, const std::vector<KbVariant>& kb_variants,
                             const ExemplarStore* exemplars, const std::vector<QaCase>& testset,
                             const std::vector<size_t>& ks, int runs, const PromptConfig& base,
                             int jobs = 1);

nlohmann::json eval_report_to_json(const EvalReport& report);

}  // namespace drl
