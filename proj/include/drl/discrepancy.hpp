#pragma once

#include "drl/graph.hpp"

#include <nlohmann/json.hpp>

#include <set>
#include <string>
#include <tuple>
#include <vector>

namespace drl {

struct WeightConfig {
  double fact = 1.0;
  double hypothesis = 1.5;
  double action = 2.0;
  double tau = 0.5;  // node-similarity match threshold
  double weight_for(NodeKind k) const {
    switch (k) {
      case NodeKind::fact: return fact;
      case NodeKind::hypothesis: return hypothesis;
      case NodeKind::action: return action;
    }
    return 0.0;
  }
};

struct NodeRef {
  NodeKind kind;
  std::string id;
  std::string label;
};

// Pluggable node similarity. Must be pure per call and return values in [0,1].
class SimilarityProvider {
 public:
  virtual ~SimilarityProvider() = default;
  virtual double score(const NodeRef& ref, const NodeRef& agent) const = 0;
};

// Token-set Jaccard over labels (lowercased, non-alphanumerics stripped).
class LexicalMatcher : public SimilarityProvider {
 public:
  double score(const NodeRef& ref, const NodeRef& agent) const override;
};

// Adapts a judge verdict to the similarity contract: an agent node the judge called
// hallucinated scores 0.0 against every reference node, anything else scores 1.0.
class JudgeMatcher : public SimilarityProvider {
 public:
  explicit JudgeMatcher(std::set<std::string> hallucinated_agent_ids)
      : hallucinated_(std::move(hallucinated_agent_ids)) {}
  double score(const NodeRef& ref, const NodeRef& agent) const override;

 private:
  std::set<std::string> hallucinated_;
};

struct NodeMatch {
  std::string ref_id;
  std::string agent_id;
  NodeKind kind;
  double similarity;
};

struct MatchSet {
  std::vector<NodeMatch> matches;          // sorted by ref_id
  std::set<std::string> unmatched_ref;     // reference node ids, all kinds
  std::set<std::string> unmatched_agent;   // agent node ids, all kinds
};

using EdgeKey = std::tuple<std::string, std::string, std::string>;  // (src, dst, type)

struct EdgeDiff {
  std::set<EdgeKey> missing_edges;  // reference-side ids
  std::set<EdgeKey> extra_edges;    // agent-side ids
};

enum class Severity { none, minor, moderate, severe };
const char* severity_name(Severity s);
Severity severity_for(double hallucination_penalty);

struct DiscrepancyReport {
  MatchSet match_set;
  EdgeDiff edge_diff;
  double node_mismatch_penalty = 0.0;   // weighted unmatched reference mass / total reference mass
  double hallucination_penalty = 0.0;   // weighted unmatched agent mass / total agent mass
  double reasoning_path_penalty = 0.0;  // (missing + extra edges) / max(1, |E_ref| + |E_agent|)
  double total_ged_score = 0.0;         // exact sum of the three penalties
  double missing_mass = 0.0;            // unnormalized weighted unmatched reference mass
  double hallucinated_mass = 0.0;       // unnormalized weighted unmatched agent mass
  Severity hallucination_severity = Severity::none;
  std::vector<std::string> sanity_flags;
  int matched_facts = 0;
  int matched_hypotheses = 0;
  int matched_actions = 0;
};

// Per-kind assignment maximizing total similarity subject to similarity >= tau.
// Exact (subset-DP) when each side has <= 8 nodes of that kind, greedy otherwise
// (descending similarity, ties by (ref_id, agent_id)). FINAL never participates.
MatchSet match_nodes(const ReasoningGraph& ref, const ReasoningGraph& agent,
                     const WeightConfig& cfg, const SimilarityProvider& matcher);

DiscrepancyReport compute_discrepancy(const ReasoningGraph& ref, const ReasoningGraph& agent,
                                      const MatchSet& ms, const WeightConfig& cfg);

// Convenience: match with the lexical default, then score.
DiscrepancyReport diff_graphs(const ReasoningGraph& ref, const ReasoningGraph& agent,
                              const WeightConfig& cfg = {});

// True iff any unmatched node or edge difference exists.
bool nonempty(const DiscrepancyReport& report);

// Flags implausible score/answer combinations; never alters penalties.
std::vector<std::string> sanity_check(const DiscrepancyReport& report, bool answer_correct);

struct OracleResult {
  DiscrepancyReport report;
  std::vector<NodeMatch> assignment;
};

// Exhaustive minimum-total search over every injective kind-preserving assignment
// respecting tau. Bounded to <= 6 nodes per kind per side (InstanceTooLarge beyond,
// or when the eligible-assignment count explodes). Penalties are evaluated with an
// independent straight-line evaluator, not compute_discrepancy.
OracleResult exact_oracle(const ReasoningGraph& ref, const ReasoningGraph& agent,
                          const WeightConfig& cfg, const SimilarityProvider& matcher);

// Mirrors the judged-evaluation output object shape.
nlohmann::json report_to_json(const DiscrepancyReport& report, bool answer_correct,
                              const std::string& qid);

}  // namespace drl
