#include "drl/discrepancy.hpp"

#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>

namespace drl {

double LexicalMatcher::score(const NodeRef& ref, const NodeRef& agent) const {
  return token_set_similarity(ref.label, agent.label);
}

double JudgeMatcher::score(const NodeRef&, const NodeRef& agent) const {
  return hallucinated_.count(agent.id) ? 0.0 : 1.0;
}

const char* severity_name(Severity s) {
  switch (s) {
    case Severity::none: return "none";
    case Severity::minor: return "minor";
    case Severity::moderate: return "moderate";
    case Severity::severe: return "severe";
  }
  return "?";
}

Severity severity_for(double h) {
  if (h == 0.0) return Severity::none;
  if (h <= 0.15) return Severity::minor;
  if (h <= 0.40) return Severity::moderate;
  return Severity::severe;
}

namespace {

std::vector<NodeRef> nodes_of_kind(const ReasoningGraph& g, NodeKind k) {
  std::vector<NodeRef> out;
  switch (k) {
    case NodeKind::fact:
      for (const auto& n : g.facts) out.push_back({k, n.fid, n.label});
      break;
    case NodeKind::hypothesis:
      for (const auto& n : g.hypotheses) out.push_back({k, n.hid, n.label});
      break;
    case NodeKind::action:
      for (const auto& n : g.actions) out.push_back({k, n.aid, n.label});
      break;
  }
  std::sort(out.begin(), out.end(), [](const NodeRef& a, const NodeRef& b) { return a.id < b.id; });
  return out;
}

// Exact max-total-similarity assignment via memoized search over agent-node subsets.
// Ref nodes are visited in ascending id order; per node, eligible agent nodes are tried
// in ascending id order before "leave unmatched", and only strict improvements replace
// the incumbent, so the first-found optimum in that canonical order wins ties.
struct SubsetAssigner {
  const std::vector<std::vector<double>>& sim;  // [ref][agent], -1 when below tau
  size_t n_agent;
  std::vector<std::vector<double>> memo;
  std::vector<std::vector<bool>> known;

  SubsetAssigner(const std::vector<std::vector<double>>& s, size_t na)
      : sim(s), n_agent(na),
        memo(s.size() + 1, std::vector<double>(size_t(1) << na, 0.0)),
        known(s.size() + 1, std::vector<bool>(size_t(1) << na, false)) {}

  double best(size_t i, uint32_t used) {
    if (i == sim.size()) return 0.0;
    if (known[i][used]) return memo[i][used];
    double v = best(i + 1, used);  // leave ref node i unmatched
    for (size_t j = 0; j < n_agent; ++j) {
      if (used & (uint32_t(1) << j)) continue;
      if (sim[i][j] < 0.0) continue;
      double cand = sim[i][j] + best(i + 1, used | (uint32_t(1) << j));
      if (cand > v) v = cand;
    }
    known[i][used] = true;
    memo[i][used] = v;
    return v;
  }

  // Reconstruct in canonical order: first eligible agent id achieving the optimum wins,
  // "leave unmatched" only when no match does. The == comparisons are safe because the
  // optimum was computed as one of these exact expressions.
  std::vector<int> reconstruct() {
    std::vector<int> pick(sim.size(), -1);
    uint32_t used = 0;
    for (size_t i = 0; i < sim.size(); ++i) {
      double target = best(i, used);
      for (size_t j = 0; j < n_agent; ++j) {
        if (used & (uint32_t(1) << j)) continue;
        if (sim[i][j] < 0.0) continue;
        if (sim[i][j] + best(i + 1, used | (uint32_t(1) << j)) == target) {
          pick[i] = static_cast<int>(j);
          used |= uint32_t(1) << j;
          break;
        }
      }
    }
    return pick;
  }
};

std::vector<NodeMatch> match_kind(const std::vector<NodeRef>& refs, const std::vector<NodeRef>& agents,
                                  const WeightConfig& cfg, const SimilarityProvider& matcher) {
  std::vector<NodeMatch> out;
  if (refs.empty() || agents.empty()) return out;

  std::vector<std::vector<double>> sim(refs.size(), std::vector<double>(agents.size(), -1.0));
  for (size_t i = 0; i < refs.size(); ++i) {
    for (size_t j = 0; j < agents.size(); ++j) {
      double s = matcher.score(refs[i], agents[j]);
      if (s >= cfg.tau) sim[i][j] = s;
    }
  }

  if (refs.size() <= 8 && agents.size() <= 8) {
    SubsetAssigner solver(sim, agents.size());
    auto pick = solver.reconstruct();
    for (size_t i = 0; i < refs.size(); ++i) {
      if (pick[i] >= 0)
        out.push_back({refs[i].id, agents[size_t(pick[i])].id, refs[i].kind, sim[i][size_t(pick[i])]});
    }
    return out;
  }

  // large instances: greedy by descending similarity, ties by (ref_id, agent_id)
  struct Cand { double s; size_t i, j; };
  std::vector<Cand> cands;
  for (size_t i = 0; i < refs.size(); ++i)
    for (size_t j = 0; j < agents.size(); ++j)
      if (sim[i][j] >= 0.0) cands.push_back({sim[i][j], i, j});
  std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
    if (a.s != b.s) return a.s > b.s;
    if (refs[a.i].id != refs[b.i].id) return refs[a.i].id < refs[b.i].id;
    return agents[a.j].id < agents[b.j].id;
  });
  std::vector<bool> ref_used(refs.size(), false), agent_used(agents.size(), false);
  for (const auto& c : cands) {
    if (ref_used[c.i] || agent_used[c.j]) continue;
    ref_used[c.i] = agent_used[c.j] = true;
    out.push_back({refs[c.i].id, agents[c.j].id, refs[c.i].kind, c.s});
  }
  return out;
}

}  // namespace

MatchSet match_nodes(const ReasoningGraph& ref, const ReasoningGraph& agent,
                     const WeightConfig& cfg, const SimilarityProvider& matcher) {
  MatchSet ms;
  for (NodeKind k : {NodeKind::fact, NodeKind::hypothesis, NodeKind::action}) {
    auto refs = nodes_of_kind(ref, k);
    auto agents = nodes_of_kind(agent, k);
    auto matched = match_kind(refs, agents, cfg, matcher);
    std::set<std::string> mref, magent;
    for (const auto& m : matched) {
      mref.insert(m.ref_id);
      magent.insert(m.agent_id);
      ms.matches.push_back(m);
    }
    for (const auto& n : refs)
      if (!mref.count(n.id)) ms.unmatched_ref.insert(n.id);
    for (const auto& n : agents)
      if (!magent.count(n.id)) ms.unmatched_agent.insert(n.id);
  }
  std::sort(ms.matches.begin(), ms.matches.end(),
            [](const NodeMatch& a, const NodeMatch& b) { return a.ref_id < b.ref_id; });
  return ms;
}

namespace {

std::map<std::string, NodeKind> kind_index(const ReasoningGraph& g) {
  std::map<std::string, NodeKind> m;
  for (const auto& f : g.facts) m.emplace(f.fid, NodeKind::fact);
  for (const auto& h : g.hypotheses) m.emplace(h.hid, NodeKind::hypothesis);
  for (const auto& a : g.actions) m.emplace(a.aid, NodeKind::action);
  return m;
}

double total_mass(const ReasoningGraph& g, const WeightConfig& cfg) {
  return cfg.fact * double(g.facts.size()) + cfg.hypothesis * double(g.hypotheses.size()) +
         cfg.action * double(g.actions.size());
}

}  // namespace

DiscrepancyReport compute_discrepancy(const ReasoningGraph& ref, const ReasoningGraph& agent,
                                      const MatchSet& ms, const WeightConfig& cfg) {
  DiscrepancyReport rep;
  rep.match_set = ms;

  auto ref_kinds = kind_index(ref);
  auto agent_kinds = kind_index(agent);

  for (const auto& m : ms.matches) {
    switch (m.kind) {
      case NodeKind::fact: ++rep.matched_facts; break;
      case NodeKind::hypothesis: ++rep.matched_hypotheses; break;
      case NodeKind::action: ++rep.matched_actions; break;
    }
  }

  for (const auto& id : ms.unmatched_ref) {
    auto it = ref_kinds.find(id);
    if (it != ref_kinds.end()) rep.missing_mass += cfg.weight_for(it->second);
  }
  for (const auto& id : ms.unmatched_agent) {
    auto it = agent_kinds.find(id);
    if (it != agent_kinds.end()) rep.hallucinated_mass += cfg.weight_for(it->second);
  }

  double ref_mass = total_mass(ref, cfg);
  double agent_mass = total_mass(agent, cfg);
  rep.node_mismatch_penalty = ref_mass > 0.0 ? rep.missing_mass / ref_mass : 0.0;
  rep.hallucination_penalty = agent_mass > 0.0 ? rep.hallucinated_mass / agent_mass : 0.0;

  // edge identity is (mapped src, mapped dst, type); unmatched endpoints never correspond
  std::map<std::string, std::string> fwd, rev;
  for (const auto& m : ms.matches) {
    fwd[m.ref_id] = m.agent_id;
    rev[m.agent_id] = m.ref_id;
  }
  fwd[kFinalNodeId] = kFinalNodeId;
  rev[kFinalNodeId] = kFinalNodeId;

  std::set<EdgeKey> agent_edges, ref_edges;
  for (const auto& e : agent.edges) agent_edges.insert({e.src, e.dst, e.type});
  for (const auto& e : ref.edges) ref_edges.insert({e.src, e.dst, e.type});

  for (const auto& e : ref.edges) {
    auto s = fwd.find(e.src);
    auto d = fwd.find(e.dst);
    bool corresponds = s != fwd.end() && d != fwd.end() &&
                       agent_edges.count({s->second, d->second, e.type}) > 0;
    if (!corresponds) rep.edge_diff.missing_edges.insert({e.src, e.dst, e.type});
  }
  for (const auto& e : agent.edges) {
    auto s = rev.find(e.src);
    auto d = rev.find(e.dst);
    bool corresponds = s != rev.end() && d != rev.end() &&
                       ref_edges.count({s->second, d->second, e.type}) > 0;
    if (!corresponds) rep.edge_diff.extra_edges.insert({e.src, e.dst, e.type});
  }

  double denom = std::max<size_t>(1, ref.edges.size() + agent.edges.size());
  rep.reasoning_path_penalty =
      double(rep.edge_diff.missing_edges.size() + rep.edge_diff.extra_edges.size()) / denom;

  rep.total_ged_score =
      rep.node_mismatch_penalty + rep.hallucination_penalty + rep.reasoning_path_penalty;
  rep.hallucination_severity = severity_for(rep.hallucination_penalty);
  return rep;
}

DiscrepancyReport diff_graphs(const ReasoningGraph& ref, const ReasoningGraph& agent,
                              const WeightConfig& cfg) {
  LexicalMatcher matcher;
  return compute_discrepancy(ref, agent, match_nodes(ref, agent, cfg, matcher), cfg);
}

bool nonempty(const DiscrepancyReport& r) {
  return !(r.match_set.unmatched_ref.empty() && r.match_set.unmatched_agent.empty() &&
           r.edge_diff.missing_edges.empty() && r.edge_diff.extra_edges.empty());
}

std::vector<std::string> sanity_check(const DiscrepancyReport& report, bool answer_correct) {
  std::vector<std::string> flags;
  if (!answer_correct && report.total_ged_score < 0.3) flags.push_back("implausible-low");
  if (answer_correct && report.edge_diff.missing_edges.empty() &&
      report.edge_diff.extra_edges.empty() && report.total_ged_score > 0.8) {
    flags.push_back("implausible-high");
  }
  return flags;
}

// ---- exhaustive oracle ----

namespace {

struct OracleEval {
  double miss, halluc, path, total;
};

// straight-line re-derivation of the three penalties for a fixed assignment;
// deliberately shares no machinery with compute_discrepancy
OracleEval oracle_evaluate(const ReasoningGraph& ref, const ReasoningGraph& agent,
                           const std::vector<NodeMatch>& assignment, const WeightConfig& cfg) {
  OracleEval ev{0, 0, 0, 0};

  std::map<std::string, std::string> fwd, rev;
  for (const auto& m : assignment) {
    fwd[m.ref_id] = m.agent_id;
    rev[m.agent_id] = m.ref_id;
  }

  double ref_mass = 0.0, miss_mass = 0.0;
  auto tally_ref = [&](const std::string& id, double w) {
    ref_mass += w;
    if (!fwd.count(id)) miss_mass += w;
  };
  for (const auto& n : ref.facts) tally_ref(n.fid, cfg.fact);
  for (const auto& n : ref.hypotheses) tally_ref(n.hid, cfg.hypothesis);
  for (const auto& n : ref.actions) tally_ref(n.aid, cfg.action);

  double agent_mass = 0.0, halluc_mass = 0.0;
  auto tally_agent = [&](const std::string& id, double w) {
    agent_mass += w;
    if (!rev.count(id)) halluc_mass += w;
  };
  for (const auto& n : agent.facts) tally_agent(n.fid, cfg.fact);
  for (const auto& n : agent.hypotheses) tally_agent(n.hid, cfg.hypothesis);
  for (const auto& n : agent.actions) tally_agent(n.aid, cfg.action);

  ev.miss = ref_mass > 0.0 ? miss_mass / ref_mass : 0.0;
  ev.halluc = agent_mass > 0.0 ? halluc_mass / agent_mass : 0.0;

  auto map_id = [](const std::map<std::string, std::string>& m, const std::string& id,
                   std::string& out) {
    if (id == kFinalNodeId) { out = kFinalNodeId; return true; }
    auto it = m.find(id);
    if (it == m.end()) return false;
    out = it->second;
    return true;
  };

  std::set<EdgeKey> missing, extra;
  for (const auto& e : ref.edges) {
    std::string ms, md;
    bool found = false;
    if (map_id(fwd, e.src, ms) && map_id(fwd, e.dst, md)) {
      for (const auto& ae : agent.edges) {
        if (ae.src == ms && ae.dst == md && ae.type == e.type) { found = true; break; }
      }
    }
    if (!found) missing.insert({e.src, e.dst, e.type});
  }
  for (const auto& e : agent.edges) {
    std::string ms, md;
    bool found = false;
    if (map_id(rev, e.src, ms) && map_id(rev, e.dst, md)) {
      for (const auto& re : ref.edges) {
        if (re.src == ms && re.dst == md && re.type == e.type) { found = true; break; }
      }
    }
    if (!found) extra.insert({e.src, e.dst, e.type});
  }
  size_t edge_total = ref.edges.size() + agent.edges.size();
  ev.path = double(missing.size() + extra.size()) / double(edge_total > 0 ? edge_total : 1);

  ev.total = ev.miss + ev.halluc + ev.path;
  return ev;
}

std::vector<std::pair<std::string, std::string>> canonical_pairs(const std::vector<NodeMatch>& a) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& m : a) out.emplace_back(m.ref_id, m.agent_id);
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

OracleResult exact_oracle(const ReasoningGraph& ref, const ReasoningGraph& agent,
                          const WeightConfig& cfg, const SimilarityProvider& matcher) {
  for (NodeKind k : {NodeKind::fact, NodeKind::hypothesis, NodeKind::action}) {
    auto r = nodes_of_kind(ref, k).size();
    auto a = nodes_of_kind(agent, k).size();
    if (r > 6 || a > 6)
      throw InstanceTooLarge(std::string("oracle bound exceeded for kind ") + node_kind_name(k) +
                             ": " + std::to_string(r) + " vs " + std::to_string(a));
  }

  // flatten ref nodes across kinds; per ref node, precompute eligible agent candidates
  std::vector<NodeRef> ref_nodes, agent_nodes;
  for (NodeKind k : {NodeKind::fact, NodeKind::hypothesis, NodeKind::action}) {
    for (auto& n : nodes_of_kind(ref, k)) ref_nodes.push_back(n);
    for (auto& n : nodes_of_kind(agent, k)) agent_nodes.push_back(n);
  }
  std::vector<std::vector<std::pair<size_t, double>>> eligible(ref_nodes.size());
  for (size_t i = 0; i < ref_nodes.size(); ++i) {
    for (size_t j = 0; j < agent_nodes.size(); ++j) {
      if (ref_nodes[i].kind != agent_nodes[j].kind) continue;
      double s = matcher.score(ref_nodes[i], agent_nodes[j]);
      if (s >= cfg.tau) eligible[i].emplace_back(j, s);
    }
  }

  constexpr uint64_t kEnumerationCap = 50'000'000;
  uint64_t visited = 0;

  std::vector<NodeMatch> current, best_assignment;
  std::vector<bool> agent_used(agent_nodes.size(), false);
  bool have_best = false;
  OracleEval best_eval{0, 0, 0, 0};
  std::vector<std::pair<std::string, std::string>> best_pairs;

  std::function<void(size_t)> walk = [&](size_t i) {
    if (++visited > kEnumerationCap)
      throw InstanceTooLarge("oracle enumeration exceeded the assignment cap");
    if (i == ref_nodes.size()) {
      OracleEval ev = oracle_evaluate(ref, agent, current, cfg);
      auto pairs = canonical_pairs(current);
      if (!have_best || ev.total < best_eval.total ||
          (ev.total == best_eval.total && pairs < best_pairs)) {
        have_best = true;
        best_eval = ev;
        best_assignment = current;
        best_pairs = std::move(pairs);
      }
      return;
    }
    walk(i + 1);  // leave unmatched
    for (const auto& [j, s] : eligible[i]) {
      if (agent_used[j]) continue;
      agent_used[j] = true;
      current.push_back({ref_nodes[i].id, agent_nodes[j].id, ref_nodes[i].kind, s});
      walk(i + 1);
      current.pop_back();
      agent_used[j] = false;
    }
  };
  walk(0);

  OracleResult result;
  result.assignment = best_assignment;
  std::sort(result.assignment.begin(), result.assignment.end(),
            [](const NodeMatch& a, const NodeMatch& b) { return a.ref_id < b.ref_id; });

  // report filled from the oracle's own evaluation numbers
  MatchSet ms;
  ms.matches = result.assignment;
  std::set<std::string> mref, magent;
  for (const auto& m : ms.matches) {
    mref.insert(m.ref_id);
    magent.insert(m.agent_id);
  }
  for (const auto& n : ref_nodes)
    if (!mref.count(n.id)) ms.unmatched_ref.insert(n.id);
  for (const auto& n : agent_nodes)
    if (!magent.count(n.id)) ms.unmatched_agent.insert(n.id);

  DiscrepancyReport rep = compute_discrepancy(ref, agent, ms, cfg);
  rep.node_mismatch_penalty = best_eval.miss;
  rep.hallucination_penalty = best_eval.halluc;
  rep.reasoning_path_penalty = best_eval.path;
  rep.total_ged_score = best_eval.total;
  rep.hallucination_severity = severity_for(rep.hallucination_penalty);
  result.report = rep;
  return result;
}

namespace {

std::string band_for_total(double total) {
  if (total == 0.0) return "Excellent";
  if (total <= 0.3) return "Good";
  if (total <= 0.8) return "Fair";
  if (total <= 1.5) return "Poor";
  return "Very Poor";
}

nlohmann::json edge_set_to_json(const std::set<EdgeKey>& edges) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& [s, d, t] : edges) arr.push_back(nlohmann::json::array({s, d, t}));
  return arr;
}

}  // namespace

nlohmann::json report_to_json(const DiscrepancyReport& r, bool answer_correct,
                              const std::string& qid) {
  nlohmann::json out;
  out["qid"] = qid;
  out["answer_correct"] = answer_correct;
  out["node_matching"] = {
      {"matched_facts", r.matched_facts},
      {"matched_hypotheses", r.matched_hypotheses},
      {"matched_actions", r.matched_actions},
      {"hallucinated_nodes", std::vector<std::string>(r.match_set.unmatched_agent.begin(),
                                                      r.match_set.unmatched_agent.end())},
      {"hallucination_severity", severity_name(r.hallucination_severity)},
  };
  out["graph_structure"] = {
      {"reasoning_path_correct",
       r.edge_diff.missing_edges.empty() && r.edge_diff.extra_edges.empty()},
      {"missing_edges", edge_set_to_json(r.edge_diff.missing_edges)},
      {"extra_edges", edge_set_to_json(r.edge_diff.extra_edges)},
  };
  std::ostringstream expl;
  expl << r.match_set.unmatched_ref.size() << " reference node(s) unmatched, "
       << r.match_set.unmatched_agent.size() << " agent node(s) unsupported, "
       << r.edge_diff.missing_edges.size() << " edge(s) missing, "
       << r.edge_diff.extra_edges.size() << " edge(s) extra";
  out["ged_calculation"] = {
      {"node_mismatch_penalty", r.node_mismatch_penalty},
      {"hallucination_penalty", r.hallucination_penalty},
      {"reasoning_path_penalty", r.reasoning_path_penalty},
      {"total_ged_score", r.total_ged_score},
      {"explanation", expl.str()},
  };
  std::vector<std::string> strengths, weaknesses;
  int matched_total = r.matched_facts + r.matched_hypotheses + r.matched_actions;
  if (matched_total > 0)
    strengths.push_back(std::to_string(matched_total) + " node(s) aligned with the reference");
  if (r.edge_diff.missing_edges.empty() && r.edge_diff.extra_edges.empty())
    strengths.push_back("reasoning path matches the reference");
  if (!r.match_set.unmatched_ref.empty())
    weaknesses.push_back(std::to_string(r.match_set.unmatched_ref.size()) +
                         " reference node(s) absent from the agent graph");
  if (!r.match_set.unmatched_agent.empty())
    weaknesses.push_back(std::to_string(r.match_set.unmatched_agent.size()) +
                         " agent node(s) without reference support");
  if (!r.edge_diff.missing_edges.empty() || !r.edge_diff.extra_edges.empty())
    weaknesses.push_back("reasoning path deviates from the reference");
  out["assessment"] = {
      {"overall", band_for_total(r.total_ged_score)},
      {"strengths", strengths},
      {"weaknesses", weaknesses},
  };
  out["sanity_flags"] = r.sanity_flags;

  std::vector<std::string> missing_nodes(r.match_set.unmatched_ref.begin(),
                                         r.match_set.unmatched_ref.end());
  out["node_matching"]["missing_nodes"] = missing_nodes;
  return out;
}

}  // namespace drl
