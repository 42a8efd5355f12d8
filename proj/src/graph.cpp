#include "drl/graph.hpp"

#include "drl/errors.hpp"
#include "drl/text.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <queue>
#include <set>
#include <sstream>

using nlohmann::json;

namespace drl {

const char* node_kind_name(NodeKind k) {
  switch (k) {
    case NodeKind::fact: return "fact";
    case NodeKind::hypothesis: return "hypothesis";
    case NodeKind::action: return "action";
  }
  return "?";
}

namespace {

const std::set<std::string> kPolarity = {"present", "absent", "uncertain"};
const std::set<std::string> kConfidence = {"high", "medium", "low", "uncertain"};
const std::set<std::string> kActionType = {"TEST", "TREAT", "ASSESS", "OBSERVE", "PRESCRIBE"};
const std::set<std::string> kActionStatus = {"recommended", "contraindicated", "optional", "not_specified"};
const std::set<std::string> kEdgeType = {"supports", "contradicts", "suggests_test"};
const std::set<std::string> kEvidenceSource = {"case", "other-node-ref"};

bool matches_id_pattern(const std::string& id, char prefix) {
  if (id.size() < 2 || id[0] != prefix) return false;
  for (size_t i = 1; i < id.size(); ++i) {
    if (id[i] < '0' || id[i] > '9') return false;
  }
  return true;
}

// --- json -> struct mapping; shape/type problems throw SchemaViolation ---

[[noreturn]] void schema_fail(const std::string& where, const std::string& msg) {
  throw SchemaViolation(where + ": " + msg);
}

std::string req_string(const json& o, const char* key, const std::string& where) {
  auto it = o.find(key);
  if (it == o.end()) schema_fail(where, std::string("missing required field '") + key + "'");
  if (!it->is_string()) schema_fail(where, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::string opt_string(const json& o, const char* key, const std::string& where,
                       const std::string& dflt = "") {
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return dflt;
  if (!it->is_string()) schema_fail(where, std::string("field '") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> nullable_string(const json& o, const char* key, const std::string& where) {
  auto it = o.find(key);
  if (it == o.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema_fail(where, std::string("field '") + key + "' must be a string or null");
  return it->get<std::string>();
}

json collect_extras(const json& o, std::initializer_list<const char*> known) {
  json extras = json::object();
  for (auto it = o.begin(); it != o.end(); ++it) {
    bool is_known = false;
    for (const char* k : known) {
      if (it.key() == k) { is_known = true; break; }
    }
    if (!is_known) extras[it.key()] = it.value();
  }
  return extras;
}

std::vector<Evidence> parse_support(const json& o, const std::string& where) {
  std::vector<Evidence> out;
  auto it = o.find("support");
  if (it == o.end() || it->is_null()) return out;
  if (!it->is_array()) schema_fail(where, "field 'support' must be an array");
  size_t idx = 0;
  for (const auto& e : *it) {
    std::string ew = where + ".support[" + std::to_string(idx++) + "]";
    if (!e.is_object()) schema_fail(ew, "evidence must be an object");
    Evidence ev;
    ev.source = req_string(e, "source", ew);
    ev.ref = nullable_string(e, "ref", ew);
    ev.quote = opt_string(e, "quote", ew);
    ev.extras = collect_extras(e, {"source", "ref", "quote"});
    out.push_back(std::move(ev));
  }
  return out;
}

const json& req_array(const json& o, const char* key) {
  auto it = o.find(key);
  if (it == o.end()) schema_fail("$", std::string("missing required field '") + key + "'");
  if (!it->is_array()) schema_fail("$", std::string("field '") + key + "' must be an array");
  return *it;
}

ReasoningGraph graph_from_json(const json& doc) {
  if (!doc.is_object()) throw SchemaViolation("top-level document must be a JSON object");
  ReasoningGraph g;
  g.artifact_id = opt_string(doc, "artifact_id", "$");
  g.qid = opt_string(doc, "qid", "$");

  for (const auto& f : req_array(doc, "facts")) {
    if (!f.is_object()) schema_fail("facts", "entry must be an object");
    FactNode n;
    n.fid = req_string(f, "fid", "facts[]");
    std::string w = "fact " + n.fid;
    n.label = req_string(f, "label", w);
    n.value = nullable_string(f, "value", w);
    n.polarity = req_string(f, "polarity", w);
    n.support = parse_support(f, w);
    n.extras = collect_extras(f, {"fid", "label", "value", "polarity", "support"});
    g.facts.push_back(std::move(n));
  }
  for (const auto& h : req_array(doc, "hypotheses")) {
    if (!h.is_object()) schema_fail("hypotheses", "entry must be an object");
    HypothesisNode n;
    n.hid = req_string(h, "hid", "hypotheses[]");
    std::string w = "hypothesis " + n.hid;
    n.label = req_string(h, "label", w);
    n.confidence = req_string(h, "confidence", w);
    n.support = parse_support(h, w);
    n.extras = collect_extras(h, {"hid", "label", "confidence", "support"});
    g.hypotheses.push_back(std::move(n));
  }
  for (const auto& a : req_array(doc, "actions")) {
    if (!a.is_object()) schema_fail("actions", "entry must be an object");
    ActionNode n;
    n.aid = req_string(a, "aid", "actions[]");
    std::string w = "action " + n.aid;
    n.label = req_string(a, "label", w);
    n.action_type = req_string(a, "action_type", w);
    n.status = req_string(a, "status", w);
    n.support = parse_support(a, w);
    n.extras = collect_extras(a, {"aid", "label", "action_type", "status", "support"});
    g.actions.push_back(std::move(n));
  }
  for (const auto& e : req_array(doc, "edges")) {
    if (!e.is_object()) schema_fail("edges", "entry must be an object");
    EdgeRec r;
    r.eid = req_string(e, "eid", "edges[]");
    std::string w = "edge " + r.eid;
    r.src = req_string(e, "src", w);
    r.dst = req_string(e, "dst", w);
    r.type = req_string(e, "type", w);
    r.justification = opt_string(e, "justification", w);
    r.guideline_support = nullable_string(e, "guideline_support", w);
    r.extras = collect_extras(e, {"eid", "src", "dst", "type", "justification", "guideline_support"});
    g.edges.push_back(std::move(r));
  }

  auto fit = doc.find("final");
  if (fit == doc.end()) schema_fail("$", "missing required field 'final'");
  if (!fit->is_object()) schema_fail("final", "must be an object");
  g.final.answer = opt_string(*fit, "answer", "final");
  g.final.answer_text = opt_string(*fit, "answer_text", "final");
  g.final.confidence = req_string(*fit, "confidence", "final");
  if (auto u = fit->find("uncertainties"); u != fit->end() && !u->is_null()) {
    if (!u->is_array()) schema_fail("final", "field 'uncertainties' must be an array");
    for (const auto& s : *u) {
      if (!s.is_string()) schema_fail("final", "uncertainties entries must be strings");
      g.final.uncertainties.push_back(s.get<std::string>());
    }
  }
  g.final.extras = collect_extras(*fit, {"answer", "answer_text", "confidence", "uncertainties"});

  g.extras = collect_extras(doc, {"artifact_id", "qid", "facts", "hypotheses", "actions", "edges", "final"});
  return g;
}

std::string strip_code_fence(const std::string& raw) {
  size_t open = raw.find("```");
  if (open == std::string::npos) return raw;
  size_t body = raw.find('\n', open);
  if (body == std::string::npos) return raw;
  ++body;
  size_t close = raw.find("```", body);
  if (close == std::string::npos) return raw;
  return raw.substr(body, close - body);
}

}  // namespace

ValidationReport validate(const ReasoningGraph& g) {
  ValidationReport rep;
  auto schema = [&](const std::string& where, const std::string& msg) {
    rep.violations.push_back({Violation::Kind::schema, where, msg});
  };
  auto integrity = [&](const std::string& where, const std::string& msg) {
    rep.violations.push_back({Violation::Kind::integrity, where, msg});
  };

  std::map<std::string, NodeKind> ids;
  auto claim_id = [&](const std::string& id, NodeKind kind, const char* field) {
    if (id == kFinalNodeId) {
      integrity(id, std::string(field) + " uses the reserved id FINAL");
      return;
    }
    auto [it, inserted] = ids.emplace(id, kind);
    (void)it;
    if (!inserted) integrity(id, "duplicate node id");
  };

  auto check_support = [&](const std::vector<Evidence>& support, const std::string& where) {
    size_t i = 0;
    for (const auto& ev : support) {
      std::string w = where + ".support[" + std::to_string(i++) + "]";
      if (!kEvidenceSource.count(ev.source))
        schema(w, "invalid evidence source '" + ev.source + "'");
      if (ev.quote.empty()) schema(w, "evidence quote must be non-empty");
    }
  };

  for (const auto& f : g.facts) {
    claim_id(f.fid, NodeKind::fact, "fact");
    if (!matches_id_pattern(f.fid, 'F'))
      rep.warnings.push_back("fact id '" + f.fid + "' deviates from the F<number> pattern");
    if (!kPolarity.count(f.polarity))
      schema(f.fid, "invalid polarity '" + f.polarity + "'");
    check_support(f.support, f.fid);
  }
  for (const auto& h : g.hypotheses) {
    claim_id(h.hid, NodeKind::hypothesis, "hypothesis");
    if (!matches_id_pattern(h.hid, 'H'))
      rep.warnings.push_back("hypothesis id '" + h.hid + "' deviates from the H<number> pattern");
    if (!kConfidence.count(h.confidence))
      schema(h.hid, "invalid confidence '" + h.confidence + "'");
    check_support(h.support, h.hid);
  }
  for (const auto& a : g.actions) {
    claim_id(a.aid, NodeKind::action, "action");
    if (!matches_id_pattern(a.aid, 'A'))
      rep.warnings.push_back("action id '" + a.aid + "' deviates from the A<number> pattern");
    if (!kActionType.count(a.action_type))
      schema(a.aid, "invalid action_type '" + a.action_type + "'");
    if (!kActionStatus.count(a.status))
      schema(a.aid, "invalid status '" + a.status + "'");
    check_support(a.support, a.aid);
  }

  // evidence refs: dangling other-node-ref is an error, dangling case ref only a warning
  auto check_refs = [&](const std::vector<Evidence>& support, const std::string& where) {
    for (const auto& ev : support) {
      if (!ev.ref) {
        if (ev.source == "other-node-ref")
          integrity(where, "evidence source other-node-ref requires a ref");
        continue;
      }
      if (!ids.count(*ev.ref) && *ev.ref != kFinalNodeId) {
        if (ev.source == "other-node-ref")
          integrity(where, "evidence ref '" + *ev.ref + "' names no node");
        else
          rep.warnings.push_back(where + ": evidence ref '" + *ev.ref + "' names no node");
      }
    }
  };
  for (const auto& f : g.facts) check_refs(f.support, f.fid);
  for (const auto& h : g.hypotheses) check_refs(h.support, h.hid);
  for (const auto& a : g.actions) check_refs(a.support, a.aid);

  std::set<std::string> eids;
  for (const auto& e : g.edges) {
    if (!eids.insert(e.eid).second) integrity(e.eid, "duplicate edge id");
    if (!matches_id_pattern(e.eid, 'E'))
      rep.warnings.push_back("edge id '" + e.eid + "' deviates from the E<number> pattern");
    if (!kEdgeType.count(e.type)) schema(e.eid, "invalid edge type '" + e.type + "'");
    if (e.src == e.dst) integrity(e.eid, "edge src equals dst");
    if (e.src == kFinalNodeId) {
      integrity(e.eid, "FINAL cannot be an edge source");
    } else if (!ids.count(e.src)) {
      integrity(e.eid, "edge src '" + e.src + "' names no node");
    }
    if (e.dst != kFinalNodeId && !ids.count(e.dst)) {
      integrity(e.eid, "edge dst '" + e.dst + "' names no node");
    }
  }

  if (g.final.answer.empty()) schema("final", "answer must be non-empty");
  if (!kConfidence.count(g.final.confidence))
    schema("final", "invalid confidence '" + g.final.confidence + "'");

  if (g.node_count() == 0) rep.warnings.push_back("graph declares zero nodes");

  // acyclicity over declared nodes + FINAL, only using edges with resolvable endpoints
  {
    std::map<std::string, std::vector<std::string>> adj;
    std::map<std::string, int> indeg;
    for (const auto& [id, kind] : ids) { (void)kind; indeg[id]; }
    bool final_used = false;
    for (const auto& e : g.edges) {
      bool src_ok = ids.count(e.src) > 0;
      bool dst_ok = ids.count(e.dst) > 0 || e.dst == kFinalNodeId;
      if (!src_ok || !dst_ok || e.src == e.dst) continue;
      if (e.dst == kFinalNodeId) final_used = true;
      adj[e.src].push_back(e.dst);
      ++indeg[e.dst];
    }
    if (final_used) indeg.emplace(kFinalNodeId, indeg[kFinalNodeId]);
    std::queue<std::string> q;
    for (const auto& [id, d] : indeg)
      if (d == 0) q.push(id);
    size_t seen = 0;
    auto indeg_work = indeg;
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      ++seen;
      for (const auto& v : adj[u]) {
        if (--indeg_work[v] == 0) q.push(v);
      }
    }
    if (seen != indeg.size()) integrity("$", "graph contains a cycle");
  }

  return rep;
}

std::pair<ReasoningGraph, ValidationReport> parse_graph_report(const std::string& raw) {
  json doc;
  bool parsed = false;
  std::string trimmed = trim(raw);
  if (!trimmed.empty()) {
    doc = json::parse(trimmed, nullptr, false);
    parsed = !doc.is_discarded();
  }
  if (!parsed) {
    std::string inner = trim(strip_code_fence(raw));
    if (!inner.empty()) {
      doc = json::parse(inner, nullptr, false);
      parsed = !doc.is_discarded();
    }
  }
  if (!parsed) throw MalformedDocument("document is not valid JSON (with or without code fence)");

  ReasoningGraph g = graph_from_json(doc);
  ValidationReport rep = validate(g);
  return {std::move(g), std::move(rep)};
}

ReasoningGraph parse_graph(const std::string& raw) {
  auto [g, rep] = parse_graph_report(raw);
  if (!rep.ok()) {
    std::string schema_msgs, integ_msgs;
    for (const auto& v : rep.violations) {
      std::string line = v.where + ": " + v.message;
      if (v.kind == Violation::Kind::schema) {
        schema_msgs += (schema_msgs.empty() ? "" : "; ") + line;
      } else {
        integ_msgs += (integ_msgs.empty() ? "" : "; ") + line;
      }
    }
    if (!schema_msgs.empty()) throw SchemaViolation(schema_msgs);
    throw IntegrityViolation(integ_msgs);
  }
  return g;
}

namespace {

json evidence_to_json(const Evidence& ev) {
  json o = ev.extras.is_object() ? ev.extras : json::object();
  o["source"] = ev.source;
  o["ref"] = ev.ref ? json(*ev.ref) : json(nullptr);
  o["quote"] = ev.quote;
  return o;
}

json support_to_json(const std::vector<Evidence>& support) {
  json arr = json::array();
  for (const auto& ev : support) arr.push_back(evidence_to_json(ev));
  return arr;
}

}  // namespace

json graph_to_json(const ReasoningGraph& g) {
  json doc = g.extras.is_object() ? g.extras : json::object();
  doc["artifact_id"] = g.artifact_id;
  doc["qid"] = g.qid;
  doc["facts"] = json::array();
  for (const auto& f : g.facts) {
    json o = f.extras.is_object() ? f.extras : json::object();
    o["fid"] = f.fid;
    o["label"] = f.label;
    o["value"] = f.value ? json(*f.value) : json(nullptr);
    o["polarity"] = f.polarity;
    o["support"] = support_to_json(f.support);
    doc["facts"].push_back(std::move(o));
  }
  doc["hypotheses"] = json::array();
  for (const auto& h : g.hypotheses) {
    json o = h.extras.is_object() ? h.extras : json::object();
    o["hid"] = h.hid;
    o["label"] = h.label;
    o["confidence"] = h.confidence;
    o["support"] = support_to_json(h.support);
    doc["hypotheses"].push_back(std::move(o));
  }
  doc["actions"] = json::array();
  for (const auto& a : g.actions) {
    json o = a.extras.is_object() ? a.extras : json::object();
    o["aid"] = a.aid;
    o["label"] = a.label;
    o["action_type"] = a.action_type;
    o["status"] = a.status;
    o["support"] = support_to_json(a.support);
    doc["actions"].push_back(std::move(o));
  }
  doc["edges"] = json::array();
  for (const auto& e : g.edges) {
    json o = e.extras.is_object() ? e.extras : json::object();
    o["eid"] = e.eid;
    o["src"] = e.src;
    o["dst"] = e.dst;
    o["type"] = e.type;
    o["justification"] = e.justification;
    o["guideline_support"] = e.guideline_support ? json(*e.guideline_support) : json(nullptr);
    doc["edges"].push_back(std::move(o));
  }
  json fin = g.final.extras.is_object() ? g.final.extras : json::object();
  fin["answer"] = g.final.answer;
  fin["answer_text"] = g.final.answer_text;
  fin["confidence"] = g.final.confidence;
  fin["uncertainties"] = g.final.uncertainties;
  doc["final"] = std::move(fin);
  return doc;
}

std::string serialize_graph(const ReasoningGraph& g) { return graph_to_json(g).dump(); }

std::vector<std::string> topological_order(const ReasoningGraph& g) {
  std::map<std::string, std::vector<std::string>> adj;
  std::map<std::string, int> indeg;
  for (const auto& f : g.facts) indeg[f.fid];
  for (const auto& h : g.hypotheses) indeg[h.hid];
  for (const auto& a : g.actions) indeg[a.aid];
  bool final_used = false;
  for (const auto& e : g.edges) {
    if (e.dst == kFinalNodeId) final_used = true;
    adj[e.src].push_back(e.dst);
    ++indeg[e.dst];
  }
  if (final_used) indeg.emplace(kFinalNodeId, indeg[kFinalNodeId]);

  std::priority_queue<std::string, std::vector<std::string>, std::greater<>> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.push(id);

  std::vector<std::string> order;
  bool final_ready = false;
  while (!ready.empty() || final_ready) {
    if (ready.empty()) {
      order.push_back(kFinalNodeId);
      final_ready = false;
      continue;
    }
    auto u = ready.top();
    ready.pop();
    if (u == kFinalNodeId) {
      final_ready = true;  // hold FINAL until everything else is out
      continue;
    }
    order.push_back(u);
    for (const auto& v : adj[u]) {
      if (--indeg[v] == 0) ready.push(v);
    }
  }
  if (final_ready) order.push_back(kFinalNodeId);
  if (order.size() != indeg.size()) throw CycleDetected("graph contains a cycle");
  return order;
}

namespace {

json sorted_nodes_json(const ReasoningGraph& g) {
  // canonical per-kind node arrays sorted by id, for order-insensitive comparison
  json doc = graph_to_json(g);
  auto sort_by = [&](const char* key, const char* idkey) {
    auto& arr = doc[key];
    std::sort(arr.begin(), arr.end(), [&](const json& a, const json& b) {
      return a[idkey].get<std::string>() < b[idkey].get<std::string>();
    });
  };
  sort_by("facts", "fid");
  sort_by("hypotheses", "hid");
  sort_by("actions", "aid");
  return doc;
}

}  // namespace

bool structurally_equal(const ReasoningGraph& a, const ReasoningGraph& b) {
  return sorted_nodes_json(a) == sorted_nodes_json(b);
}

ReasoningGraph load_graph_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedDocument("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_graph(ss.str());
}

std::vector<ReasoningGraph> load_graph_stream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedDocument("cannot open graph file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string content = ss.str();

  // whole-file document first; else one graph per non-empty line
  try {
    return {parse_graph(content)};
  } catch (const MalformedDocument&) {
  }
  std::vector<ReasoningGraph> out;
  std::istringstream lines(content);
  std::string line;
  size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_graph(line));
    } catch (const Error& e) {
      throw MalformedDocument("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty()) throw MalformedDocument("no graph documents in file: " + path);
  return out;
}

std::optional<NodeView> find_node(const ReasoningGraph& g, const std::string& id) {
  for (const auto& f : g.facts)
    if (f.fid == id) return NodeView{NodeKind::fact, &f.fid, &f.label};
  for (const auto& h : g.hypotheses)
    if (h.hid == id) return NodeView{NodeKind::hypothesis, &h.hid, &h.label};
  for (const auto& a : g.actions)
    if (a.aid == id) return NodeView{NodeKind::action, &a.aid, &a.label};
  return std::nullopt;
}

std::string canned_graph_document() {
  static const char* doc = R"({
  "artifact_id": "canned",
  "qid": "canned",
  "facts": [
    {"fid": "F1", "label": "finding documented in note", "value": null, "polarity": "present",
     "support": [{"source": "case", "ref": null, "quote": "finding documented in note"}]}
  ],
  "hypotheses": [
    {"hid": "H1", "label": "working diagnosis", "confidence": "low",
     "support": [{"source": "case", "ref": null, "quote": "working diagnosis"}]}
  ],
  "actions": [
    {"aid": "A1", "label": "clinical follow-up", "action_type": "ASSESS", "status": "not_specified",
     "support": [{"source": "case", "ref": null, "quote": "clinical follow-up"}]}
  ],
  "edges": [
    {"eid": "E1", "src": "F1", "dst": "H1", "type": "supports", "justification": "finding supports diagnosis", "guideline_support": null},
    {"eid": "E2", "src": "H1", "dst": "FINAL", "type": "supports", "justification": "diagnosis drives the answer", "guideline_support": null}
  ],
  "final": {"answer": "unknown", "answer_text": "insufficient scripted response", "confidence": "uncertain", "uncertainties": []}
})";
  return doc;
}

}  // namespace drl
