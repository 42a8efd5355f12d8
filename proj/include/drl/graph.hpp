#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace drl {

// Reserved pseudo-node id. Legal only as an edge destination; never a declared node.
inline constexpr const char* kFinalNodeId = "FINAL";

enum class NodeKind { fact, hypothesis, action };

const char* node_kind_name(NodeKind k);

struct Evidence {
  std::string source;  // "case" | "other-node-ref"
  std::optional<std::string> ref;
  std::string quote;
  nlohmann::json extras = nlohmann::json::object();
};

struct FactNode {
  std::string fid;
  std::string label;
  std::optional<std::string> value;
  std::string polarity;  // "present" | "absent" | "uncertain"
  std::vector<Evidence> support;
  nlohmann::json extras = nlohmann::json::object();
};

struct HypothesisNode {
  std::string hid;
  std::string label;
  std::string confidence;  // "high" | "medium" | "low" | "uncertain"
  std::vector<Evidence> support;
  nlohmann::json extras = nlohmann::json::object();
};

struct ActionNode {
  std::string aid;
  std::string label;
  std::string action_type;  // "TEST" | "TREAT" | "ASSESS" | "OBSERVE" | "PRESCRIBE"
  std::string status;       // "recommended" | "contraindicated" | "optional" | "not_specified"
  std::vector<Evidence> support;
  nlohmann::json extras = nlohmann::json::object();
};

struct EdgeRec {
  std::string eid;
  std::string src;
  std::string dst;
  std::string type;  // "supports" | "contradicts" | "suggests_test"
  std::string justification;
  std::optional<std::string> guideline_support;
  nlohmann::json extras = nlohmann::json::object();
};

struct FinalAnswer {
  std::string answer;
  std::string answer_text;
  std::string confidence;  // same set as hypothesis confidence
  std::vector<std::string> uncertainties;
  nlohmann::json extras = nlohmann::json::object();
};

struct ReasoningGraph {
  std::string artifact_id;
  std::string qid;
  std::vector<FactNode> facts;
  std::vector<HypothesisNode> hypotheses;
  std::vector<ActionNode> actions;
  std::vector<EdgeRec> edges;
  FinalAnswer final;
  nlohmann::json extras = nlohmann::json::object();

  size_t node_count() const { return facts.size() + hypotheses.size() + actions.size(); }
};

struct Violation {
  enum class Kind { schema, integrity };
  Kind kind;
  std::string where;    // node/edge id or json path
  std::string message;
};

struct ValidationReport {
  std::vector<Violation> violations;
  std::vector<std::string> warnings;
  bool ok() const { return violations.empty(); }
};

// Structural checks on an already-built graph: enum values, non-empty quotes/answer,
// id uniqueness and patterns, edge endpoint resolution, FINAL usage, acyclicity.
ValidationReport validate(const ReasoningGraph& g);

// Accepts raw model output: optional prose around a single fenced code block, or bare JSON.
// Throws MalformedDocument / SchemaViolation / IntegrityViolation.
ReasoningGraph parse_graph(const std::string& raw);

// Same acceptance rules, but validation findings are returned instead of thrown.
// Still throws MalformedDocument when no JSON object can be recovered at all.
std::pair<ReasoningGraph, ValidationReport> parse_graph_report(const std::string& raw);

// Compact single-line JSON; unknown fields captured at parse time are re-emitted.
std::string serialize_graph(const ReasoningGraph& g);
nlohmann::json graph_to_json(const ReasoningGraph& g);

// Kahn's algorithm. Ties broken by ascending lexicographic id; FINAL (when referenced
// by an edge) is emitted last. Unconnected nodes are included. Throws CycleDetected.
std::vector<std::string> topological_order(const ReasoningGraph& g);

// Order-insensitive for node lists, order-preserving for edges; compares extras too.
bool structurally_equal(const ReasoningGraph& a, const ReasoningGraph& b);

// Whole file is either one JSON document (possibly pretty-printed) or one graph per line.
ReasoningGraph load_graph_file(const std::string& path);
std::vector<ReasoningGraph> load_graph_stream(const std::string& path);

// Lookup helpers. Returns nullptr when the id names no node.
struct NodeView {
  NodeKind kind;
  const std::string* id;
  const std::string* label;
};
std::optional<NodeView> find_node(const ReasoningGraph& g, const std::string& id);

// Schema-valid single-fact/hypothesis/action document used as the mock provider's
// canned extraction fallback.
std::string canned_graph_document();

}  // namespace drl
