#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/registry.hpp"

namespace pipeforge {

struct IncomingEdge {
  std::string source_node_id;
  std::string output_id;
  friend auto operator<=>(const IncomingEdge&, const IncomingEdge&) = default;
};

struct Position {
  double x = 0;
  double y = 0;
  friend bool operator==(const Position&, const Position&) = default;
};

struct SerializedNode {
  std::string id;
  std::string node_spec_id;
  std::map<std::string, std::vector<IncomingEdge>> incoming_edges; // input socket id -> edges
  ParamMap params;
  Position position;

  std::size_t edge_count() const;
  friend bool operator==(const SerializedNode&, const SerializedNode&) = default;
};

/// Pipeline DAG in the node-editor wire format. Node order is insertion order.
struct SerializedGraph {
  std::vector<SerializedNode> nodes;

  const SerializedNode* find(std::string_view id) const;
  SerializedNode* find(std::string_view id);
  std::size_t edge_count() const;
  friend bool operator==(const SerializedGraph&, const SerializedGraph&) = default;
};

/// Flattened edge, used by layout and metric code.
struct Edge {
  std::string source;
  std::string output_id;
  std::string target;
  std::string input_id;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Edges in node order, then socket order, then list order.
std::vector<Edge> edges_of(const SerializedGraph& graph);

/// True when both graphs have the same node ids, spec ids and edges in the
/// same order. Positions and params are ignored.
bool same_structure(const SerializedGraph& a, const SerializedGraph& b);

enum class ViolationKind {
  duplicate_id,
  empty_id,
  unknown_spec,
  unknown_input,
  missing_source,
  unknown_output,
  type_mismatch,
  cycle,
};

std::string_view to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::vector<std::string> node_ids;
  std::string message;
};

/// Empty iff the graph satisfies every structural and typing rule against
/// the registry, including acyclicity.
std::vector<Violation> validate(const SerializedGraph& graph, const Registry& registry);

/// Wire format: {"nodes": [{"id", "nodeSpecId", "incomingEdges": {inputId:
/// [{"sourceNodeId", "outputId"}]}, "params", "position": {"x", "y"}}]}.
std::string to_json(const SerializedGraph& graph, int indent = 2);

/// Throws ParseError for malformed JSON and ValidationError (with a JSON
/// path) for schema errors. Registry-level checks are left to validate().
SerializedGraph from_json(std::string_view text);

} // namespace pipeforge
