#pragma once

// Minimal number of user interactions (node add/delete, edge add/delete)
// that turn a generated pipeline into a target pipeline.
//
// For a partial injective mapping m from generated nodes to target nodes of
// the same node spec, the cost is
//   unmapped generated nodes            (delete_node, incident edges go too)
// + unmapped target nodes               (add_node)
// + edges between mapped nodes present on one side only (delete/add_edge)
// + target edges touching an unmapped target node         (add_edge)
// and the count is the minimum over all m. Edges are compared as
// (source, output socket, destination, input socket) multisets. Node
// parameters are never charged. Without cascade deletion every generated
// edge touching a deleted node costs one extra delete_edge.

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/graph.hpp"

namespace pipeforge {

enum class EditKind { add_node, delete_node, add_edge, delete_edge };

std::string_view to_string(EditKind kind);

/// Node ops use node_id/node_spec_id; edge ops use edge. Ids live in the
/// generated graph's id space (new nodes get fresh ids).
struct EditOp {
  EditKind kind = EditKind::add_node;
  std::string node_id;
  std::string node_spec_id;
  Edge edge;

  static EditOp add_node(std::string id, std::string spec) { return {EditKind::add_node, std::move(id), std::move(spec), {}}; }
  static EditOp delete_node(std::string id, std::string spec) {
    return {EditKind::delete_node, std::move(id), std::move(spec), {}};
  }
  static EditOp add_edge(Edge e) { return {EditKind::add_edge, {}, {}, std::move(e)}; }
  static EditOp delete_edge(Edge e) { return {EditKind::delete_edge, {}, {}, std::move(e)}; }
  friend bool operator==(const EditOp&, const EditOp&) = default;
};

struct InteractionReport {
  std::size_t count = 0;
  std::size_t from_scratch = 0; // |target nodes| + |target edges|
  double ratio = 0;
  std::vector<EditOp> script;
  // generated id -> target id, in generated insertion order.
  std::vector<std::pair<std::string, std::string>> mapping;
  // target id -> id of the same node after apply_script.
  std::map<std::string, std::string> target_to_result;
};

struct MetricOptions {
  bool cascade = true;
  std::size_t max_nodes = 15;
  std::uint64_t max_expansions = 20'000'000;
  std::chrono::milliseconds time_budget{20'000};
};

class BudgetExceeded : public Error {
public:
  using Error::Error;
};

class InvalidGraph : public ValidationError {
public:
  InvalidGraph(std::string which, std::vector<Violation> violations);
  const std::string& which() const { return which_; }
  const std::vector<Violation>& violations() const { return violations_; }

private:
  std::string which_;
  std::vector<Violation> violations_;
};

class ScriptError : public Error {
public:
  ScriptError(std::size_t op_index, const std::string& message)
      : Error("op " + std::to_string(op_index) + ": " + message), op_index_(op_index) {}
  std::size_t op_index() const { return op_index_; }

private:
  std::size_t op_index_;
};

/// count / from_scratch; 0 for two empty graphs and 1 when only the target
/// is empty.
double interaction_ratio(std::size_t count, std::size_t from_scratch);

/// Exact branch-and-bound search. Equal-cost mappings are broken toward the
/// lexicographically smallest (generated index -> target index) vector, with
/// "unmapped" ordered last. Throws ValidationError when ids are duplicated
/// or an edge source is missing, BudgetExceeded past the node/time budget.
InteractionReport interactions(const SerializedGraph& generated, const SerializedGraph& target,
                               const MetricOptions& options = {});

/// Same, after checking both graphs against the registry (InvalidGraph).
InteractionReport interactions(const SerializedGraph& generated, const SerializedGraph& target,
                               const Registry& registry, const MetricOptions& options = {});

inline constexpr std::size_t kOracleMaxNodes = 8;

/// Exhaustive enumeration of every type-respecting injective partial
/// mapping, no pruning. Reference for interactions(); at most 8 nodes per
/// graph (BudgetExceeded otherwise).
std::size_t oracle_interactions(const SerializedGraph& generated, const SerializedGraph& target, bool cascade = true);

/// Applies ops in order. delete_node also removes incident edges. Throws
/// ScriptError naming the first inapplicable op.
SerializedGraph apply_script(const SerializedGraph& graph, const std::vector<EditOp>& script);

/// True when target_to_result is a bijection between the node sets that
/// preserves node spec ids and maps the target's edge multiset exactly onto
/// the result's.
bool isomorphic_under(const SerializedGraph& result, const SerializedGraph& target,
                      const std::map<std::string, std::string>& target_to_result);

/// JSON object {count, fromScratch, ratio, script, mapping}.
std::string to_json(const InteractionReport& report, int indent = 2);

} // namespace pipeforge
