#include "pipeforge/graph.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <unordered_map>

#include "json_support.hpp"
#include "pipeforge/error.hpp"

namespace pipeforge {

namespace {

using detail::json;
using detail::ordered_json;

ordered_json coordinate(double v) {
  if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 9.0e15) {
    return static_cast<std::int64_t>(v);
  }
  return v;
}

// Strongly connected components with more than one node, or a self loop.
std::vector<std::vector<std::size_t>> cyclic_components(const std::vector<std::vector<std::size_t>>& succ) {
  const std::size_t n = succ.size();
  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> out;
  int counter = 0;

  std::function<void(std::size_t)> strongconnect = [&](std::size_t v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    on_stack[v] = true;
    for (std::size_t w : succ[v]) {
      if (index[w] < 0) {
        strongconnect(w);
        low[v] = std::min(low[v], low[w]);
      } else if (on_stack[w]) {
        low[v] = std::min(low[v], index[w]);
      }
    }
    if (low[v] == index[v]) {
      std::vector<std::size_t> component;
      std::size_t w;
      do {
        w = stack.back();
        stack.pop_back();
        on_stack[w] = false;
        component.push_back(w);
      } while (w != v);
      const bool self_loop = std::find(succ[v].begin(), succ[v].end(), v) != succ[v].end();
      if (component.size() > 1 || self_loop) {
        std::sort(component.begin(), component.end());
        out.push_back(std::move(component));
      }
    }
  };
  for (std::size_t v = 0; v < n; ++v) {
    if (index[v] < 0) strongconnect(v);
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace

std::size_t SerializedNode::edge_count() const {
  std::size_t n = 0;
  for (const auto& [_, edges] : incoming_edges) n += edges.size();
  return n;
}

const SerializedNode* SerializedGraph::find(std::string_view id) const {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const SerializedNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

SerializedNode* SerializedGraph::find(std::string_view id) {
  auto it = std::find_if(nodes.begin(), nodes.end(), [&](const SerializedNode& n) { return n.id == id; });
  return it == nodes.end() ? nullptr : &*it;
}

std::size_t SerializedGraph::edge_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes) n += node.edge_count();
  return n;
}

std::vector<Edge> edges_of(const SerializedGraph& graph) {
  std::vector<Edge> out;
  for (const auto& node : graph.nodes) {
    for (const auto& [input, edges] : node.incoming_edges) {
      for (const auto& e : edges) {
        out.push_back({e.source_node_id, e.output_id, node.id, input});
      }
    }
  }
  return out;
}

bool same_structure(const SerializedGraph& a, const SerializedGraph& b) {
  if (a.nodes.size() != b.nodes.size()) return false;
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    const auto& x = a.nodes[i];
    const auto& y = b.nodes[i];
    if (x.id != y.id || x.node_spec_id != y.node_spec_id || x.incoming_edges != y.incoming_edges) return false;
  }
  return true;
}

std::string_view to_string(ViolationKind kind) {
  switch (kind) {
  case ViolationKind::duplicate_id: return "duplicate id";
  case ViolationKind::empty_id: return "empty id";
  case ViolationKind::unknown_spec: return "unknown spec";
  case ViolationKind::unknown_input: return "unknown input";
  case ViolationKind::missing_source: return "missing source";
  case ViolationKind::unknown_output: return "unknown output";
  case ViolationKind::type_mismatch: return "type mismatch";
  case ViolationKind::cycle: return "cycle";
  }
  return "violation";
}

std::vector<Violation> validate(const SerializedGraph& graph, const Registry& registry) {
  std::vector<Violation> out;
  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    if (node.id.empty()) {
      out.push_back({ViolationKind::empty_id, {}, "node " + std::to_string(i) + " has an empty id"});
      continue;
    }
    if (!position.emplace(node.id, i).second) {
      out.push_back({ViolationKind::duplicate_id, {node.id}, "duplicate node id '" + node.id + "'"});
    }
  }

  std::vector<std::vector<std::size_t>> succ(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto& node = graph.nodes[i];
    const NodeSpec* spec = registry.find(node.node_spec_id);
    if (spec == nullptr) {
      out.push_back({ViolationKind::unknown_spec, {node.id},
                     "node '" + node.id + "' has unknown nodeSpecId '" + node.node_spec_id + "'"});
    }
    for (const auto& [input, edges] : node.incoming_edges) {
      const SocketSpec* in_socket = spec ? spec->find_input(input) : nullptr;
      if (spec != nullptr && in_socket == nullptr) {
        out.push_back({ViolationKind::unknown_input, {node.id},
                       "node '" + node.id + "' (" + node.node_spec_id + ") has no input socket '" + input + "'"});
      }
      for (const auto& edge : edges) {
        if (edge.source_node_id.empty() || edge.output_id.empty()) {
          out.push_back({ViolationKind::empty_id, {node.id}, "edge into '" + node.id + "." + input + "' has an empty id"});
          continue;
        }
        auto src = position.find(edge.source_node_id);
        if (src == position.end()) {
          out.push_back({ViolationKind::missing_source, {node.id, edge.source_node_id},
                         "edge into '" + node.id + "." + input + "' comes from missing node '" +
                             edge.source_node_id + "'"});
          continue;
        }
        succ[src->second].push_back(i);
        const auto& source = graph.nodes[src->second];
        const NodeSpec* source_spec = registry.find(source.node_spec_id);
        if (source_spec == nullptr) continue;
        const SocketSpec* out_socket = source_spec->find_output(edge.output_id);
        if (out_socket == nullptr) {
          out.push_back({ViolationKind::unknown_output, {source.id, node.id},
                         "node '" + source.id + "' (" + source.node_spec_id + ") has no output socket '" +
                             edge.output_id + "'"});
          continue;
        }
        if (in_socket != nullptr && !in_socket->accepts_any_of(out_socket->data_types)) {
          out.push_back({ViolationKind::type_mismatch, {source.id, node.id},
                         "'" + source.id + "." + edge.output_id + "' cannot feed '" + node.id + "." + input + "'"});
        }
      }
    }
  }

  for (const auto& component : cyclic_components(succ)) {
    Violation v{ViolationKind::cycle, {}, "cycle through"};
    for (std::size_t idx : component) {
      v.node_ids.push_back(graph.nodes[idx].id);
      v.message += " '" + graph.nodes[idx].id + "'";
    }
    out.push_back(std::move(v));
  }
  return out;
}

namespace detail {

ordered_json graph_to_value(const SerializedGraph& graph) {
  ordered_json nodes = ordered_json::array();
  for (const auto& node : graph.nodes) {
    ordered_json incoming = ordered_json::object();
    for (const auto& [input, edges] : node.incoming_edges) {
      ordered_json list = ordered_json::array();
      for (const auto& e : edges) {
        list.push_back({{"sourceNodeId", e.source_node_id}, {"outputId", e.output_id}});
      }
      incoming[input] = std::move(list);
    }
    ordered_json entry;
    entry["id"] = node.id;
    entry["nodeSpecId"] = node.node_spec_id;
    entry["incomingEdges"] = std::move(incoming);
    entry["params"] = params_to_json(node.params);
    entry["position"] = {{"x", coordinate(node.position.x)}, {"y", coordinate(node.position.y)}};
    nodes.push_back(std::move(entry));
  }
  ordered_json doc;
  doc["nodes"] = std::move(nodes);
  return doc;
}

SerializedGraph graph_from_value(const json& value, const std::string& path) {
  const json& nodes = require(value, "nodes", path);
  if (!nodes.is_array()) {
    throw ValidationError(path + ".nodes: expected an array");
  }
  SerializedGraph graph;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::string here = path + ".nodes[" + std::to_string(i) + "]";
    const json& entry = nodes[i];
    SerializedNode node;
    node.id = require_string(entry, "id", here);
    node.node_spec_id = require_string(entry, "nodeSpecId", here);
    if (auto it = entry.find("incomingEdges"); it != entry.end() && !it->is_null()) {
      if (!it->is_object()) {
        throw ValidationError(here + ".incomingEdges: expected an object");
      }
      for (const auto& [input, list] : it->items()) {
        const std::string socket_path = here + ".incomingEdges." + input;
        if (!list.is_array()) {
          throw ValidationError(socket_path + ": expected an array");
        }
        auto& edges = node.incoming_edges[input];
        for (std::size_t k = 0; k < list.size(); ++k) {
          const std::string edge_path = socket_path + "[" + std::to_string(k) + "]";
          edges.push_back({require_string(list[k], "sourceNodeId", edge_path),
                           require_string(list[k], "outputId", edge_path)});
        }
      }
    }
    if (auto it = entry.find("params"); it != entry.end() && !it->is_null()) {
      node.params = params_from_json(*it, here + ".params");
    }
    if (auto it = entry.find("position"); it != entry.end() && !it->is_null()) {
      const json& x = require(*it, "x", here + ".position");
      const json& y = require(*it, "y", here + ".position");
      if (!x.is_number() || !y.is_number()) {
        throw ValidationError(here + ".position: x and y must be numbers");
      }
      node.position = {x.get<double>(), y.get<double>()};
    }
    graph.nodes.push_back(std::move(node));
  }
  return graph;
}

} // namespace detail

std::string to_json(const SerializedGraph& graph, int indent) {
  return detail::graph_to_value(graph).dump(indent) + (indent >= 0 ? "\n" : "");
}

SerializedGraph from_json(std::string_view text) {
  return detail::graph_from_value(detail::parse_json(text, "pipeline"), "$");
}

} // namespace pipeforge
