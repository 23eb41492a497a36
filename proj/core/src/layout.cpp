#include "pipeforge/layout.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace pipeforge {

namespace {

std::vector<std::vector<std::size_t>> successors(const SerializedGraph& graph) {
  std::unordered_map<std::string_view, std::size_t> index;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    index.emplace(graph.nodes[i].id, i);
  }
  std::vector<std::vector<std::size_t>> succ(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (const auto& [_, edges] : graph.nodes[i].incoming_edges) {
      for (const auto& e : edges) {
        if (auto it = index.find(e.source_node_id); it != index.end()) {
          succ[it->second].push_back(i);
        }
      }
    }
  }
  return succ;
}

void reject_cycles(const SerializedGraph& graph, const std::vector<std::vector<std::size_t>>& succ) {
  enum class Mark { unvisited, active, done };
  std::vector<Mark> mark(succ.size(), Mark::unvisited);
  struct Frame {
    std::size_t node;
    std::size_t next = 0;
  };
  for (std::size_t root = 0; root < succ.size(); ++root) {
    if (mark[root] != Mark::unvisited) continue;
    std::vector<Frame> stack{{root}};
    mark[root] = Mark::active;
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next == succ[top.node].size()) {
        mark[top.node] = Mark::done;
        stack.pop_back();
        continue;
      }
      const std::size_t v = succ[top.node][top.next++];
      if (mark[v] == Mark::active) {
        throw CycleError(graph.nodes[top.node].id, graph.nodes[v].id);
      }
      if (mark[v] == Mark::unvisited) {
        mark[v] = Mark::active;
        stack.push_back({v});
      }
    }
  }
}

} // namespace

std::vector<std::size_t> layer_columns(const SerializedGraph& graph) {
  const auto succ = successors(graph);
  reject_cycles(graph, succ);

  std::vector<std::size_t> indegree(succ.size(), 0);
  for (const auto& targets : succ) {
    for (std::size_t v : targets) ++indegree[v];
  }
  std::deque<std::size_t> queue;
  for (std::size_t i = 0; i < succ.size(); ++i) {
    if (indegree[i] == 0) queue.push_back(i);
  }
  std::vector<std::size_t> column(succ.size(), 0);
  while (!queue.empty()) {
    const std::size_t u = queue.front();
    queue.pop_front();
    for (std::size_t v : succ[u]) {
      column[v] = std::max(column[v], column[u] + 1);
      if (--indegree[v] == 0) queue.push_back(v);
    }
  }
  return column;
}

SerializedGraph optimize_layout(const SerializedGraph& graph, const LayoutMetrics& metrics) {
  const auto column = layer_columns(graph);
  SerializedGraph out = graph;
  std::vector<std::size_t> rows_used;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    const std::size_t c = column[i];
    if (rows_used.size() <= c) rows_used.resize(c + 1, 0);
    const std::size_t row = rows_used[c]++;
    out.nodes[i].position = {static_cast<double>(c) * (metrics.node_width + metrics.column_gap),
                             static_cast<double>(row) * (metrics.node_height + metrics.row_gap)};
  }
  return out;
}

} // namespace pipeforge
