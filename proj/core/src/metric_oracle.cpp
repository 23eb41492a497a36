// Reference implementation of the interaction count: plain enumeration of
// every mapping, evaluated straight from the cost definition. Shares no code
// with the branch-and-bound search.

#include <functional>
#include <limits>
#include <set>
#include <tuple>

#include "pipeforge/metric.hpp"

namespace pipeforge {

namespace {

using EdgeKey = std::tuple<std::size_t, std::string, std::size_t, std::string>;

struct Flat {
  std::vector<std::string> spec;
  std::vector<EdgeKey> edges; // (source index, output, target index, input)
};

Flat flatten(const SerializedGraph& graph) {
  Flat flat;
  for (const auto& node : graph.nodes) flat.spec.push_back(node.node_spec_id);
  auto index_of = [&](const std::string& id) {
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      if (graph.nodes[i].id == id) return i;
    }
    throw ValidationError("edge source '" + id + "' not in graph");
  };
  for (std::size_t v = 0; v < graph.nodes.size(); ++v) {
    for (const auto& [input, edges] : graph.nodes[v].incoming_edges) {
      for (const auto& e : edges) flat.edges.emplace_back(index_of(e.source_node_id), e.output_id, v, input);
    }
  }
  return flat;
}

std::size_t evaluate(const Flat& g, const Flat& t, const std::vector<long>& map, bool cascade) {
  std::size_t cost = 0;
  std::vector<bool> hit(t.spec.size(), false);
  for (long m : map) {
    if (m < 0) {
      ++cost; // delete_node
    } else {
      hit[static_cast<std::size_t>(m)] = true;
    }
  }
  for (bool h : hit) {
    if (!h) ++cost; // add_node
  }
  std::multiset<EdgeKey> image;
  for (const auto& [u, out, v, in] : g.edges) {
    if (map[u] < 0 || map[v] < 0) {
      if (!cascade) ++cost;
      continue;
    }
    image.emplace(static_cast<std::size_t>(map[u]), out, static_cast<std::size_t>(map[v]), in);
  }
  std::multiset<EdgeKey> wanted(t.edges.begin(), t.edges.end());
  for (const auto& key : image) {
    auto it = wanted.find(key);
    if (it == wanted.end()) {
      ++cost; // delete_edge
    } else {
      wanted.erase(it);
    }
  }
  return cost + wanted.size(); // add_edge for whatever is left
}

} // namespace

std::size_t oracle_interactions(const SerializedGraph& generated, const SerializedGraph& target, bool cascade) {
  if (generated.nodes.size() > kOracleMaxNodes || target.nodes.size() > kOracleMaxNodes) {
    throw BudgetExceeded("oracle is limited to " + std::to_string(kOracleMaxNodes) + " nodes per graph");
  }
  const Flat g = flatten(generated);
  const Flat t = flatten(target);
  std::vector<long> map(g.spec.size(), -1);
  std::vector<bool> used(t.spec.size(), false);
  std::size_t best = std::numeric_limits<std::size_t>::max();

  std::function<void(std::size_t)> enumerate = [&](std::size_t k) {
    if (k == map.size()) {
      best = std::min(best, evaluate(g, t, map, cascade));
      return;
    }
    map[k] = -1;
    enumerate(k + 1);
    for (std::size_t a = 0; a < t.spec.size(); ++a) {
      if (used[a] || t.spec[a] != g.spec[k]) continue;
      used[a] = true;
      map[k] = static_cast<long>(a);
      enumerate(k + 1);
      used[a] = false;
    }
    map[k] = -1;
  };
  enumerate(0);
  return best;
}

} // namespace pipeforge
