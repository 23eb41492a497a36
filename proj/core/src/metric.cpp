#include "pipeforge/metric.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "json_support.hpp"

namespace pipeforge {

namespace {

constexpr int kUnmapped = -1;

// Graph flattened to indices: node type ids and, per ordered node pair, the
// sorted multiset of interned (output socket, input socket) ids.
struct IndexedGraph {
  std::vector<int> type;
  std::vector<std::vector<std::vector<int>>> pair; // pair[u][v]
  std::vector<std::pair<std::size_t, std::size_t>> edges;
};

class Interner {
public:
  int operator()(const std::string& key) {
    auto [it, inserted] = ids_.emplace(key, static_cast<int>(ids_.size()));
    return it->second;
  }

private:
  std::unordered_map<std::string, int> ids_;
};

void check_structure(const SerializedGraph& graph, const char* which) {
  std::unordered_set<std::string_view> ids;
  for (const auto& node : graph.nodes) {
    if (!ids.insert(node.id).second) {
      throw ValidationError(std::string(which) + ": duplicate node id '" + node.id + "'");
    }
  }
  for (const auto& node : graph.nodes) {
    for (const auto& [input, edges] : node.incoming_edges) {
      for (const auto& e : edges) {
        if (!ids.contains(e.source_node_id)) {
          throw ValidationError(std::string(which) + ": edge into '" + node.id + "." + input +
                                "' comes from missing node '" + e.source_node_id + "'");
        }
      }
    }
  }
}

IndexedGraph index_graph(const SerializedGraph& graph, Interner& types, Interner& sockets) {
  const std::size_t n = graph.nodes.size();
  IndexedGraph out;
  out.pair.assign(n, std::vector<std::vector<int>>(n));
  std::unordered_map<std::string_view, std::size_t> position;
  for (std::size_t i = 0; i < n; ++i) {
    position.emplace(graph.nodes[i].id, i);
    out.type.push_back(types(graph.nodes[i].node_spec_id));
  }
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& [input, edges] : graph.nodes[v].incoming_edges) {
      for (const auto& e : edges) {
        const std::size_t u = position.at(e.source_node_id);
        out.pair[u][v].push_back(sockets(e.output_id + '\x1f' + input));
        out.edges.emplace_back(u, v);
      }
    }
  }
  for (auto& row : out.pair) {
    for (auto& cell : row) std::sort(cell.begin(), cell.end());
  }
  return out;
}

std::size_t multiset_intersection(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t common = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i < *j) {
      ++i;
    } else if (*j < *i) {
      ++j;
    } else {
      ++common;
      ++i;
      ++j;
    }
  }
  return common;
}

class Search {
public:
  Search(const IndexedGraph& g, const IndexedGraph& t, std::size_t type_count, const MetricOptions& options)
      : g_(g), t_(t), options_(options), gn_(g.type.size()), tn_(t.type.size()) {
    // symdiff_[((u * gn + v) * tn + a) * tn + b] for type-compatible (u,a), (v,b).
    symdiff_.assign(gn_ * gn_ * tn_ * tn_, 0);
    for (std::size_t u = 0; u < gn_; ++u)
      for (std::size_t v = 0; v < gn_; ++v)
        for (std::size_t a = 0; a < tn_; ++a) {
          if (g_.type[u] != t_.type[a]) continue;
          for (std::size_t b = 0; b < tn_; ++b) {
            if (g_.type[v] != t_.type[b]) continue;
            const auto& x = g_.pair[u][v];
            const auto& y = t_.pair[a][b];
            symdiff_[cell(u, v, a, b)] = static_cast<int>(x.size() + y.size() - 2 * multiset_intersection(x, y));
          }
        }
    remaining_g_.assign(type_count, 0);
    available_t_.assign(type_count, 0);
    for (int type : g_.type) ++remaining_g_[static_cast<std::size_t>(type)];
    for (int type : t_.type) ++available_t_[static_cast<std::size_t>(type)];
    used_.assign(tn_, false);
    assignment_.assign(gn_, kUnmapped);
    started_ = std::chrono::steady_clock::now();
  }

  std::vector<int> run() {
    descend(0, 0);
    return best_assignment_;
  }

  std::size_t best_cost() const { return static_cast<std::size_t>(best_); }

private:
  std::size_t cell(std::size_t u, std::size_t v, std::size_t a, std::size_t b) const {
    return ((u * gn_ + v) * tn_ + a) * tn_ + b;
  }

  // Target nodes that can no longer receive a preimage, and edges on them.
  int settled_target_cost(bool final) const {
    int cost = 0;
    auto settled = [&](std::size_t a) {
      return !used_[a] && (final || remaining_g_[static_cast<std::size_t>(t_.type[a])] == 0);
    };
    for (const auto& [a, b] : t_.edges) {
      if (settled(a) || settled(b)) ++cost;
    }
    return cost;
  }

  int bound(int cost) const {
    int nodes = 0;
    for (std::size_t type = 0; type < remaining_g_.size(); ++type) {
      nodes += std::abs(remaining_g_[type] - available_t_[type]);
    }
    return cost + nodes + settled_target_cost(false);
  }

  void tick() {
    ++expansions_;
    if (expansions_ > options_.max_expansions) {
      throw BudgetExceeded("interaction search exceeded " + std::to_string(options_.max_expansions) + " expansions");
    }
    if ((expansions_ & 0xFFF) == 0 && std::chrono::steady_clock::now() - started_ > options_.time_budget) {
      throw BudgetExceeded("interaction search exceeded " + std::to_string(options_.time_budget.count()) + " ms");
    }
  }

  void descend(std::size_t k, int cost) {
    tick();
    if (k == gn_) {
      int unused = 0;
      for (std::size_t a = 0; a < tn_; ++a) unused += used_[a] ? 0 : 1;
      const int total = cost + unused + settled_target_cost(true);
      if (total < best_) {
        best_ = total;
        best_assignment_ = assignment_;
      }
      return;
    }
    const auto type = static_cast<std::size_t>(g_.type[k]);
    --remaining_g_[type];
    for (std::size_t a = 0; a < tn_; ++a) {
      if (used_[a] || static_cast<std::size_t>(t_.type[a]) != type) continue;
      int step = symdiff_[cell(k, k, a, a)];
      for (std::size_t j = 0; j < k; ++j) {
        if (assignment_[j] == kUnmapped) {
          if (!options_.cascade) step += static_cast<int>(g_.pair[j][k].size() + g_.pair[k][j].size());
          continue;
        }
        const auto b = static_cast<std::size_t>(assignment_[j]);
        step += symdiff_[cell(j, k, b, a)] + symdiff_[cell(k, j, a, b)];
      }
      used_[a] = true;
      --available_t_[type];
      assignment_[k] = static_cast<int>(a);
      if (bound(cost + step) < best_) descend(k + 1, cost + step);
      assignment_[k] = kUnmapped;
      ++available_t_[type];
      used_[a] = false;
    }
    int step = 1;
    if (!options_.cascade) {
      step += static_cast<int>(g_.pair[k][k].size());
      for (std::size_t j = 0; j < k; ++j) {
        step += static_cast<int>(g_.pair[j][k].size() + g_.pair[k][j].size());
      }
    }
    if (bound(cost + step) < best_) descend(k + 1, cost + step);
    ++remaining_g_[type];
  }

  const IndexedGraph& g_;
  const IndexedGraph& t_;
  const MetricOptions& options_;
  std::size_t gn_;
  std::size_t tn_;
  std::vector<int> symdiff_;
  std::vector<int> remaining_g_;
  std::vector<int> available_t_;
  std::vector<bool> used_;
  std::vector<int> assignment_;
  std::vector<int> best_assignment_;
  int best_ = std::numeric_limits<int>::max();
  std::uint64_t expansions_ = 0;
  std::chrono::steady_clock::time_point started_;
};

// Lists the (output, input) socket pairs of the edges u -> v.
std::vector<std::pair<std::string, std::string>> pair_sockets(const SerializedNode& target_node,
                                                             const std::string& source_id) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [input, edges] : target_node.incoming_edges) {
    for (const auto& e : edges) {
      if (e.source_node_id == source_id) out.emplace_back(e.output_id, input);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string fresh_id(const std::string& wanted, const std::string& spec_id, std::set<std::string>& taken) {
  if (taken.insert(wanted).second) return wanted;
  for (std::size_t n = 1;; ++n) {
    std::string candidate = spec_id + "_" + std::to_string(n);
    if (taken.insert(candidate).second) return candidate;
  }
}

InteractionReport build_report(const SerializedGraph& generated, const SerializedGraph& target,
                               const std::vector<int>& assignment, std::size_t count, bool cascade) {
  InteractionReport report;
  report.count = count;
  report.from_scratch = target.nodes.size() + target.edge_count();
  report.ratio = interaction_ratio(count, report.from_scratch);

  std::vector<int> preimage(target.nodes.size(), kUnmapped);
  std::set<std::string> taken;
  for (std::size_t u = 0; u < generated.nodes.size(); ++u) {
    taken.insert(generated.nodes[u].id);
    if (assignment[u] != kUnmapped) {
      const auto a = static_cast<std::size_t>(assignment[u]);
      preimage[a] = static_cast<int>(u);
      report.mapping.emplace_back(generated.nodes[u].id, target.nodes[a].id);
    }
  }
  for (std::size_t a = 0; a < target.nodes.size(); ++a) {
    const auto& node = target.nodes[a];
    report.target_to_result[node.id] = preimage[a] == kUnmapped
                                           ? fresh_id(node.id, node.node_spec_id, taken)
                                           : generated.nodes[static_cast<std::size_t>(preimage[a])].id;
  }

  auto& script = report.script;
  // Excess generated edges between mapped nodes, plus (strict mode) every
  // edge touching a node about to be deleted.
  std::unordered_map<std::string_view, std::size_t> gpos;
  for (std::size_t u = 0; u < generated.nodes.size(); ++u) gpos.emplace(generated.nodes[u].id, u);
  for (std::size_t v = 0; v < generated.nodes.size(); ++v) {
    const auto& dst = generated.nodes[v];
    std::set<std::string> sources;
    for (const auto& [_, edges] : dst.incoming_edges)
      for (const auto& e : edges) sources.insert(e.source_node_id);
    for (const auto& source_id : sources) {
      const std::size_t u = gpos.at(source_id);
      auto mine = pair_sockets(dst, source_id);
      if (assignment[u] == kUnmapped || assignment[v] == kUnmapped) {
        if (!cascade) {
          for (const auto& [out, in] : mine) script.push_back(EditOp::delete_edge({source_id, out, dst.id, in}));
        }
        continue;
      }
      const auto& a_node = target.nodes[static_cast<std::size_t>(assignment[u])];
      const auto& b_node = target.nodes[static_cast<std::size_t>(assignment[v])];
      auto theirs = pair_sockets(b_node, a_node.id);
      std::vector<std::pair<std::string, std::string>> excess;
      std::set_difference(mine.begin(), mine.end(), theirs.begin(), theirs.end(), std::back_inserter(excess));
      for (const auto& [out, in] : excess) script.push_back(EditOp::delete_edge({source_id, out, dst.id, in}));
    }
  }
  for (std::size_t u = 0; u < generated.nodes.size(); ++u) {
    if (assignment[u] == kUnmapped) {
      script.push_back(EditOp::delete_node(generated.nodes[u].id, generated.nodes[u].node_spec_id));
    }
  }
  for (std::size_t a = 0; a < target.nodes.size(); ++a) {
    if (preimage[a] == kUnmapped) {
      script.push_back(EditOp::add_node(report.target_to_result.at(target.nodes[a].id), target.nodes[a].node_spec_id));
    }
  }
  for (std::size_t b = 0; b < target.nodes.size(); ++b) {
    const auto& dst = target.nodes[b];
    std::set<std::string> sources;
    for (const auto& [_, edges] : dst.incoming_edges)
      for (const auto& e : edges) sources.insert(e.source_node_id);
    for (const auto& source_id : sources) {
      auto theirs = pair_sockets(dst, source_id);
      const std::string& src_result = report.target_to_result.at(source_id);
      const std::string& dst_result = report.target_to_result.at(dst.id);
      std::vector<std::pair<std::string, std::string>> mine;
      const auto* a_node = target.find(source_id);
      const int ua = preimage[static_cast<std::size_t>(a_node - target.nodes.data())];
      if (ua != kUnmapped && preimage[b] != kUnmapped) {
        mine = pair_sockets(generated.nodes[static_cast<std::size_t>(preimage[b])],
                            generated.nodes[static_cast<std::size_t>(ua)].id);
      }
      std::vector<std::pair<std::string, std::string>> missing;
      std::set_difference(theirs.begin(), theirs.end(), mine.begin(), mine.end(), std::back_inserter(missing));
      for (const auto& [out, in] : missing) script.push_back(EditOp::add_edge({src_result, out, dst_result, in}));
    }
  }
  return report;
}

} // namespace

std::string_view to_string(EditKind kind) {
  switch (kind) {
  case EditKind::add_node: return "add_node";
  case EditKind::delete_node: return "delete_node";
  case EditKind::add_edge: return "add_edge";
  case EditKind::delete_edge: return "delete_edge";
  }
  return "?";
}

InvalidGraph::InvalidGraph(std::string which, std::vector<Violation> violations)
    : ValidationError(which + " graph is invalid" +
                      (violations.empty() ? std::string() : ": " + violations.front().message)),
      which_(std::move(which)), violations_(std::move(violations)) {}

double interaction_ratio(std::size_t count, std::size_t from_scratch) {
  if (from_scratch == 0) return count == 0 ? 0.0 : 1.0;
  return static_cast<double>(count) / static_cast<double>(from_scratch);
}

InteractionReport interactions(const SerializedGraph& generated, const SerializedGraph& target,
                               const MetricOptions& options) {
  check_structure(generated, "generated");
  check_structure(target, "target");
  if (generated.nodes.size() > options.max_nodes || target.nodes.size() > options.max_nodes) {
    throw BudgetExceeded("graphs are limited to " + std::to_string(options.max_nodes) + " nodes (generated " +
                         std::to_string(generated.nodes.size()) + ", target " + std::to_string(target.nodes.size()) +
                         ")");
  }
  Interner types;
  Interner sockets;
  const IndexedGraph g = index_graph(generated, types, sockets);
  const IndexedGraph t = index_graph(target, types, sockets);
  std::size_t type_count = 0;
  for (int type : g.type) type_count = std::max(type_count, static_cast<std::size_t>(type) + 1);
  for (int type : t.type) type_count = std::max(type_count, static_cast<std::size_t>(type) + 1);

  Search search(g, t, type_count, options);
  const auto assignment = search.run();
  return build_report(generated, target, assignment, search.best_cost(), options.cascade);
}

InteractionReport interactions(const SerializedGraph& generated, const SerializedGraph& target,
                               const Registry& registry, const MetricOptions& options) {
  if (auto v = validate(generated, registry); !v.empty()) throw InvalidGraph("generated", std::move(v));
  if (auto v = validate(target, registry); !v.empty()) throw InvalidGraph("target", std::move(v));
  return interactions(generated, target, options);
}

SerializedGraph apply_script(const SerializedGraph& graph, const std::vector<EditOp>& script) {
  SerializedGraph out = graph;
  for (std::size_t i = 0; i < script.size(); ++i) {
    const EditOp& op = script[i];
    switch (op.kind) {
    case EditKind::add_node:
      if (op.node_id.empty() || op.node_spec_id.empty()) throw ScriptError(i, "add_node needs an id and a spec id");
      if (out.find(op.node_id) != nullptr) throw ScriptError(i, "node '" + op.node_id + "' already exists");
      out.nodes.push_back({op.node_id, op.node_spec_id, {}, {}, {}});
      break;
    case EditKind::delete_node: {
      auto it = std::find_if(out.nodes.begin(), out.nodes.end(),
                             [&](const SerializedNode& n) { return n.id == op.node_id; });
      if (it == out.nodes.end()) throw ScriptError(i, "no node '" + op.node_id + "' to delete");
      out.nodes.erase(it);
      for (auto& node : out.nodes) {
        for (auto sock = node.incoming_edges.begin(); sock != node.incoming_edges.end();) {
          std::erase_if(sock->second, [&](const IncomingEdge& e) { return e.source_node_id == op.node_id; });
          sock = sock->second.empty() ? node.incoming_edges.erase(sock) : std::next(sock);
        }
      }
      break;
    }
    case EditKind::add_edge: {
      SerializedNode* dst = out.find(op.edge.target);
      if (dst == nullptr || out.find(op.edge.source) == nullptr) {
        throw ScriptError(i, "add_edge endpoints must exist (" + op.edge.source + " -> " + op.edge.target + ")");
      }
      dst->incoming_edges[op.edge.input_id].push_back({op.edge.source, op.edge.output_id});
      break;
    }
    case EditKind::delete_edge: {
      SerializedNode* dst = out.find(op.edge.target);
      if (dst == nullptr) throw ScriptError(i, "no node '" + op.edge.target + "' for delete_edge");
      auto sock = dst->incoming_edges.find(op.edge.input_id);
      auto missing = [&] {
        return ScriptError(i, "no edge " + op.edge.source + "." + op.edge.output_id + " -> " + op.edge.target + "." +
                                  op.edge.input_id);
      };
      if (sock == dst->incoming_edges.end()) throw missing();
      auto& list = sock->second;
      auto it = std::find(list.begin(), list.end(), IncomingEdge{op.edge.source, op.edge.output_id});
      if (it == list.end()) throw missing();
      list.erase(it);
      if (list.empty()) dst->incoming_edges.erase(sock);
      break;
    }
    }
  }
  return out;
}

bool isomorphic_under(const SerializedGraph& result, const SerializedGraph& target,
                      const std::map<std::string, std::string>& target_to_result) {
  if (result.nodes.size() != target.nodes.size() || target_to_result.size() != target.nodes.size()) return false;
  std::set<std::string> images;
  for (const auto& node : target.nodes) {
    auto it = target_to_result.find(node.id);
    if (it == target_to_result.end() || !images.insert(it->second).second) return false;
    const SerializedNode* mapped = result.find(it->second);
    if (mapped == nullptr || mapped->node_spec_id != node.node_spec_id) return false;
  }
  std::multiset<Edge> expected;
  for (const auto& e : edges_of(target)) {
    expected.insert({target_to_result.at(e.source), e.output_id, target_to_result.at(e.target), e.input_id});
  }
  const auto actual_list = edges_of(result);
  std::multiset<Edge> actual(actual_list.begin(), actual_list.end());
  return expected == actual;
}

std::string to_json(const InteractionReport& report, int indent) {
  using detail::ordered_json;
  ordered_json doc;
  doc["count"] = report.count;
  doc["fromScratch"] = report.from_scratch;
  doc["ratio"] = report.ratio;
  ordered_json script = ordered_json::array();
  for (const auto& op : report.script) {
    ordered_json entry;
    entry["op"] = std::string(to_string(op.kind));
    if (op.kind == EditKind::add_node || op.kind == EditKind::delete_node) {
      entry["nodeId"] = op.node_id;
      entry["nodeSpecId"] = op.node_spec_id;
    } else {
      entry["sourceNodeId"] = op.edge.source;
      entry["outputId"] = op.edge.output_id;
      entry["targetNodeId"] = op.edge.target;
      entry["inputId"] = op.edge.input_id;
    }
    script.push_back(std::move(entry));
  }
  doc["script"] = std::move(script);
  ordered_json mapping = ordered_json::array();
  for (const auto& [g, t] : report.mapping) mapping.push_back({{"generated", g}, {"target", t}});
  doc["mapping"] = std::move(mapping);
  return doc.dump(indent) + (indent >= 0 ? "\n" : "");
}

} // namespace pipeforge
