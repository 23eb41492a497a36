#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pipeforge/dsl.hpp"
#include "pipeforge/graph.hpp"
#include "pipeforge/registry.hpp"

namespace testing_support {

namespace pf = pipeforge;

inline const std::filesystem::path kDataDir = PIPEFORGE_TEST_DATA_DIR;
inline const std::filesystem::path kFixturesDir = PIPEFORGE_TEST_FIXTURES_DIR;

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline const pf::Registry& registry() {
  static const pf::Registry reg = pf::Registry::load(kDataDir / "registry.json");
  return reg;
}

inline std::string pipeline_source(const std::string& name) {
  return read_file(kFixturesDir / "pipelines" / (name + ".ipc"));
}

inline pf::SerializedGraph golden(const std::string& name) {
  return pf::from_json(read_file(kFixturesDir / "golden" / (name + ".json")));
}

inline std::vector<std::string> pipeline_names() {
  std::vector<std::string> names;
  for (const auto& entry : std::filesystem::directory_iterator(kFixturesDir / "pipelines")) {
    if (entry.path().extension() == ".ipc") names.push_back(entry.path().stem().string());
  }
  std::sort(names.begin(), names.end());
  return names;
}

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

inline bool coin(Rng& rng, double p) { return std::bernoulli_distribution(p)(rng); }

inline std::string random_identifier(Rng& rng) {
  static const std::string first = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_";
  static const std::string rest = first + "0123456789";
  std::string id(1, first[pick(rng, first.size())]);
  const std::size_t len = pick(rng, 10);
  for (std::size_t i = 0; i < len; ++i) id += rest[pick(rng, rest.size())];
  return id;
}

// Printable text plus the characters the printer has to escape.
inline std::string random_literal(Rng& rng) {
  static const std::vector<std::string> pieces = {"a", "Z", "7", " ", "\"", "\\", ",", "(", ")", "=", ":",
                                                  "//", "\t", "é", "日本", "{{text1}}", "😀", "'"};
  std::string out;
  const std::size_t len = pick(rng, 12);
  for (std::size_t i = 0; i < len; ++i) out += pieces[pick(rng, pieces.size())];
  return out;
}

/// Structurally valid program: ids are type_N, argument names are unique.
inline pf::dsl::PseudoProgram random_program(Rng& rng, std::size_t max_statements = 12) {
  pf::dsl::PseudoProgram program;
  const std::size_t n = pick(rng, max_statements + 1);
  std::vector<std::string> declared;
  for (std::size_t i = 0; i < n; ++i) {
    pf::dsl::Statement s;
    s.node_type = random_identifier(rng);
    s.node_id = s.node_type + "_" + std::to_string(1 + pick(rng, 1000));
    if (coin(rng, 0.6)) s.output_var = random_identifier(rng);
    const std::size_t args = pick(rng, 5);
    for (std::size_t a = 0; a < args; ++a) {
      std::string name = random_identifier(rng);
      bool taken = std::any_of(s.args.begin(), s.args.end(), [&](const auto& x) { return x.name == name; });
      if (taken) continue;
      if (coin(rng, 0.5) && !declared.empty()) {
        s.args.push_back({name, pf::dsl::VarRef{declared[pick(rng, declared.size())]}});
      } else if (coin(rng, 0.5)) {
        s.args.push_back({name, pf::dsl::VarRef{random_identifier(rng)}});
      } else {
        s.args.push_back({name, pf::dsl::StringLiteral{random_literal(rng)}});
      }
    }
    declared.push_back(s.declared_name());
    program.statements.push_back(std::move(s));
  }
  if (coin(rng, 0.6)) {
    std::size_t at = 0;
    const std::size_t sections = 1 + pick(rng, 3);
    for (std::size_t k = 0; k < sections; ++k) {
      at = std::min(n, at + pick(rng, 4));
      program.sections.push_back({random_identifier(rng), k == 0 ? 0 : at});
    }
  }
  return program;
}

/// Random DAG whose insertion order is a random permutation of a
/// topological order, so edges may point to earlier-inserted nodes.
inline pf::SerializedGraph random_dag(Rng& rng, std::size_t max_nodes = 20) {
  const std::size_t n = 1 + pick(rng, max_nodes);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  pf::SerializedGraph g;
  g.nodes.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.nodes[i].id = "n_" + std::to_string(i + 1);
    g.nodes[i].node_spec_id = "image_processor";
    g.nodes[i].position = {static_cast<double>(pick(rng, 5)), static_cast<double>(pick(rng, 5))};
  }
  // order[k] is the insertion slot of the k-th node in topological order.
  for (std::size_t k = 1; k < n; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      if (coin(rng, 0.25)) {
        auto& node = g.nodes[order[k]];
        node.incoming_edges["in" + std::to_string(pick(rng, 2))].push_back({g.nodes[order[j]].id, "out"});
      }
    }
  }
  return g;
}

/// Valid graph against the registry, drawn from a few specs so that many
/// same-type nodes compete in the matching.
inline pf::SerializedGraph random_valid_graph(Rng& rng, std::size_t max_nodes = 6) {
  static const std::vector<std::string> specs = {"input_text", "input_image", "text_processor",
                                                 "image_mixer", "palm_textgen", "image_viewer"};
  const auto& reg = registry();
  const std::size_t n = pick(rng, max_nodes + 1);
  pf::SerializedGraph g;
  std::map<std::string, int> counters;
  for (std::size_t i = 0; i < n; ++i) {
    pf::SerializedNode node;
    node.node_spec_id = specs[pick(rng, specs.size())];
    node.id = node.node_spec_id + "_" + std::to_string(++counters[node.node_spec_id]);
    const pf::NodeSpec& spec = *reg.find(node.node_spec_id);
    for (const auto& input : spec.input_specs) {
      const std::size_t tries = pick(rng, 3);
      for (std::size_t t = 0; t < tries; ++t) {
        if (g.nodes.empty()) break;
        const auto& source = g.nodes[pick(rng, g.nodes.size())];
        const pf::NodeSpec& src = *reg.find(source.node_spec_id);
        for (const auto& out : src.output_specs) {
          if (input.accepts_any_of(out.data_types)) {
            node.incoming_edges[input.id].push_back({source.id, out.id});
            break;
          }
        }
      }
    }
    g.nodes.push_back(std::move(node));
  }
  // Shuffle insertion order; edges keep pointing at node ids.
  std::shuffle(g.nodes.begin(), g.nodes.end(), rng);
  return g;
}

} // namespace testing_support
