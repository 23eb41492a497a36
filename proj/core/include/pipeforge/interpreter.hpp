#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/dsl.hpp"
#include "pipeforge/graph.hpp"
#include "pipeforge/registry.hpp"

namespace pipeforge {

struct DroppedLine {
  std::size_t line = 0;
  std::string reason;
  friend bool operator==(const DroppedLine&, const DroppedLine&) = default;
};

struct DanglingArg {
  std::string node_id;
  std::string arg;
  friend bool operator==(const DanglingArg&, const DanglingArg&) = default;
};

struct CompileReport {
  SerializedGraph graph;
  std::vector<DroppedLine> dropped_lines;
  std::vector<DanglingArg> dangling_args;
  std::vector<std::string> diagnostics;
  friend bool operator==(const CompileReport&, const CompileReport&) = default;
};

struct InterpretOptions {
  // Drop a whole statement when one of its variables is undefined, instead
  // of keeping the node without that edge. Dependents then cascade.
  bool cascade_dangling = false;
};

/// Builds the graph statement by statement. Never fails: unknown node types
/// and duplicate node ids drop the line, undefined variables drop the single
/// edge, and everything is reported. Nodes carry default parameters merged
/// with literal arguments, and an unoptimized staircase position.
CompileReport interpret(const dsl::PseudoProgram& program, const Registry& registry,
                        const InterpretOptions& options = {});

/// parse + interpret. Parse diagnostics are folded into report.diagnostics
/// as "line N: ...". Throws ParseError only on blank source.
CompileReport compile(std::string_view source, const Registry& registry, const InterpretOptions& options = {});

/// JSON object {graph, droppedLines, danglingArgs, diagnostics}.
std::string to_json(const CompileReport& report, int indent = 2);

} // namespace pipeforge
