#pragma once

#include <chrono>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/error.hpp"
#include "pipeforge/graph.hpp"
#include "pipeforge/interpreter.hpp"
#include "pipeforge/llm_backend.hpp"
#include "pipeforge/prompts.hpp"
#include "pipeforge/registry.hpp"
#include "pipeforge/tag.hpp"

namespace pipeforge {

struct GenerateOptions {
  std::chrono::milliseconds stage_timeout{60'000};
  double temperature = 0;
  // Writer falls back to the tag's affinity nodes when the selector yields
  // nothing usable.
  bool selector_fallback = true;
  InterpretOptions interpret;
};

struct StageTimings {
  std::chrono::milliseconds selector{0};
  std::chrono::milliseconds writer{0};
  std::chrono::milliseconds compile{0};
};

struct GenerationResult {
  std::string instruction;
  PipelineTag tag = PipelineTag::language;
  std::vector<std::string> selected_nodes; // what the writer prompt used
  std::vector<std::string> discarded;      // selector items that were not node ids
  bool fallback_used = false;
  std::string selector_output;
  std::string pseudocode;
  CompileReport report;
  SerializedGraph graph; // optimize_layout(report.graph)
  StageTimings timings;
};

/// A generation stage failed. stage() is "selector" or "writer".
class StageError : public Error {
public:
  enum class Kind { failure, timeout, empty };
  StageError(std::string stage, Kind kind, const std::string& message)
      : Error(stage + " stage: " + message), stage_(std::move(stage)), kind_(kind) {}
  const std::string& stage() const { return stage_; }
  Kind kind() const { return kind_; }

private:
  std::string stage_;
  Kind kind_;
};

/// Pseudocode part of a writer reply: the first fenced block when there is
/// one, else the whole reply, trimmed.
std::string extract_pseudocode(std::string_view reply);

/// Selector prompt, backend, selector parse, writer prompt, backend, compile,
/// layout. Backend errors become StageError naming the stage; a stage that
/// returns after its timeout counts as timed out. Empty selections throw
/// "selector produced no nodes" unless the fallback is enabled; an empty
/// writer reply throws "no pseudocode produced".
GenerationResult generate(std::string_view instruction, PipelineTag tag, LlmBackend& backend, const Registry& registry,
                          const FewShotLibrary& fewshot, const GenerateOptions& options = {});

/// {instruction, tag, selectedNodes, discardedSelections, fallbackUsed,
/// pseudocode, droppedLines, danglingArgs, diagnostics, graph}. Timings are
/// left out unless asked for, so replayed runs serialize identically.
std::string to_json(const GenerationResult& result, int indent = 2, bool include_timings = false);

} // namespace pipeforge
