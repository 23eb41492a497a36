#include "pipeforge/orchestrator.hpp"

#include "json_support.hpp"
#include "pipeforge/layout.hpp"

namespace pipeforge {

namespace {

using Clock = std::chrono::steady_clock;

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::chrono::milliseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
}

std::string call_stage(LlmBackend& backend, const PromptBundle& bundle, const GenerateOptions& options,
                       std::chrono::milliseconds& elapsed) {
  const std::string stage(to_string(bundle.stage));
  const auto start = Clock::now();
  std::string reply;
  try {
    reply = backend.complete({bundle.text, options.temperature, options.stage_timeout, bundle.stage});
  } catch (const BackendTimeout& e) {
    throw StageError(stage, StageError::Kind::timeout, e.what());
  } catch (const BackendError& e) {
    throw StageError(stage, StageError::Kind::failure, e.what());
  }
  elapsed = since(start);
  if (elapsed > options.stage_timeout) {
    throw StageError(stage, StageError::Kind::timeout,
                     "exceeded " + std::to_string(options.stage_timeout.count()) + " ms");
  }
  return reply;
}

} // namespace

std::string extract_pseudocode(std::string_view reply) {
  const auto open = reply.find("```");
  if (open != std::string_view::npos) {
    auto body = reply.find('\n', open);
    if (body != std::string_view::npos) {
      ++body;
      const auto close = reply.find("```", body);
      return std::string(trim(reply.substr(body, close == std::string_view::npos ? close : close - body)));
    }
  }
  return std::string(trim(reply));
}

GenerationResult generate(std::string_view instruction, PipelineTag tag, LlmBackend& backend, const Registry& registry,
                          const FewShotLibrary& fewshot, const GenerateOptions& options) {
  GenerationResult result;
  result.instruction = std::string(instruction);
  result.tag = tag;

  const PromptBundle selector = build_selector_prompt(instruction, tag, registry, fewshot);
  result.selector_output = call_stage(backend, selector, options, result.timings.selector);
  SelectorParse picked = parse_selector_output(result.selector_output, registry);
  result.discarded = std::move(picked.discarded);
  if (picked.nodes.empty() && !options.selector_fallback) {
    throw StageError("selector", StageError::Kind::empty, "selector produced no nodes");
  }

  const PromptBundle writer = build_writer_prompt(instruction, tag, picked.nodes, registry, fewshot);
  result.selected_nodes = writer.selected_nodes;
  result.fallback_used = writer.fallback_used;
  const std::string reply = call_stage(backend, writer, options, result.timings.writer);
  result.pseudocode = extract_pseudocode(reply);
  if (result.pseudocode.empty()) throw StageError("writer", StageError::Kind::empty, "no pseudocode produced");

  const auto start = Clock::now();
  result.report = compile(result.pseudocode, registry, options.interpret);
  result.graph = optimize_layout(result.report.graph);
  result.timings.compile = since(start);
  return result;
}

std::string to_json(const GenerationResult& result, int indent, bool include_timings) {
  const auto report = detail::report_to_value(result.report);
  detail::ordered_json doc;
  doc["instruction"] = result.instruction;
  doc["tag"] = std::string(to_string(result.tag));
  doc["selectedNodes"] = result.selected_nodes;
  doc["discardedSelections"] = result.discarded;
  doc["fallbackUsed"] = result.fallback_used;
  doc["pseudocode"] = result.pseudocode;
  doc["droppedLines"] = report["droppedLines"];
  doc["danglingArgs"] = report["danglingArgs"];
  doc["diagnostics"] = report["diagnostics"];
  doc["graph"] = detail::graph_to_value(result.graph);
  if (include_timings) {
    doc["timings"] = {{"selectorMs", result.timings.selector.count()},
                      {"writerMs", result.timings.writer.count()},
                      {"compileMs", result.timings.compile.count()}};
  }
  return doc.dump(indent) + (indent >= 0 ? "\n" : "");
}

} // namespace pipeforge
