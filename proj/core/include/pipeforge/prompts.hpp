#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/registry.hpp"
#include "pipeforge/tag.hpp"

namespace pipeforge {

struct SelectorExample {
  std::string id;
  std::string instruction;
  std::vector<std::string> nodes;
};

struct WriterExample {
  std::string id;
  std::string instruction;
  std::string pseudocode;
};

/// Per-tag few-shot Q&A pairs for both stages, loaded from a JSON data file:
/// {"version": 1, "selector": {tag: [{id, instruction, nodes}]},
///  "writer": {tag: [{id, instruction, pseudocode}]}}.
class FewShotLibrary {
public:
  static FewShotLibrary load(const std::filesystem::path& path);
  static FewShotLibrary from_json(std::string_view text);

  const std::vector<SelectorExample>& selector(PipelineTag tag) const;
  const std::vector<WriterExample>& writer(PipelineTag tag) const;

private:
  std::map<PipelineTag, std::vector<SelectorExample>> selector_;
  std::map<PipelineTag, std::vector<WriterExample>> writer_;
};

enum class PromptStage { selector, writer };

constexpr std::string_view to_string(PromptStage stage) {
  return stage == PromptStage::selector ? "selector" : "writer";
}

struct PromptBundle {
  PromptStage stage = PromptStage::selector;
  std::string text;
  PipelineTag tag = PipelineTag::language;
  std::vector<std::string> selected_nodes; // writer stage only
  std::vector<std::string> fewshot_ids;
  bool fallback_used = false; // writer stage: selection was empty
};

/// "{type}: {short description}; usually selected with {a, b}." with the
/// recommendation clause left out when there is none.
std::string selector_node_line(const NodeSpec& spec);

/// Task description and guidelines, one line per node grouped by category,
/// the tag, the tag's Q&A examples, and the instruction last.
PromptBundle build_selector_prompt(std::string_view instruction, PipelineTag tag, const Registry& registry,
                                   const FewShotLibrary& fewshot);

struct SelectorParse {
  std::vector<std::string> nodes;     // known ids, first occurrence order
  std::vector<std::string> discarded; // items that were not node ids
};

/// Splits on commas, semicolons and newlines, strips list markers, "label:"
/// prefixes, brackets and quotes, and keeps exact registry ids. An item that
/// is not an id itself contributes the ids among its words.
SelectorParse parse_selector_output(std::string_view raw, const Registry& registry);

/// Nodes a writer prompt falls back to when the selection is empty: nodes
/// whose sockets only carry text-like types for "language", image-like
/// types for "visual", and every node for "multimodal".
std::vector<std::string> tag_affinity_nodes(const Registry& registry, PipelineTag tag);

/// JSON configuration of one node as embedded in writer prompts.
std::string writer_node_config(const NodeSpec& spec);

/// Intro and guidelines, the configuration of every selected node (in
/// registry order), the allow-list sentence (in selection order), the tag's
/// pseudocode examples, and the instruction last. Throws ValidationError for
/// ids missing from the registry.
PromptBundle build_writer_prompt(std::string_view instruction, PipelineTag tag,
                                 const std::vector<std::string>& selected, const Registry& registry,
                                 const FewShotLibrary& fewshot);

} // namespace pipeforge
