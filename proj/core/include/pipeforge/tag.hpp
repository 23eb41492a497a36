#pragma once

#include <optional>
#include <string_view>

namespace pipeforge {

/// Category the user picks alongside the instruction; it selects few-shot
/// examples.
enum class PipelineTag { language, visual, multimodal };

inline constexpr PipelineTag kAllTags[] = {PipelineTag::language, PipelineTag::visual, PipelineTag::multimodal};

constexpr std::string_view to_string(PipelineTag tag) {
  switch (tag) {
  case PipelineTag::language: return "language";
  case PipelineTag::visual: return "visual";
  case PipelineTag::multimodal: return "multimodal";
  }
  return "?";
}

constexpr std::optional<PipelineTag> parse_tag(std::string_view text) {
  for (auto tag : kAllTags) {
    if (to_string(tag) == text) return tag;
  }
  return std::nullopt;
}

} // namespace pipeforge
