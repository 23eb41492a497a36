#pragma once

// Corpus evaluation: interaction counts for many (generated, target) pairs
// and per-tag aggregates in the shape of a mean ± std table.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "pipeforge/graph.hpp"
#include "pipeforge/metric.hpp"
#include "pipeforge/registry.hpp"
#include "pipeforge/tag.hpp"

namespace pipeforge {

struct CorpusEntry {
  std::string instruction;
  PipelineTag tag = PipelineTag::language;
  std::vector<SerializedGraph> targets; // any of these is acceptable
  SerializedGraph generated;
};

/// JSON list of {instruction, tag, target, generated}; target may be one
/// pipeline or a list of acceptable pipelines.
std::vector<CorpusEntry> corpus_from_json(std::string_view text);
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);
std::string corpus_to_json(const std::vector<CorpusEntry>& entries, int indent = 2);

struct PairResult {
  std::size_t index = 0;
  std::string instruction;
  PipelineTag tag = PipelineTag::language;
  std::size_t target_index = 0; // target with the lowest count
  std::size_t count = 0;
  std::size_t from_scratch = 0;
  double ratio = 0;
};

/// Population mean and standard deviation of the ratios.
struct Aggregate {
  std::size_t n = 0;
  double mean = 0;
  double stddev = 0;
};

struct CorpusReport {
  std::vector<PairResult> pairs;
  std::map<PipelineTag, Aggregate> per_tag;
  Aggregate overall;
};

Aggregate aggregate(const std::vector<double>& ratios);

/// Scores every entry against its best target. With a registry, both graphs
/// are validated first (InvalidGraph).
CorpusReport evaluate_corpus(const std::vector<CorpusEntry>& entries, const MetricOptions& options = {},
                             const Registry* registry = nullptr);

/// index,tag,instruction,count,from_scratch,ratio
std::string to_csv(const CorpusReport& report);

/// Two-line table "Overall | Language | Visual | Multimodal" with cells
/// "mean% ± std%".
std::string to_table(const CorpusReport& report);

std::string to_json(const CorpusReport& report, int indent = 2);

} // namespace pipeforge
