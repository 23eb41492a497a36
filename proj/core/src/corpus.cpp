#include "pipeforge/corpus.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "json_support.hpp"

namespace pipeforge {

namespace {

using detail::json;
using detail::ordered_json;

std::string format(const char* fmt, double a, double b = 0) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, a, b);
  return buf;
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n\r") == std::string::npos) return text;
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

ordered_json aggregate_value(const Aggregate& a) {
  return {{"n", a.n}, {"mean", a.mean}, {"std", a.stddev}};
}

} // namespace

std::vector<CorpusEntry> corpus_from_json(std::string_view text) {
  const json doc = detail::parse_json(text, "corpus");
  if (!doc.is_array()) throw ValidationError("$: corpus must be a JSON list");
  std::vector<CorpusEntry> entries;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const std::string path = "$[" + std::to_string(i) + "]";
    CorpusEntry entry;
    entry.instruction = detail::require_string(doc[i], "instruction", path);
    const std::string tag = detail::require_string(doc[i], "tag", path);
    auto parsed = parse_tag(tag);
    if (!parsed) throw ValidationError(path + ".tag: unknown pipeline tag '" + tag + "'");
    entry.tag = *parsed;
    const json& target = detail::require(doc[i], "target", path);
    if (target.is_array()) {
      if (target.empty()) throw ValidationError(path + ".target: list of targets is empty");
      for (std::size_t t = 0; t < target.size(); ++t) {
        entry.targets.push_back(detail::graph_from_value(target[t], path + ".target[" + std::to_string(t) + "]"));
      }
    } else {
      entry.targets.push_back(detail::graph_from_value(target, path + ".target"));
    }
    entry.generated = detail::graph_from_value(detail::require(doc[i], "generated", path), path + ".generated");
    entries.push_back(std::move(entry));
  }
  return entries;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
  return corpus_from_json(detail::read_text_file(path));
}

std::string corpus_to_json(const std::vector<CorpusEntry>& entries, int indent) {
  ordered_json doc = ordered_json::array();
  for (const auto& entry : entries) {
    ordered_json item;
    item["instruction"] = entry.instruction;
    item["tag"] = std::string(to_string(entry.tag));
    if (entry.targets.size() == 1) {
      item["target"] = detail::graph_to_value(entry.targets.front());
    } else {
      item["target"] = ordered_json::array();
      for (const auto& t : entry.targets) item["target"].push_back(detail::graph_to_value(t));
    }
    item["generated"] = detail::graph_to_value(entry.generated);
    doc.push_back(std::move(item));
  }
  return doc.dump(indent) + (indent >= 0 ? "\n" : "");
}

Aggregate aggregate(const std::vector<double>& ratios) {
  Aggregate a;
  a.n = ratios.size();
  if (a.n == 0) return a;
  double sum = 0;
  for (double r : ratios) sum += r;
  a.mean = sum / static_cast<double>(a.n);
  double squares = 0;
  for (double r : ratios) squares += (r - a.mean) * (r - a.mean);
  a.stddev = std::sqrt(squares / static_cast<double>(a.n));
  return a;
}

CorpusReport evaluate_corpus(const std::vector<CorpusEntry>& entries, const MetricOptions& options,
                             const Registry* registry) {
  CorpusReport report;
  std::map<PipelineTag, std::vector<double>> by_tag;
  std::vector<double> all;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& entry = entries[i];
    PairResult best;
    best.count = std::numeric_limits<std::size_t>::max();
    for (std::size_t t = 0; t < entry.targets.size(); ++t) {
      const InteractionReport r = registry != nullptr ? interactions(entry.generated, entry.targets[t], *registry, options)
                                                      : interactions(entry.generated, entry.targets[t], options);
      if (r.count < best.count) {
        best.target_index = t;
        best.count = r.count;
        best.from_scratch = r.from_scratch;
        best.ratio = r.ratio;
      }
    }
    best.index = i;
    best.instruction = entry.instruction;
    best.tag = entry.tag;
    by_tag[entry.tag].push_back(best.ratio);
    all.push_back(best.ratio);
    report.pairs.push_back(std::move(best));
  }
  for (auto tag : kAllTags) report.per_tag[tag] = aggregate(by_tag[tag]);
  report.overall = aggregate(all);
  return report;
}

std::string to_csv(const CorpusReport& report) {
  std::string out = "index,tag,instruction,count,from_scratch,ratio\n";
  for (const auto& p : report.pairs) {
    out += std::to_string(p.index) + ',' + std::string(to_string(p.tag)) + ',' + csv_field(p.instruction) + ',' +
           std::to_string(p.count) + ',' + std::to_string(p.from_scratch) + ',' + format("%.4f", p.ratio) + '\n';
  }
  return out;
}

std::string to_table(const CorpusReport& report) {
  auto cell = [](const Aggregate& a) {
    return a.n == 0 ? std::string("n/a") : format("%.1f%% ± %.1f%%", a.mean * 100, a.stddev * 100);
  };
  std::string header = "Overall | Language | Visual | Multimodal\n";
  std::string row = cell(report.overall);
  for (auto tag : kAllTags) row += " | " + cell(report.per_tag.at(tag));
  return header + row + "\n";
}

std::string to_json(const CorpusReport& report, int indent) {
  ordered_json doc;
  doc["pairs"] = ordered_json::array();
  for (const auto& p : report.pairs) {
    doc["pairs"].push_back({{"index", p.index},
                            {"tag", std::string(to_string(p.tag))},
                            {"instruction", p.instruction},
                            {"targetIndex", p.target_index},
                            {"count", p.count},
                            {"fromScratch", p.from_scratch},
                            {"ratio", p.ratio}});
  }
  doc["perTag"] = ordered_json::object();
  for (const auto& [tag, a] : report.per_tag) doc["perTag"][std::string(to_string(tag))] = aggregate_value(a);
  doc["overall"] = aggregate_value(report.overall);
  return doc.dump(indent) + (indent >= 0 ? "\n" : "");
}

} // namespace pipeforge
