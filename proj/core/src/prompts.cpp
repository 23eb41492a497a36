#include "pipeforge/prompts.hpp"

#include <algorithm>
#include <set>

#include "json_support.hpp"
#include "pipeforge/error.hpp"

namespace pipeforge {

namespace {

using detail::json;
using detail::ordered_json;

constexpr std::string_view kSelectorIntro =
    "You are the node selector of a visual programming assistant that builds machine learning pipelines.\n"
    "Given a user instruction and a pipeline tag, choose every node needed to build the pipeline.\n"
    "\n"
    "Guidelines:\n"
    "- Only choose nodes from the list below.\n"
    "- A pipeline needs at least one input node and at least one output node.\n"
    "- Recommended nodes are usually used together with the node that recommends them.\n"
    "- Answer with a comma-separated list of node types and nothing else.\n";

constexpr std::string_view kWriterIntro =
    "You are the code writer of a visual programming assistant that builds machine learning pipelines.\n"
    "Write pseudocode that connects the given nodes into a pipeline fulfilling the user instruction.\n"
    "\n"
    "Guidelines:\n"
    "- Write one statement per node: <output_var> = <node_id>: <node_type>(<input>=<variable>, ...).\n"
    "- A node id is the node type followed by _1, _2, ... and the output variable is the node id plus _out.\n"
    "- Input nodes have no output variable; later statements refer to them by node id.\n"
    "- Output nodes produce nothing; write <node_id>: <node_type>(<input>=<variable>).\n"
    "- Arguments name input sockets and pass variables defined by earlier statements.\n"
    "- input_text is the only node that takes a literal: text=\"...\". Leave other parameters to the user.\n"
    "- Put statements under the headers input:, processor: and output:.\n";

constexpr std::string_view kWordChars = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_";

std::string_view trim(std::string_view s, std::string_view chars) {
  const auto first = s.find_first_not_of(chars);
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(chars);
  return s.substr(first, last - first + 1);
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i > 0) out += sep;
    out += items[i];
  }
  return out;
}

bool only_types(const NodeSpec& spec, std::initializer_list<DataType> allowed) {
  auto ok = [&](const std::vector<SocketSpec>& sockets) {
    return std::all_of(sockets.begin(), sockets.end(), [&](const SocketSpec& s) {
      return std::all_of(s.data_types.begin(), s.data_types.end(), [&](DataType t) {
        return std::find(allowed.begin(), allowed.end(), t) != allowed.end();
      });
    });
  };
  return ok(spec.input_specs) && ok(spec.output_specs);
}

PipelineTag tag_key(const std::string& name, const std::string& path) {
  auto tag = parse_tag(name);
  if (!tag) throw ValidationError(path + ": unknown pipeline tag '" + name + "'");
  return *tag;
}

} // namespace

FewShotLibrary FewShotLibrary::load(const std::filesystem::path& path) {
  return from_json(detail::read_text_file(path));
}

FewShotLibrary FewShotLibrary::from_json(std::string_view text) {
  const json doc = detail::parse_json(text, "few-shot library");
  FewShotLibrary lib;
  const json& selector = detail::require(doc, "selector", "$");
  for (const auto& [name, list] : selector.items()) {
    const std::string path = "$.selector." + name;
    auto& examples = lib.selector_[tag_key(name, path)];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string here = path + "[" + std::to_string(i) + "]";
      SelectorExample ex{detail::require_string(list[i], "id", here), detail::require_string(list[i], "instruction", here),
                         {}};
      for (const auto& node : detail::require(list[i], "nodes", here)) ex.nodes.push_back(node.get<std::string>());
      examples.push_back(std::move(ex));
    }
  }
  const json& writer = detail::require(doc, "writer", "$");
  for (const auto& [name, list] : writer.items()) {
    const std::string path = "$.writer." + name;
    auto& examples = lib.writer_[tag_key(name, path)];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string here = path + "[" + std::to_string(i) + "]";
      examples.push_back({detail::require_string(list[i], "id", here),
                          detail::require_string(list[i], "instruction", here),
                          detail::require_string(list[i], "pseudocode", here)});
    }
  }
  return lib;
}

const std::vector<SelectorExample>& FewShotLibrary::selector(PipelineTag tag) const {
  static const std::vector<SelectorExample> none;
  auto it = selector_.find(tag);
  return it == selector_.end() ? none : it->second;
}

const std::vector<WriterExample>& FewShotLibrary::writer(PipelineTag tag) const {
  static const std::vector<WriterExample> none;
  auto it = writer_.find(tag);
  return it == writer_.end() ? none : it->second;
}

std::string selector_node_line(const NodeSpec& spec) {
  std::string line = spec.node_spec_id + ": " + spec.short_description;
  if (!spec.recommended_nodes.empty()) {
    line += "; usually selected with " + join(spec.recommended_nodes, ", ");
  }
  line += '.';
  return line;
}

PromptBundle build_selector_prompt(std::string_view instruction, PipelineTag tag, const Registry& registry,
                                   const FewShotLibrary& fewshot) {
  PromptBundle bundle;
  bundle.stage = PromptStage::selector;
  bundle.tag = tag;
  std::string& text = bundle.text;
  text += kSelectorIntro;
  for (auto [category, heading] : {std::pair{Category::input, "Input nodes:"}, std::pair{Category::output, "Output nodes:"},
                                   std::pair{Category::processor, "Processor nodes:"}}) {
    text += '\n';
    text += heading;
    text += '\n';
    for (const auto& spec : registry.specs()) {
      if (spec.category != category) continue;
      text += selector_node_line(spec);
      text += '\n';
    }
  }
  text += "\nPipeline tag: ";
  text += to_string(tag);
  text += "\n\nExamples:\n";
  for (const auto& ex : fewshot.selector(tag)) {
    text += "Q: " + ex.instruction + "\nA: " + join(ex.nodes, ", ") + "\n\n";
    bundle.fewshot_ids.push_back(ex.id);
  }
  text += "Q: ";
  text += instruction;
  text += "\nA:";
  return bundle;
}

SelectorParse parse_selector_output(std::string_view raw, const Registry& registry) {
  SelectorParse out;
  std::set<std::string> seen;
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto end = raw.find_first_of(",;\n", start);
    if (end == std::string_view::npos) end = raw.size();
    std::string_view item = trim(raw.substr(start, end - start), " \t\r");
    start = end + 1;
    if (item.empty()) continue;
    const std::string original(item);
    // List markers: "-", "*", "1." or "1)".
    if (item.front() == '-' || item.front() == '*') {
      item = trim(item.substr(1), " \t");
    } else if (auto digits = item.find_first_not_of("0123456789");
               digits != 0 && digits != std::string_view::npos && (item[digits] == '.' || item[digits] == ')')) {
      item = trim(item.substr(digits + 1), " \t");
    }
    if (auto colon = item.rfind(':'); colon != std::string_view::npos) {
      item = item.substr(colon + 1);
    }
    item = trim(item, " \t[](){}\"'`.");
    std::vector<std::string> ids;
    if (registry.contains(item)) {
      ids.emplace_back(item);
    } else {
      // Prose such as "pali (for the caption)": keep node ids among its words.
      std::size_t i = 0;
      while (i < item.size()) {
        const auto begin = item.find_first_of(kWordChars, i);
        if (begin == std::string_view::npos) break;
        auto stop = item.find_first_not_of(kWordChars, begin);
        if (stop == std::string_view::npos) stop = item.size();
        const std::string word(item.substr(begin, stop - begin));
        if (registry.contains(word)) ids.push_back(word);
        i = stop;
      }
    }
    if (ids.empty()) out.discarded.push_back(original);
    for (auto& id : ids) {
      if (seen.insert(id).second) out.nodes.push_back(std::move(id));
    }
  }
  return out;
}

std::vector<std::string> tag_affinity_nodes(const Registry& registry, PipelineTag tag) {
  std::vector<std::string> out;
  for (const auto& spec : registry.specs()) {
    bool keep = true;
    if (tag == PipelineTag::language) {
      keep = only_types(spec, {DataType::text, DataType::url, DataType::html, DataType::string_list});
    } else if (tag == PipelineTag::visual) {
      keep = only_types(spec, {DataType::image, DataType::masks, DataType::landmarks, DataType::tensor});
    }
    if (keep) out.push_back(spec.node_spec_id);
  }
  return out;
}

std::string writer_node_config(const NodeSpec& spec) {
  auto sockets = [](const std::vector<SocketSpec>& list) {
    ordered_json out = ordered_json::array();
    for (const auto& s : list) {
      ordered_json types = ordered_json::array();
      for (auto t : s.data_types) types.push_back(std::string(to_string(t)));
      out.push_back({{"id", s.id}, {"dataTypes", std::move(types)}});
    }
    return out;
  };
  ordered_json config;
  config["nodeSpecId"] = spec.node_spec_id;
  config["description"] = spec.description;
  config["category"] = std::string(to_string(spec.category));
  if (!spec.input_specs.empty()) config["inputSpecs"] = sockets(spec.input_specs);
  if (!spec.output_specs.empty()) config["outputSpecs"] = sockets(spec.output_specs);
  if (!spec.recommended_nodes.empty()) config["recommendedNodes"] = spec.recommended_nodes;
  config["examples"] = spec.examples;
  return config.dump(2);
}

PromptBundle build_writer_prompt(std::string_view instruction, PipelineTag tag,
                                 const std::vector<std::string>& selected, const Registry& registry,
                                 const FewShotLibrary& fewshot) {
  PromptBundle bundle;
  bundle.stage = PromptStage::writer;
  bundle.tag = tag;
  bundle.selected_nodes = selected;
  if (bundle.selected_nodes.empty()) {
    bundle.selected_nodes = tag_affinity_nodes(registry, tag);
    bundle.fallback_used = true;
  }
  std::set<std::string> chosen;
  for (const auto& id : bundle.selected_nodes) {
    if (!registry.contains(id)) throw ValidationError("selected node '" + id + "' is not in the node library");
    chosen.insert(id);
  }
  // Configurations follow registry order so that only the allow-list
  // sentence depends on the order of the selection.
  std::vector<const NodeSpec*> specs;
  for (const auto& spec : registry.specs()) {
    if (chosen.contains(spec.node_spec_id)) specs.push_back(&spec);
  }

  std::string& text = bundle.text;
  text += kWriterIntro;
  text += "\nNode configurations:\n";
  for (const NodeSpec* spec : specs) {
    text += writer_node_config(*spec);
    text += '\n';
  }
  text += "\nThe following is a full list of nodes you may use: " + join(bundle.selected_nodes, ", ") +
          ". Do not use any other node.\n";
  text += "\nPipeline tag: ";
  text += to_string(tag);
  text += "\n\nExamples:\n";
  for (const auto& ex : fewshot.writer(tag)) {
    text += "Q: " + ex.instruction + "\nA:\n" + ex.pseudocode;
    if (!ex.pseudocode.empty() && ex.pseudocode.back() != '\n') text += '\n';
    text += '\n';
    bundle.fewshot_ids.push_back(ex.id);
  }
  text += "Q: ";
  text += instruction;
  text += "\nA:";
  return bundle;
}

} // namespace pipeforge
