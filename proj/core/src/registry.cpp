#include "pipeforge/registry.hpp"

#include <algorithm>
#include <array>
#include <regex>
#include <set>

#include "json_support.hpp"
#include "pipeforge/error.hpp"

namespace pipeforge {

namespace {

using detail::json;
using detail::ordered_json;

constexpr std::array<std::pair<Category, std::string_view>, 3> kCategoryNames{{
    {Category::input, "input"},
    {Category::output, "output"},
    {Category::processor, "processor"},
}};

constexpr std::array<std::pair<DataType, std::string_view>, 8> kDataTypeNames{{
    {DataType::image, "image"},
    {DataType::text, "text"},
    {DataType::url, "url"},
    {DataType::html, "html"},
    {DataType::string_list, "string_list"},
    {DataType::masks, "masks"},
    {DataType::landmarks, "landmarks"},
    {DataType::tensor, "tensor"},
}};

bool is_snake_case(const std::string& id) {
  static const std::regex pattern("[a-z][a-z0-9]*(_[a-z0-9]+)*");
  return std::regex_match(id, pattern);
}

std::vector<std::string> string_list(const json& value, const std::string& path) {
  if (!value.is_array()) {
    throw ValidationError(path + ": expected an array");
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < value.size(); ++i) {
    if (!value[i].is_string()) {
      throw ValidationError(path + "[" + std::to_string(i) + "]: expected a string");
    }
    out.push_back(value[i].get<std::string>());
  }
  return out;
}

std::vector<SocketSpec> sockets_from_json(const json& value, const std::string& path) {
  if (!value.is_array()) {
    throw ValidationError(path + ": expected an array");
  }
  std::vector<SocketSpec> sockets;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < value.size(); ++i) {
    const std::string here = path + "[" + std::to_string(i) + "]";
    SocketSpec socket;
    socket.id = detail::require_string(value[i], "id", here);
    if (socket.id.empty()) {
      throw ValidationError(here + ".id: empty socket id");
    }
    if (!seen.insert(socket.id).second) {
      throw ValidationError(here + ".id: duplicate socket id '" + socket.id + "'");
    }
    for (const auto& name : string_list(detail::require(value[i], "dataTypes", here), here + ".dataTypes")) {
      auto type = parse_data_type(name);
      if (!type) {
        throw ValidationError(here + ".dataTypes: unknown data type '" + name + "'");
      }
      if (std::find(socket.data_types.begin(), socket.data_types.end(), *type) == socket.data_types.end()) {
        socket.data_types.push_back(*type);
      }
    }
    if (socket.data_types.empty()) {
      throw ValidationError(here + ".dataTypes: allow-list is empty");
    }
    sockets.push_back(std::move(socket));
  }
  return sockets;
}

ordered_json sockets_to_json(const std::vector<SocketSpec>& sockets) {
  ordered_json out = ordered_json::array();
  for (const auto& socket : sockets) {
    ordered_json types = ordered_json::array();
    for (auto type : socket.data_types) {
      types.push_back(std::string(to_string(type)));
    }
    out.push_back({{"id", socket.id}, {"dataTypes", std::move(types)}});
  }
  return out;
}

NodeSpec spec_from_json(const json& value, const std::string& path) {
  NodeSpec spec;
  spec.node_spec_id = detail::require_string(value, "nodeSpecId", path);
  const std::string here = path + "(" + spec.node_spec_id + ")";
  if (!is_snake_case(spec.node_spec_id)) {
    throw ValidationError(here + ".nodeSpecId: '" + spec.node_spec_id + "' is not lowercase snake_case");
  }
  const std::string category = detail::require_string(value, "category", here);
  auto parsed = parse_category(category);
  if (!parsed) {
    throw ValidationError(here + ".category: unknown category '" + category + "'");
  }
  spec.category = *parsed;
  spec.short_description = detail::require_string(value, "shortDescription", here);
  spec.description = detail::require_string(value, "description", here);
  spec.input_specs = sockets_from_json(detail::require(value, "inputSpecs", here), here + ".inputSpecs");
  spec.output_specs = sockets_from_json(detail::require(value, "outputSpecs", here), here + ".outputSpecs");
  spec.recommended_nodes =
      string_list(detail::require(value, "recommendedNodes", here), here + ".recommendedNodes");
  spec.default_params = detail::params_from_json(detail::require(value, "defaultParams", here), here + ".defaultParams");
  spec.examples = string_list(detail::require(value, "examples", here), here + ".examples");
  if (auto it = value.find("notes"); it != value.end()) {
    if (!it->is_string()) {
      throw ValidationError(here + ".notes: expected a string");
    }
    spec.notes = it->get<std::string>();
  }

  switch (spec.category) {
  case Category::input:
    if (!spec.input_specs.empty()) {
      throw ValidationError(here + ".inputSpecs: input nodes cannot have input sockets");
    }
    break;
  case Category::output:
    if (!spec.output_specs.empty()) {
      throw ValidationError(here + ".outputSpecs: output nodes cannot have output sockets");
    }
    break;
  case Category::processor:
    if (spec.input_specs.empty() || spec.output_specs.empty()) {
      throw ValidationError(here + ": processor nodes need both input and output sockets");
    }
    break;
  }
  for (const auto& [name, _] : spec.default_params) {
    if (spec.find_input(name) != nullptr) {
      throw ValidationError(here + ".defaultParams." + name + ": collides with an input socket");
    }
  }
  return spec;
}

ordered_json spec_to_json(const NodeSpec& spec) {
  ordered_json out;
  out["nodeSpecId"] = spec.node_spec_id;
  out["category"] = std::string(to_string(spec.category));
  out["shortDescription"] = spec.short_description;
  out["description"] = spec.description;
  out["inputSpecs"] = sockets_to_json(spec.input_specs);
  out["outputSpecs"] = sockets_to_json(spec.output_specs);
  out["recommendedNodes"] = spec.recommended_nodes;
  out["defaultParams"] = detail::params_to_json(spec.default_params);
  out["examples"] = spec.examples;
  if (!spec.notes.empty()) {
    out["notes"] = spec.notes;
  }
  return out;
}

} // namespace

std::string_view to_string(Category category) {
  for (const auto& [value, name] : kCategoryNames) {
    if (value == category) return name;
  }
  return "?";
}

std::string_view to_string(DataType type) {
  for (const auto& [value, name] : kDataTypeNames) {
    if (value == type) return name;
  }
  return "?";
}

std::optional<Category> parse_category(std::string_view text) {
  for (const auto& [value, name] : kCategoryNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

std::optional<DataType> parse_data_type(std::string_view text) {
  for (const auto& [value, name] : kDataTypeNames) {
    if (name == text) return value;
  }
  return std::nullopt;
}

bool SocketSpec::accepts_any_of(const std::vector<DataType>& types) const {
  return std::any_of(types.begin(), types.end(), [this](DataType t) {
    return std::find(data_types.begin(), data_types.end(), t) != data_types.end();
  });
}

const SocketSpec* NodeSpec::find_input(std::string_view socket_id) const {
  auto it = std::find_if(input_specs.begin(), input_specs.end(),
                         [&](const SocketSpec& s) { return s.id == socket_id; });
  return it == input_specs.end() ? nullptr : &*it;
}

const SocketSpec* NodeSpec::find_output(std::string_view socket_id) const {
  auto it = std::find_if(output_specs.begin(), output_specs.end(),
                         [&](const SocketSpec& s) { return s.id == socket_id; });
  return it == output_specs.end() ? nullptr : &*it;
}

ParamMap default_parameters(const NodeSpec& spec) { return spec.default_params; }

Registry::Registry(int version, std::vector<NodeSpec> specs) : version_(version), specs_(std::move(specs)) {
  for (std::size_t i = 0; i < specs_.size(); ++i) {
    if (!index_.emplace(specs_[i].node_spec_id, i).second) {
      throw ValidationError("nodes[" + std::to_string(i) + "]: duplicate nodeSpecId '" +
                            specs_[i].node_spec_id + "'");
    }
  }
  for (const auto& spec : specs_) {
    for (const auto& rec : spec.recommended_nodes) {
      if (rec == spec.node_spec_id || !index_.contains(rec)) {
        throw ValidationError("nodes(" + spec.node_spec_id + ").recommendedNodes: '" + rec +
                              "' does not name another node");
      }
    }
  }
}

Registry Registry::load(const std::filesystem::path& path) {
  return from_json(detail::read_text_file(path));
}

Registry Registry::from_json(std::string_view text) {
  const json doc = detail::parse_json(text, "registry");
  const json& version = detail::require(doc, "version", "$");
  if (!version.is_number_integer()) {
    throw ValidationError("$.version: expected an integer");
  }
  const json& nodes = detail::require(doc, "nodes", "$");
  if (!nodes.is_array()) {
    throw ValidationError("$.nodes: expected an array");
  }
  std::vector<NodeSpec> specs;
  specs.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    specs.push_back(spec_from_json(nodes[i], "$.nodes[" + std::to_string(i) + "]"));
  }
  return Registry(version.get<int>(), std::move(specs));
}

std::string Registry::to_json() const {
  ordered_json doc;
  doc["version"] = version_;
  doc["nodes"] = ordered_json::array();
  for (const auto& spec : specs_) {
    doc["nodes"].push_back(spec_to_json(spec));
  }
  return doc.dump(2) + "\n";
}

const NodeSpec* Registry::find(std::string_view node_spec_id) const {
  auto it = index_.find(std::string(node_spec_id));
  return it == index_.end() ? nullptr : &specs_[it->second];
}

std::size_t Registry::count(Category category) const {
  return static_cast<std::size_t>(
      std::count_if(specs_.begin(), specs_.end(), [&](const NodeSpec& s) { return s.category == category; }));
}

} // namespace pipeforge
