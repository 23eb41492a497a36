#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "pipeforge/graph.hpp"
#include "pipeforge/interpreter.hpp"
#include "pipeforge/registry.hpp"

namespace pipeforge::detail {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

ordered_json param_to_json(const ParamValue& value);
// Throws ValidationError for arrays, objects and null.
ParamValue param_from_json(const json& value, const std::string& path);

ordered_json params_to_json(const ParamMap& params);
ParamMap params_from_json(const json& value, const std::string& path);

ordered_json graph_to_value(const SerializedGraph& graph);
SerializedGraph graph_from_value(const json& value, const std::string& path);

// {graph, droppedLines, danglingArgs, diagnostics}
ordered_json report_to_value(const CompileReport& report);

std::string read_text_file(const std::filesystem::path& path);

// Parses JSON text, converting nlohmann errors into ParseError.
json parse_json(std::string_view text, std::string_view what);

// Typed field access with JSON-path error messages.
const json& require(const json& object, const char* key, const std::string& path);
std::string require_string(const json& object, const char* key, const std::string& path);

} // namespace pipeforge::detail
