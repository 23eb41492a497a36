#include "json_support.hpp"

#include <fstream>
#include <sstream>

#include "pipeforge/error.hpp"

namespace pipeforge::detail {

ordered_json param_to_json(const ParamValue& value) {
  return std::visit([](const auto& v) { return ordered_json(v); }, value);
}

ParamValue param_from_json(const json& value, const std::string& path) {
  switch (value.type()) {
  case json::value_t::boolean:
    return value.get<bool>();
  case json::value_t::number_integer:
    return value.get<std::int64_t>();
  case json::value_t::number_unsigned:
    return static_cast<std::int64_t>(value.get<std::uint64_t>());
  case json::value_t::number_float:
    return value.get<double>();
  case json::value_t::string:
    return value.get<std::string>();
  default:
    throw ValidationError(path + ": parameter must be a scalar (bool, number or string)");
  }
}

ordered_json params_to_json(const ParamMap& params) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, value] : params) {
    out[name] = param_to_json(value);
  }
  return out;
}

ParamMap params_from_json(const json& value, const std::string& path) {
  if (!value.is_object()) {
    throw ValidationError(path + ": expected an object");
  }
  ParamMap params;
  for (const auto& [name, v] : value.items()) {
    params.emplace(name, param_from_json(v, path + "." + name));
  }
  return params;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ParseError("cannot open " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

json parse_json(std::string_view text, std::string_view what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

const json& require(const json& object, const char* key, const std::string& path) {
  if (!object.is_object()) {
    throw ValidationError(path + ": expected an object");
  }
  auto it = object.find(key);
  if (it == object.end()) {
    throw ValidationError(path + "." + key + ": missing field");
  }
  return *it;
}

std::string require_string(const json& object, const char* key, const std::string& path) {
  const json& value = require(object, key, path);
  if (!value.is_string()) {
    throw ValidationError(path + "." + key + ": expected a string");
  }
  return value.get<std::string>();
}

} // namespace pipeforge::detail
