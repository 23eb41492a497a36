#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace pipeforge {

enum class Category { input, output, processor };

/// Closed set of edge data types. The coarse "features" class of the node
/// library is split so that socket compatibility can be checked.
enum class DataType { image, text, url, html, string_list, masks, landmarks, tensor };

std::string_view to_string(Category category);
std::string_view to_string(DataType type);
std::optional<Category> parse_category(std::string_view text);
std::optional<DataType> parse_data_type(std::string_view text);

/// Scalar node parameter. Integers and reals are kept apart so that values
/// such as 256 and 0.5 survive a JSON round trip unchanged.
using ParamValue = std::variant<bool, std::int64_t, double, std::string>;
using ParamMap = std::map<std::string, ParamValue>;

struct SocketSpec {
  std::string id;
  std::vector<DataType> data_types; // allow-list, never empty

  bool accepts_any_of(const std::vector<DataType>& types) const;
  friend bool operator==(const SocketSpec&, const SocketSpec&) = default;
};

struct NodeSpec {
  std::string node_spec_id;
  Category category = Category::processor;
  std::string short_description;
  std::string description;
  std::vector<SocketSpec> input_specs;
  std::vector<SocketSpec> output_specs;
  std::vector<std::string> recommended_nodes;
  ParamMap default_params;
  std::vector<std::string> examples;
  // Free-form annotation, round-tripped.
  std::string notes;

  const SocketSpec* find_input(std::string_view socket_id) const;
  const SocketSpec* find_output(std::string_view socket_id) const;
  friend bool operator==(const NodeSpec&, const NodeSpec&) = default;
};

/// Copy of the spec's default parameters (empty when none are defined).
ParamMap default_parameters(const NodeSpec& spec);

/// Immutable node library. Specs keep file order; lookups are exact and
/// case-sensitive.
class Registry {
public:
  static Registry load(const std::filesystem::path& path);
  static Registry from_json(std::string_view text);

  std::string to_json() const;

  const NodeSpec* find(std::string_view node_spec_id) const;
  bool contains(std::string_view node_spec_id) const { return find(node_spec_id) != nullptr; }

  const std::vector<NodeSpec>& specs() const { return specs_; }
  std::size_t size() const { return specs_.size(); }
  std::size_t count(Category category) const;
  int version() const { return version_; }

  friend bool operator==(const Registry& a, const Registry& b) {
    return a.version_ == b.version_ && a.specs_ == b.specs_;
  }

private:
  Registry(int version, std::vector<NodeSpec> specs);

  int version_ = 0;
  std::vector<NodeSpec> specs_;
  std::unordered_map<std::string, std::size_t> index_;
};

} // namespace pipeforge
