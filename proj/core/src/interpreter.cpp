#include "pipeforge/interpreter.hpp"

#include <charconv>
#include <optional>
#include <unordered_map>
#include <unordered_set>

#include "json_support.hpp"

namespace pipeforge {

namespace {

constexpr double kStaircaseStep = 40.0;

// Converts a literal to the type of the parameter's default value.
std::optional<ParamValue> coerce_literal(const std::string& literal, const ParamValue& like) {
  return std::visit(
      [&](const auto& def) -> std::optional<ParamValue> {
        using T = std::decay_t<decltype(def)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return ParamValue{literal};
        } else if constexpr (std::is_same_v<T, bool>) {
          if (literal == "true") return ParamValue{true};
          if (literal == "false") return ParamValue{false};
          return std::nullopt;
        } else if constexpr (std::is_same_v<T, std::int64_t>) {
          std::int64_t v = 0;
          auto [ptr, ec] = std::from_chars(literal.data(), literal.data() + literal.size(), v);
          if (ec != std::errc{} || ptr != literal.data() + literal.size()) return std::nullopt;
          return ParamValue{v};
        } else {
          try {
            std::size_t used = 0;
            double v = std::stod(literal, &used);
            if (used != literal.size()) return std::nullopt;
            return ParamValue{v};
          } catch (const std::exception&) {
            return std::nullopt;
          }
        }
      },
      like);
}

std::string at_line(std::size_t line, const std::string& message) {
  return "line " + std::to_string(line) + ": " + message;
}

} // namespace

CompileReport interpret(const dsl::PseudoProgram& program, const Registry& registry,
                        const InterpretOptions& options) {
  CompileReport report;
  auto& graph = report.graph;
  std::unordered_set<std::string> node_ids;
  // Variable name -> node index in graph.nodes.
  std::unordered_map<std::string, std::size_t> variables;

  for (const auto& statement : program.statements) {
    const std::size_t line = statement.source_line;
    const NodeSpec* spec = registry.find(statement.node_type);
    if (spec == nullptr) {
      report.dropped_lines.push_back({line, "unknown node type " + statement.node_type});
      continue;
    }
    if (node_ids.contains(statement.node_id)) {
      report.dropped_lines.push_back({line, "duplicate node id " + statement.node_id});
      continue;
    }

    SerializedNode node;
    node.id = statement.node_id;
    node.node_spec_id = spec->node_spec_id;
    node.params = default_parameters(*spec);
    std::vector<DanglingArg> dangling;
    std::vector<std::string> notes;

    for (const auto& arg : statement.args) {
      const SocketSpec* input = spec->find_input(arg.name);
      const auto param = spec->default_params.find(arg.name);
      if (const auto* ref = std::get_if<dsl::VarRef>(&arg.value)) {
        if (input == nullptr) {
          notes.push_back(at_line(line, param != spec->default_params.end()
                                            ? "parameter '" + arg.name + "' of " + node.id + " expects a string literal"
                                            : node.id + " has no input '" + arg.name + "'; argument ignored"));
          continue;
        }
        auto var = variables.find(ref->name);
        if (var == variables.end()) {
          dangling.push_back({node.id, arg.name});
          continue;
        }
        const SerializedNode& source = graph.nodes[var->second];
        const SocketSpec& output = registry.find(source.node_spec_id)->output_specs.front();
        if (!input->accepts_any_of(output.data_types)) {
          notes.push_back(at_line(line, "'" + source.id + "." + output.id + "' cannot feed '" + node.id + "." +
                                            arg.name + "'; edge ignored"));
          continue;
        }
        node.incoming_edges[arg.name].push_back({source.id, output.id});
      } else {
        const auto& literal = std::get<dsl::StringLiteral>(arg.value).value;
        if (param == spec->default_params.end()) {
          notes.push_back(at_line(line, input != nullptr
                                            ? "input '" + arg.name + "' of " + node.id + " takes a connection, not a literal"
                                            : node.id + " has no parameter '" + arg.name + "'; argument ignored"));
          continue;
        }
        if (auto value = coerce_literal(literal, param->second)) {
          node.params[arg.name] = std::move(*value);
        } else {
          notes.push_back(at_line(line, "cannot use \"" + literal + "\" for parameter '" + arg.name + "' of " + node.id));
        }
      }
    }

    if (options.cascade_dangling && !dangling.empty()) {
      report.dropped_lines.push_back({line, "undefined variable for argument '" + dangling.front().arg + "' of " +
                                                node.id + " (cascade)"});
      continue;
    }
    for (auto& d : dangling) {
      report.diagnostics.push_back(at_line(line, "argument '" + d.arg + "' of " + d.node_id + " names an undefined variable"));
      report.dangling_args.push_back(std::move(d));
    }
    for (auto& note : notes) report.diagnostics.push_back(std::move(note));

    const double step = kStaircaseStep * static_cast<double>(graph.nodes.size());
    node.position = {step, step};
    const std::size_t index = graph.nodes.size();
    node_ids.insert(node.id);
    graph.nodes.push_back(std::move(node));

    if (!spec->output_specs.empty()) {
      for (const std::string* name : {&statement.node_id, statement.output_var ? &*statement.output_var : nullptr}) {
        if (name == nullptr) continue;
        if (!variables.emplace(*name, index).second) {
          report.diagnostics.push_back(at_line(line, "variable '" + *name + "' already defined; keeping the first"));
        }
      }
    }
  }
  return report;
}

CompileReport compile(std::string_view source, const Registry& registry, const InterpretOptions& options) {
  dsl::ParseResult parsed = dsl::parse(source);
  CompileReport report = interpret(parsed.program, registry, options);
  std::vector<std::string> diagnostics;
  diagnostics.reserve(parsed.diagnostics.size() + report.diagnostics.size());
  for (const auto& d : parsed.diagnostics) {
    diagnostics.push_back(at_line(d.line, d.message));
  }
  for (auto& d : report.diagnostics) diagnostics.push_back(std::move(d));
  report.diagnostics = std::move(diagnostics);
  return report;
}

namespace detail {

ordered_json report_to_value(const CompileReport& report) {
  ordered_json doc;
  doc["graph"] = detail::graph_to_value(report.graph);
  doc["droppedLines"] = ordered_json::array();
  for (const auto& d : report.dropped_lines) {
    doc["droppedLines"].push_back({{"line", d.line}, {"reason", d.reason}});
  }
  doc["danglingArgs"] = ordered_json::array();
  for (const auto& d : report.dangling_args) {
    doc["danglingArgs"].push_back({{"nodeId", d.node_id}, {"arg", d.arg}});
  }
  doc["diagnostics"] = report.diagnostics;
  return doc;
}

} // namespace detail

std::string to_json(const CompileReport& report, int indent) {
  return detail::report_to_value(report).dump(indent) + (indent >= 0 ? "\n" : "");
}

} // namespace pipeforge
