#pragma once

// Pipeline pseudocode: one statement per node.
//
//   input:
//     input_image_1: input_image()
//     input_text_1: input_text(text="caption this image in detail")
//   processor:
//     pali_1_out = pali_1: pali(image=input_image_1, prompt=input_text_1)
//
// Grammar:
//   statement := [ident "="] ident ":" ident "(" [arg ("," arg)*] ")"
//   arg       := ident "=" (ident | string)
//   section   := ident ":"            (alone on its line)
//   comment   := "//" to end of line
// Strings are double-quoted; the only escapes are \" and \\.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace pipeforge::dsl {

inline constexpr std::size_t kMaxLineLength = 10000;

struct VarRef {
  std::string name;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};

struct StringLiteral {
  std::string value;
  friend bool operator==(const StringLiteral&, const StringLiteral&) = default;
};

using ArgValue = std::variant<VarRef, StringLiteral>;

struct Argument {
  std::string name;
  ArgValue value;
  friend bool operator==(const Argument&, const Argument&) = default;
};

struct Statement {
  std::optional<std::string> output_var;
  std::string node_id;
  std::string node_type;
  std::vector<Argument> args;
  std::size_t source_line = 0;

  /// Variable this statement declares for later statements.
  const std::string& declared_name() const { return output_var ? *output_var : node_id; }

  // Structural equality; source_line is positional metadata and ignored.
  friend bool operator==(const Statement& a, const Statement& b) {
    return a.output_var == b.output_var && a.node_id == b.node_id && a.node_type == b.node_type &&
           a.args == b.args;
  }
};

/// Section header; it precedes the statement at index first_statement.
struct Section {
  std::string label;
  std::size_t first_statement = 0;
  friend bool operator==(const Section&, const Section&) = default;
};

struct PseudoProgram {
  std::vector<Statement> statements;
  std::vector<Section> sections;
  friend bool operator==(const PseudoProgram&, const PseudoProgram&) = default;
};

struct Diagnostic {
  std::size_t line = 0;
  std::string message;
  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ParseResult {
  PseudoProgram program;
  std::vector<Diagnostic> diagnostics;
};

/// Partial parse: every line is a statement, a section header, blank/comment,
/// or a diagnostic. Throws ParseError only when the source is blank.
ParseResult parse(std::string_view source);

/// Canonical text. Throws ValidationError naming the statement index when a
/// statement breaks an invariant (bad identifier, id/type mismatch, duplicate
/// argument, unprintable literal).
std::string print(const PseudoProgram& program);

/// "pali_12" -> "pali"; nullopt unless the id ends in "_<positive int>".
std::optional<std::string_view> node_type_of(std::string_view node_id);

bool is_identifier(std::string_view text);

/// Word/punctuation token count used for size comparisons. On every line
/// that is not blank: each maximal run of [A-Za-z0-9_] or non-ASCII bytes
/// is one token, each other non-space character is one token, and the end
/// of the line is one token. "a = b(c)" counts 7.
std::size_t token_count(std::string_view text);

} // namespace pipeforge::dsl
