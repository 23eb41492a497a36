#include "pipeforge/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "pipeforge/error.hpp"

namespace pipeforge::dsl {

namespace {

enum class TokenKind { identifier, string, equals, colon, lparen, rparen, comma };

struct Token {
  TokenKind kind;
  std::string text; // identifier name or decoded string value
  std::size_t column = 0;
};

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::string_view describe(TokenKind kind) {
  switch (kind) {
  case TokenKind::identifier: return "identifier";
  case TokenKind::string: return "string";
  case TokenKind::equals: return "'='";
  case TokenKind::colon: return "':'";
  case TokenKind::lparen: return "'('";
  case TokenKind::rparen: return "')'";
  case TokenKind::comma: return "','";
  }
  return "token";
}

struct LexError {
  std::string message;
};

// Tokenizes one line. Returns the error message on failure.
std::variant<std::vector<Token>, LexError> lex_line(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    const char c = line[i];
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < line.size() && line[i + 1] == '/') {
      break;
    }
    const std::size_t column = i + 1;
    if (is_ident_start(c)) {
      std::size_t end = i + 1;
      while (end < line.size() && is_ident_char(line[end])) ++end;
      tokens.push_back({TokenKind::identifier, std::string(line.substr(i, end - i)), column});
      i = end;
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < line.size()) {
        const char d = line[j];
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\\') {
          if (j + 1 < line.size() && (line[j + 1] == '"' || line[j + 1] == '\\')) {
            value.push_back(line[j + 1]);
            j += 2;
            continue;
          }
          return LexError{"invalid escape in string literal at column " + std::to_string(j + 1)};
        }
        value.push_back(d);
        ++j;
      }
      if (!closed) {
        return LexError{"unterminated string literal starting at column " + std::to_string(column)};
      }
      tokens.push_back({TokenKind::string, std::move(value), column});
      i = j;
      continue;
    }
    TokenKind kind;
    switch (c) {
    case '=': kind = TokenKind::equals; break;
    case ':': kind = TokenKind::colon; break;
    case '(': kind = TokenKind::lparen; break;
    case ')': kind = TokenKind::rparen; break;
    case ',': kind = TokenKind::comma; break;
    default:
      return LexError{"unexpected character '" + std::string(1, c) + "' at column " + std::to_string(column)};
    }
    tokens.push_back({kind, std::string(1, c), column});
    ++i;
  }
  return tokens;
}

class LineParser {
public:
  explicit LineParser(const std::vector<Token>& tokens) : tokens_(tokens) {}

  // Returns an error message, or nullopt with `out` filled.
  std::optional<std::string> statement(Statement& out) {
    std::string first;
    if (auto err = expect(TokenKind::identifier, "statement to start with an identifier", &first)) return err;
    if (accept(TokenKind::equals)) {
      out.output_var = first;
      if (auto err = expect(TokenKind::identifier, "node id after '='", &out.node_id)) return err;
    } else {
      out.node_id = first;
    }
    if (auto err = expect(TokenKind::colon, "':' after node id")) return err;
    if (auto err = expect(TokenKind::identifier, "node type after ':'", &out.node_type)) return err;
    if (auto err = expect(TokenKind::lparen, "'(' after node type")) return err;
    if (!accept(TokenKind::rparen)) {
      while (true) {
        Argument arg;
        if (auto err = expect(TokenKind::identifier, "argument name", &arg.name)) return err;
        if (auto err = expect(TokenKind::equals, "'=' after argument name")) return err;
        if (pos_ < tokens_.size() && tokens_[pos_].kind == TokenKind::identifier) {
          arg.value = VarRef{tokens_[pos_++].text};
        } else if (pos_ < tokens_.size() && tokens_[pos_].kind == TokenKind::string) {
          arg.value = StringLiteral{tokens_[pos_++].text};
        } else {
          return unexpected("variable or string value");
        }
        out.args.push_back(std::move(arg));
        if (accept(TokenKind::comma)) continue;
        if (auto err = expect(TokenKind::rparen, "',' or ')' after argument")) return err;
        break;
      }
    }
    if (pos_ != tokens_.size()) {
      return unexpected("end of line");
    }
    return std::nullopt;
  }

private:
  bool accept(TokenKind kind) {
    if (pos_ < tokens_.size() && tokens_[pos_].kind == kind) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::optional<std::string> expect(TokenKind kind, std::string_view what, std::string* text = nullptr) {
    if (pos_ < tokens_.size() && tokens_[pos_].kind == kind) {
      if (text) *text = tokens_[pos_].text;
      ++pos_;
      return std::nullopt;
    }
    return unexpected(what);
  }

  std::string unexpected(std::string_view what) const {
    std::string msg = "expected " + std::string(what);
    if (pos_ < tokens_.size()) {
      msg += ", found " + std::string(describe(tokens_[pos_].kind)) + " at column " +
             std::to_string(tokens_[pos_].column);
    } else {
      msg += ", found end of line";
    }
    return msg;
  }

  const std::vector<Token>& tokens_;
  std::size_t pos_ = 0;
};

// Checks the per-statement invariants shared by parse and print.
std::optional<std::string> check_statement(const Statement& s) {
  if (s.output_var && !is_identifier(*s.output_var)) return "invalid output variable '" + *s.output_var + "'";
  if (!is_identifier(s.node_id)) return "invalid node id '" + s.node_id + "'";
  if (!is_identifier(s.node_type)) return "invalid node type '" + s.node_type + "'";
  auto type = node_type_of(s.node_id);
  if (!type || *type != s.node_type) {
    return "node id '" + s.node_id + "' must be '" + s.node_type + "_<n>' with n a positive integer";
  }
  std::set<std::string_view> names;
  for (const auto& arg : s.args) {
    if (!is_identifier(arg.name)) return "invalid argument name '" + arg.name + "'";
    if (!names.insert(arg.name).second) return "duplicate argument '" + arg.name + "'";
    if (const auto* ref = std::get_if<VarRef>(&arg.value); ref && !is_identifier(ref->name)) {
      return "invalid variable '" + ref->name + "' in argument '" + arg.name + "'";
    }
  }
  return std::nullopt;
}

bool is_blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](char c) { return is_space(c) || c == '\n'; });
}

void append_quoted(std::string& out, const std::string& value) {
  out.push_back('"');
  for (char c : value) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
}

} // namespace

bool is_identifier(std::string_view text) {
  return !text.empty() && is_ident_start(text.front()) && std::all_of(text.begin(), text.end(), is_ident_char);
}

std::optional<std::string_view> node_type_of(std::string_view node_id) {
  const auto underscore = node_id.rfind('_');
  if (underscore == std::string_view::npos || underscore == 0 || underscore + 1 >= node_id.size()) {
    return std::nullopt;
  }
  const std::string_view suffix = node_id.substr(underscore + 1);
  if (suffix.front() == '0' ||
      !std::all_of(suffix.begin(), suffix.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return std::nullopt;
  }
  return node_id.substr(0, underscore);
}

ParseResult parse(std::string_view source) {
  if (is_blank(source)) {
    throw ParseError("empty pseudocode");
  }
  ParseResult result;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= source.size()) {
    auto end = source.find('\n', start);
    if (end == std::string_view::npos) end = source.size();
    std::string_view line = source.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (end == source.size() && line.empty()) break;

    if (line.size() > kMaxLineLength) {
      result.diagnostics.push_back({line_no, "line exceeds " + std::to_string(kMaxLineLength) + " characters"});
      continue;
    }
    auto lexed = lex_line(line);
    if (auto* err = std::get_if<LexError>(&lexed)) {
      result.diagnostics.push_back({line_no, err->message});
      continue;
    }
    const auto& tokens = std::get<std::vector<Token>>(lexed);
    if (tokens.empty()) continue;
    if (tokens.size() == 2 && tokens[0].kind == TokenKind::identifier && tokens[1].kind == TokenKind::colon) {
      result.program.sections.push_back({tokens[0].text, result.program.statements.size()});
      continue;
    }
    Statement statement;
    statement.source_line = line_no;
    LineParser parser(tokens);
    if (auto err = parser.statement(statement)) {
      result.diagnostics.push_back({line_no, *err});
      continue;
    }
    if (auto err = check_statement(statement)) {
      result.diagnostics.push_back({line_no, *err});
      continue;
    }
    result.program.statements.push_back(std::move(statement));
  }
  return result;
}

std::string print(const PseudoProgram& program) {
  const auto& statements = program.statements;
  std::size_t prev = 0;
  for (std::size_t i = 0; i < program.sections.size(); ++i) {
    const auto& section = program.sections[i];
    if (!is_identifier(section.label)) {
      throw ValidationError("section " + std::to_string(i) + ": invalid label '" + section.label + "'");
    }
    if (section.first_statement < prev || section.first_statement > statements.size()) {
      throw ValidationError("section " + std::to_string(i) + ": position out of order");
    }
    prev = section.first_statement;
  }

  std::string out;
  std::size_t next_section = 0;
  auto emit_sections = [&](std::size_t index) {
    while (next_section < program.sections.size() && program.sections[next_section].first_statement == index) {
      out += program.sections[next_section].label;
      out += ":\n";
      ++next_section;
    }
  };
  for (std::size_t i = 0; i < statements.size(); ++i) {
    const auto& s = statements[i];
    if (auto err = check_statement(s)) {
      throw ValidationError("statement " + std::to_string(i) + ": " + *err);
    }
    emit_sections(i);
    if (next_section > 0) out += "  ";
    if (s.output_var) {
      out += *s.output_var;
      out += " = ";
    }
    out += s.node_id;
    out += ": ";
    out += s.node_type;
    out += '(';
    for (std::size_t a = 0; a < s.args.size(); ++a) {
      if (a > 0) out += ", ";
      out += s.args[a].name;
      out += '=';
      if (const auto* ref = std::get_if<VarRef>(&s.args[a].value)) {
        out += ref->name;
      } else {
        const auto& literal = std::get<StringLiteral>(s.args[a].value).value;
        if (literal.find_first_of("\r\n") != std::string::npos) {
          throw ValidationError("statement " + std::to_string(i) + ": string argument '" + s.args[a].name +
                                "' contains a line break");
        }
        append_quoted(out, literal);
      }
    }
    out += ")\n";
  }
  emit_sections(statements.size());
  return out;
}

std::size_t token_count(std::string_view text) {
  std::size_t count = 0;
  bool line_has_tokens = false;
  bool in_word = false;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (c == '\n') {
      if (line_has_tokens) ++count;
      line_has_tokens = false;
      in_word = false;
    } else if (std::isspace(u)) {
      in_word = false;
    } else if (std::isalnum(u) || c == '_' || u >= 0x80) {
      if (!in_word) ++count;
      in_word = true;
      line_has_tokens = true;
    } else {
      ++count;
      in_word = false;
      line_has_tokens = true;
    }
  }
  if (line_has_tokens) ++count;
  return count;
}

} // namespace pipeforge::dsl
