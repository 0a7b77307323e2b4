#pragma once

// Text format for block-diagram models (.rbd):
//
//   model      := item+
//   item       := component | system
//   component  := "component" ident "{" "lambda" "=" number
//                   ( ";" "name" "=" string )? "}"
//   system     := "system" ident "=" expr
//   expr       := ("series" | "parallel") "(" expr ("," expr)* ")" | ident
//
// `#` starts a comment that runs to the end of the line. Failure rates are
// per hour. Each reference to a component creates a new independent
// instance, numbered left to right.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rbd/model.hpp"

namespace rbd {

class ParseError : public std::runtime_error {
 public:
  ParseError(SourcePosition where, std::string message,
             std::optional<std::string> expected = std::nullopt)
      : std::runtime_error(std::to_string(where.line) + ":" +
                           std::to_string(where.column) + ": " + message),
        where_(where),
        message_(std::move(message)),
        expected_(std::move(expected)) {}

  int line() const { return where_.line; }
  int column() const { return where_.column; }
  SourcePosition where() const { return where_; }
  const std::string& message() const { return message_; }
  const std::optional<std::string>& expected() const { return expected_; }

 private:
  SourcePosition where_;
  std::string message_;
  std::optional<std::string> expected_;
};

namespace dsl_detail {

enum class Tok {
  kIdent, kNumber, kString, kLBrace, kRBrace, kLParen, kRParen,
  kComma, kSemicolon, kEquals, kEnd
};

struct Token {
  Tok kind = Tok::kEnd;
  std::string text;  // identifier, decoded string, or number spelling
  double number = 0.0;
  SourcePosition where;
};

inline std::string describe(const Token& t) {
  switch (t.kind) {
    case Tok::kIdent: return "'" + t.text + "'";
    case Tok::kNumber: return "number " + t.text;
    case Tok::kString: return "string";
    case Tok::kLBrace: return "'{'";
    case Tok::kRBrace: return "'}'";
    case Tok::kLParen: return "'('";
    case Tok::kRParen: return "')'";
    case Tok::kComma: return "','";
    case Tok::kSemicolon: return "';'";
    case Tok::kEquals: return "'='";
    case Tok::kEnd: return "end of input";
  }
  return "token";
}

inline bool is_ident_start(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
}
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_ident_char(char c) { return is_ident_start(c) || is_digit(c); }

inline bool is_keyword(std::string_view s) {
  return s == "component" || s == "system" || s == "lambda" || s == "name" ||
         s == "series" || s == "parallel";
}

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_blanks();
    Token t;
    t.where = {line_, column_};
    if (pos_ >= src_.size()) return t;
    char c = src_[pos_];
    if (is_ident_start(c)) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && is_ident_char(src_[pos_])) advance();
      t.kind = Tok::kIdent;
      t.text = std::string(src_.substr(start, pos_ - start));
      return t;
    }
    if (is_digit(c)) return number(t);
    if (c == '"') return string(t);
    advance();
    switch (c) {
      case '{': t.kind = Tok::kLBrace; return t;
      case '}': t.kind = Tok::kRBrace; return t;
      case '(': t.kind = Tok::kLParen; return t;
      case ')': t.kind = Tok::kRParen; return t;
      case ',': t.kind = Tok::kComma; return t;
      case ';': t.kind = Tok::kSemicolon; return t;
      case '=': t.kind = Tok::kEquals; return t;
      default: break;
    }
    auto byte = static_cast<unsigned char>(c);
    if (byte >= 0x20 && byte < 0x7f)
      throw ParseError(t.where, std::string("unexpected character '") + c + "'");
    static constexpr char kHex[] = "0123456789abcdef";
    throw ParseError(t.where, std::string("unexpected byte 0x") +
                                  kHex[byte >> 4] + kHex[byte & 15]);
  }

 private:
  void advance() {
    if (src_[pos_] == '\n') {
      ++line_;
      column_ = 1;
    } else {
      ++column_;
    }
    ++pos_;
  }

  void skip_blanks() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else {
        break;
      }
    }
  }

  Token number(Token t) {
    std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      advance();
      while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      advance();
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) advance();
      if (pos_ >= src_.size() || !is_digit(src_[pos_]))
        throw ParseError({line_, column_}, "malformed exponent in number",
                         "digit");
      while (pos_ < src_.size() && is_digit(src_[pos_])) advance();
    }
    t.kind = Tok::kNumber;
    t.text = std::string(src_.substr(start, pos_ - start));
    auto [end, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(),
                                     t.number);
    if (ec == std::errc::result_out_of_range || !std::isfinite(t.number))
      throw ParseError(t.where, "number " + t.text + " is out of range");
    if (ec != std::errc() || end != t.text.data() + t.text.size())
      throw ParseError(t.where, "malformed number " + t.text);
    return t;
  }

  Token string(Token t) {
    advance();  // opening quote
    t.kind = Tok::kString;
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n')
        throw ParseError(t.where, "unterminated string", "'\"'");
      char c = src_[pos_];
      if (c == '"') {
        advance();
        return t;
      }
      if (c == '\\') {
        SourcePosition at{line_, column_};
        advance();
        if (pos_ >= src_.size() || (src_[pos_] != '"' && src_[pos_] != '\\'))
          throw ParseError(at, "invalid escape in string", "'\\\"' or '\\\\'");
        c = src_[pos_];
      }
      t.text.push_back(c);
      advance();
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int column_ = 1;
};

class Parser {
 public:
  explicit Parser(std::string_view src) : lexer_(src) { shift(); }

  SystemModel parse_model() {
    std::optional<BlockExpr> root;
    std::string name;
    std::vector<Component> components;
    std::map<std::string, SourcePosition, std::less<>> declared;

    if (tok_.kind == Tok::kEnd)
      fail("expected a component or system declaration", "'component' or 'system'");
    while (tok_.kind != Tok::kEnd) {
      if (is_word("component")) {
        Component c = parse_component();
        if (auto it = declared.find(c.id); it != declared.end())
          throw ParseError(*c.where, "component '" + c.id +
                                         "' already declared at " +
                                         std::to_string(it->second.line) + ":" +
                                         std::to_string(it->second.column));
        declared.emplace(c.id, *c.where);
        components.push_back(std::move(c));
      } else if (is_word("system")) {
        if (root) fail("only one system declaration is allowed");
        shift();
        name = expect_ident("system name");
        expect(Tok::kEquals, "'='");
        root = parse_expr(0);
      } else {
        fail("expected a component or system declaration, found " + describe(tok_),
             "'component' or 'system'");
      }
    }
    if (!root) fail("missing system declaration", "'system'");

    SystemModel model = make_model(std::move(name), std::move(components),
                                   std::move(*root));
    auto errors = validate_model(model).errors();
    if (!errors.empty()) {
      auto positioned = std::find_if(errors.begin(), errors.end(),
                                     [](const Diagnostic& d) { return d.where.has_value(); });
      const auto& e = positioned != errors.end() ? *positioned : errors.front();
      throw ParseError(e.where.value_or(SourcePosition{}), e.message);
    }
    return model;
  }

 private:
  static constexpr int kMaxDepth = 256;

  void shift() { tok_ = lexer_.next(); }

  bool is_word(std::string_view w) const {
    return tok_.kind == Tok::kIdent && tok_.text == w;
  }

  [[noreturn]] void fail(std::string message,
                         std::optional<std::string> expected = std::nullopt) {
    throw ParseError(tok_.where, std::move(message), std::move(expected));
  }

  void expect(Tok kind, const std::string& what) {
    if (tok_.kind != kind) fail("expected " + what + ", found " + describe(tok_), what);
    shift();
  }

  void expect_word(std::string_view w) {
    std::string what = "'" + std::string(w) + "'";
    if (!is_word(w)) fail("expected " + what + ", found " + describe(tok_), what);
    shift();
  }

  std::string expect_ident(const std::string& what) {
    if (tok_.kind != Tok::kIdent)
      fail("expected " + what + ", found " + describe(tok_), "identifier");
    if (is_keyword(tok_.text))
      fail("keyword '" + tok_.text + "' cannot be used as " + what, "identifier");
    std::string id = tok_.text;
    shift();
    return id;
  }

  Component parse_component() {
    shift();  // 'component'
    Component c;
    c.where = tok_.where;
    c.id = expect_ident("component name");
    expect(Tok::kLBrace, "'{'");
    expect_word("lambda");
    expect(Tok::kEquals, "'='");
    if (tok_.kind != Tok::kNumber)
      fail("expected failure rate, found " + describe(tok_), "number");
    c.failure_rate = tok_.number;
    shift();
    if (tok_.kind == Tok::kSemicolon) {
      shift();
      expect_word("name");
      expect(Tok::kEquals, "'='");
      if (tok_.kind != Tok::kString)
        fail("expected display name, found " + describe(tok_), "string");
      c.display_name = tok_.text;
      shift();
    }
    expect(Tok::kRBrace, "'}'");
    return c;
  }

  BlockExpr parse_expr(int depth) {
    if (depth > kMaxDepth) fail("block nesting is too deep");
    if (is_word("series") || is_word("parallel")) {
      bool is_series = tok_.text == "series";
      shift();
      expect(Tok::kLParen, "'('");
      std::vector<BlockExpr> children;
      children.push_back(parse_expr(depth + 1));
      while (tok_.kind == Tok::kComma) {
        shift();
        children.push_back(parse_expr(depth + 1));
      }
      expect(Tok::kRParen, "',' or ')'");
      return is_series ? series(std::move(children)) : parallel(std::move(children));
    }
    SourcePosition at = tok_.where;
    BlockExpr leaf = ref(expect_ident("component reference"));
    std::get<ComponentRef>(leaf.node).where = at;
    return leaf;
  }

  Lexer lexer_;
  Token tok_;
};

inline std::string format_rate(double rate) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, rate,
                                 std::chars_format::scientific);
  std::string s(buf, end);
  auto e = s.find('e');
  std::string mantissa = s.substr(0, e);
  std::string exponent = s.substr(e + 1);
  bool negative = exponent.front() == '-';
  exponent.erase(0, 1);  // sign
  exponent.erase(0, std::min(exponent.find_first_not_of('0'), exponent.size() - 1));
  return mantissa + "e" + (negative ? "-" : "") + exponent;
}

inline void write_expr(const BlockExpr& expr, std::string& out) {
  if (expr.is_ref()) {
    out += expr.ref().component_id;
    return;
  }
  out += expr.is_series() ? "series(" : "parallel(";
  bool first = true;
  for (const auto& child : expr.children()) {
    if (!first) out += ", ";
    first = false;
    write_expr(child, out);
  }
  out += ')';
}

inline std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + '"';
}

}  // namespace dsl_detail

/// Parses and validates a model. Throws ParseError carrying the position of
/// the first syntax error, or of the first validation error.
inline SystemModel parse(std::string_view source) {
  return dsl_detail::Parser(source).parse_model();
}

/// Canonical text: one component per line in declaration order, shortest
/// round-trip scientific rates, fully parenthesized system expression.
inline std::string serialize(const SystemModel& model) {
  std::string out;
  for (const auto& c : model.components) {
    out += "component " + c.id + " { lambda = " +
           dsl_detail::format_rate(c.failure_rate);
    if (!c.display_name.empty())
      out += "; name = " + dsl_detail::quote(c.display_name);
    out += " }\n";
  }
  out += "system " + model.name + " = ";
  dsl_detail::write_expr(model.root, out);
  out += '\n';
  return out;
}

}  // namespace rbd
