#include "specforge/expr_parser.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <vector>

namespace specforge::ir {
namespace {

struct Token {
  enum class Kind { Ident, Int, Str, Sym, End } kind;
  std::string text;
  std::size_t offset;
};

bool ident_start(unsigned char c) { return std::isalpha(c) || c == '_'; }
bool ident_char(unsigned char c) { return std::isalnum(c) || c == '_' || c == '\''; }

std::vector<Token> tokenize(std::string_view s) {
  static const char* symbols[] = {"==", "!=", "<=", ">=", "&&", "||", "≠", "≤", "≥", "∧", "∨", "¬",
                                  "−",  "×",  "(",  ")",  ".",  "+",  "-",  "*", "=", "<", ">", "!"};
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isspace(c)) {
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Kind::Ident, std::string(s.substr(i, j - i)), i});
      i = j;
      continue;
    }
    if (std::isdigit(c)) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      out.push_back({Token::Kind::Int, std::string(s.substr(i, j - i)), i});
      i = j;
      continue;
    }
    if (c == '"') {
      std::string value;
      std::size_t j = i + 1;
      bool closed = false;
      while (j < s.size()) {
        char d = s[j];
        if (d == '\\' && j + 1 < s.size()) {
          char e = s[j + 1];
          value.push_back(e == 'n' ? '\n' : e == 't' ? '\t' : e);
          j += 2;
          continue;
        }
        if (d == '"') {
          closed = true;
          ++j;
          break;
        }
        value.push_back(d);
        ++j;
      }
      if (!closed) throw ExprSyntaxError("unterminated string literal", i);
      out.push_back({Token::Kind::Str, value, i});
      i = j;
      continue;
    }
    bool matched = false;
    for (const char* sym : symbols) {
      std::string_view sv(sym);
      if (s.substr(i, sv.size()) == sv) {
        out.push_back({Token::Kind::Sym, std::string(sv), i});
        i += sv.size();
        matched = true;
        break;
      }
    }
    if (!matched) throw ExprSyntaxError("unexpected character '" + std::string(1, s[i]) + "'", i);
  }
  out.push_back({Token::Kind::End, "", s.size()});
  return out;
}

class Parser {
 public:
  explicit Parser(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

  ExprPtr parse() {
    ExprPtr e = parse_binary(1);
    if (peek().kind != Token::Kind::End) {
      throw ExprSyntaxError("unexpected '" + peek().text + "'", peek().offset);
    }
    return e;
  }

 private:
  const Token& peek() const { return tokens_[pos_]; }
  const Token& next() { return tokens_[pos_++]; }

  std::optional<BinOp> peek_op() const {
    const Token& t = peek();
    if (t.kind == Token::Kind::Sym || (t.kind == Token::Kind::Ident && (t.text == "and" || t.text == "or"))) {
      if (t.text == "!" || t.text == "¬" || t.text == "(" || t.text == ")" || t.text == ".") return std::nullopt;
      return bin_op_from_string(t.text);
    }
    return std::nullopt;
  }

  static int precedence(BinOp op) {
    if (op == BinOp::Or) return 1;
    if (op == BinOp::And) return 2;
    if (is_arithmetic(op)) return op == BinOp::Mul ? 5 : 4;
    return 3;
  }

  ExprPtr parse_binary(int minPrec) {
    ExprPtr lhs = parse_unary();
    while (true) {
      auto op = peek_op();
      if (!op) break;
      int p = precedence(*op);
      if (p < minPrec) break;
      next();
      ExprPtr rhs = parse_binary(p + 1);
      lhs = binary(*op, lhs, rhs);
      if (p == 3) {
        auto chained = peek_op();
        if (chained && precedence(*chained) == 3) {
          throw ExprSyntaxError("comparison operators do not chain", peek().offset);
        }
      }
    }
    return lhs;
  }

  ExprPtr parse_unary() {
    const Token& t = peek();
    if (t.kind == Token::Kind::Sym && (t.text == "-" || t.text == "−")) {
      next();
      if (peek().kind == Token::Kind::Int) {
        return lit(parse_int(next(), true));
      }
      return neg(parse_unary());
    }
    if ((t.kind == Token::Kind::Sym && (t.text == "!" || t.text == "¬")) ||
        (t.kind == Token::Kind::Ident && t.text == "not")) {
      next();
      return neg(parse_unary());
    }
    return parse_primary();
  }

  static std::int64_t parse_int(const Token& t, bool negative) {
    std::string digits = negative ? "-" + t.text : t.text;
    std::int64_t value = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
    if (ec != std::errc() || ptr != digits.data() + digits.size()) {
      throw ExprSyntaxError("integer literal out of range: " + digits, t.offset);
    }
    return value;
  }

  ExprPtr parse_primary() {
    const Token& t = next();
    switch (t.kind) {
      case Token::Kind::Int: return lit(parse_int(t, false));
      case Token::Kind::Str: return lit_str(t.text);
      case Token::Kind::Ident: {
        if (t.text == "true") return lit(true);
        if (t.text == "false") return lit(false);
        if (t.text == "and" || t.text == "or" || t.text == "not") {
          throw ExprSyntaxError("unexpected '" + t.text + "'", t.offset);
        }
        if (peek().kind == Token::Kind::Sym && peek().text == ".") {
          next();
          const Token& col = next();
          if (col.kind != Token::Kind::Ident) throw ExprSyntaxError("expected column name after '.'", col.offset);
          return field_of(t.text, col.text);
        }
        return var(t.text);
      }
      case Token::Kind::Sym:
        if (t.text == "(") {
          ExprPtr e = parse_binary(1);
          const Token& close = next();
          if (close.kind != Token::Kind::Sym || close.text != ")") {
            throw ExprSyntaxError("expected ')'", close.offset);
          }
          return e;
        }
        throw ExprSyntaxError("unexpected '" + t.text + "'", t.offset);
      case Token::Kind::End: throw ExprSyntaxError("unexpected end of expression", t.offset);
    }
    throw ExprSyntaxError("unexpected token", t.offset);
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
};

}  // namespace

ExprPtr parse_expr_text(std::string_view text) { return Parser(tokenize(text)).parse(); }

}  // namespace specforge::ir
