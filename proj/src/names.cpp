#include "specforge/names.hpp"

#include <cctype>
#include <set>

namespace specforge {

std::string lower_camel(const std::string& name) {
  std::string out = name;
  std::size_t i = 0;
  while (i < out.size() && std::isupper(static_cast<unsigned char>(out[i]))) {
    // Keep the last capital of an acronym run when a lowercase letter follows: "URLParser" -> "urlParser".
    bool nextLower = i + 1 < out.size() && std::islower(static_cast<unsigned char>(out[i + 1]));
    if (i > 0 && nextLower) break;
    out[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(out[i])));
    ++i;
  }
  return out;
}

std::string lean_ident(const std::string& name) {
  static const std::set<std::string> keywords = {
      "at",      "by",       "do",     "else",     "end",      "example", "fun",    "have",
      "if",      "import",   "in",     "instance", "let",      "match",   "mutual", "namespace",
      "open",    "section",  "show",   "structure", "then",    "theorem", "where",  "with",
      "def",     "deriving", "from",   "inductive", "variable", "universe", "return", "for",
      "unless",  "try",      "catch",  "finally",  "mut",      "break",   "continue", "calc",
      "exists",  "matches", "Type",    "Prop",     "Sort",   "abbrev",   "class",    "private", "protected", "noncomputable",
  };
  if (keywords.count(name)) return "«" + name + "»";
  return name;
}

std::string lean_string_literal(const std::string& value) {
  std::string out = "\"";
  for (unsigned char c : value) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (c < 0x20) {
          static const char* hex = "0123456789abcdef";
          out += "\\x";
          out.push_back(hex[c >> 4]);
          out.push_back(hex[c & 15]);
        } else {
          out.push_back(static_cast<char>(c));
        }
    }
  }
  out.push_back('"');
  return out;
}

}  // namespace specforge
