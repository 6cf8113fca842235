#pragma once

#include <stdexcept>
#include <string_view>

#include "specforge/ir.hpp"

namespace specforge::ir {

class ExprSyntaxError : public std::runtime_error {
 public:
  ExprSyntaxError(const std::string& message, std::size_t offset)
      : std::runtime_error(message), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Parses the infix shorthand accepted wherever a bundle expects an Expr,
/// e.g. `row.userId = userId && amount > 0`. Both ASCII and the usual
/// Unicode operator spellings are accepted; `!`, `not`, `¬` and prefix `-`
/// produce Neg, except that `-` directly before an integer literal folds
/// into the literal.
ExprPtr parse_expr_text(std::string_view text);

}  // namespace specforge::ir
