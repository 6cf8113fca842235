#pragma once

#include <string>

namespace specforge {

/// `Withdrawal` -> `withdrawal`, `BalanceQuery` -> `balanceQuery`,
/// `InsufficientBalance` -> `insufficientBalance`.
std::string lower_camel(const std::string& name);

/// Lean identifier for an IR name; keywords are wrapped in guillemets.
std::string lean_ident(const std::string& name);

std::string lean_string_literal(const std::string& value);

}  // namespace specforge
