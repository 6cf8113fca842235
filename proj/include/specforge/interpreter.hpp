#pragma once

// Reference semantics of the IR. Used as the oracle for emitted code,
// requirements and theorem truth.

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specforge/ir.hpp"

namespace specforge {

/// A column or parameter value. `std::monostate` is the missing value of a
/// nullable column.
struct Value {
  std::variant<std::monostate, std::int64_t, bool, std::string> v;

  Value() = default;
  Value(std::int64_t i) : v(i) {}
  Value(int i) : v(static_cast<std::int64_t>(i)) {}
  Value(bool b) : v(b) {}
  Value(std::string s) : v(std::move(s)) {}
  Value(const char* s) : v(std::string(s)) {}

  bool is_null() const { return std::holds_alternative<std::monostate>(v); }
  std::int64_t as_int() const;
  bool as_bool() const;
  const std::string& as_str() const;

  auto operator<=>(const Value&) const = default;
};

std::string to_string(const Value& value);

using Row = std::vector<Value>;

struct TableState {
  std::vector<Row> rows;
  auto operator<=>(const TableState&) const = default;
};

using States = std::map<std::string, TableState>;

struct Outcome {
  std::string variant;
  std::vector<Value> payload;
  States states;  // every dependent table of the API, updated

  bool operator==(const Outcome&) const = default;
};

Value default_value(ir::ColType type);

/// Executes `api` against argument values (in parameter order) and the
/// initial states of its dependent tables. Missing tables default to empty.
/// Throws EvalError on argument/type mismatch or integer overflow.
Outcome interpret_api(const ir::Project& project, const ir::ApiDef& api, const std::vector<Value>& args,
                      const States& states);

Outcome interpret_api(const ir::Project& project, const std::string& api, const std::vector<Value>& args,
                      const States& states);

/// Same semantics as interpret_api with the dependency analysis done once.
/// The project must outlive the interpreter.
class Interpreter {
 public:
  explicit Interpreter(const ir::Project& project);
  ~Interpreter();
  Interpreter(Interpreter&&) noexcept;

  Outcome run(const std::string& api, const std::vector<Value>& args, const States& states) const;
  const ir::Project& project() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::int64_t checked_add(std::int64_t a, std::int64_t b);
std::int64_t checked_sub(std::int64_t a, std::int64_t b);
std::int64_t checked_mul(std::int64_t a, std::int64_t b);
std::int64_t checked_neg(std::int64_t a);

}  // namespace specforge
