#pragma once

// Backend system description: services, column-typed tables, and APIs as
// branching statement lists that terminate in declared result variants.
// Values are immutable once a Project is validated and are safe to share
// across threads.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace specforge::ir {

enum class ColType { Int, Bool, Str };

const char* to_string(ColType type);
std::optional<ColType> col_type_from_string(const std::string& text);

struct ForeignKey {
  std::string table;
  std::string column;
  bool operator==(const ForeignKey&) const = default;
};

struct Column {
  std::string name;
  ColType colType = ColType::Int;
  std::optional<ForeignKey> foreignKey;
  bool unique = false;
  bool notNull = true;
  bool operator==(const Column&) const = default;
};

struct TableSchema {
  std::string name;
  std::vector<Column> columns;
  std::vector<std::string> primaryKey;

  const Column* find_column(const std::string& column) const;
  std::optional<std::size_t> column_index(const std::string& column) const;
  bool operator==(const TableSchema&) const = default;
};

struct Param {
  std::string name;
  ColType colType = ColType::Int;
  bool operator==(const Param&) const = default;
};

struct ReturnVariant {
  std::string name;
  std::vector<Param> payload;
  bool success = false;
  bool operator==(const ReturnVariant&) const = default;
};

// ---------------------------------------------------------------------------
// Expressions

enum class BinOp { Add, Sub, Mul, Eq, Ne, Lt, Le, Gt, Ge, And, Or };

const char* to_string(BinOp op);
std::optional<BinOp> bin_op_from_string(const std::string& text);
bool is_arithmetic(BinOp op);
bool is_comparison(BinOp op);
bool is_logical(BinOp op);

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  struct Var {
    std::string name;
  };
  struct LitInt {
    std::int64_t value;
  };
  struct LitBool {
    bool value;
  };
  struct LitStr {
    std::string value;
  };
  struct Binary {
    BinOp op;
    ExprPtr lhs;
    ExprPtr rhs;
  };
  /// `rowVar` is either the predicate-scoped `row` or a Query-bound row list
  /// (in which case the field of the first matching row is meant).
  struct FieldOf {
    std::string rowVar;
    std::string column;
  };
  /// Arithmetic negation on Int, logical negation on Bool.
  struct Neg {
    ExprPtr operand;
  };

  std::variant<Var, LitInt, LitBool, LitStr, Binary, FieldOf, Neg> node;
};

inline constexpr const char* kRowVar = "row";

ExprPtr var(std::string name);
ExprPtr lit(std::int64_t value);
ExprPtr lit(bool value);
ExprPtr lit_str(std::string value);
ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs);
ExprPtr field_of(std::string rowVar, std::string column);
ExprPtr neg(ExprPtr operand);

bool expr_equal(const Expr& a, const Expr& b);

/// Infix rendering in the IR's own surface syntax (`row.userId = userId`).
std::string to_text(const Expr& expr);

// ---------------------------------------------------------------------------
// Statements

struct ReadMode {
  enum class Kind { Query, Count, SumField, Exists };
  Kind kind = Kind::Count;
  ExprPtr predicate;
  std::string column;  // SumField only
};

struct Assignment {
  std::string column;
  ExprPtr value;
};

struct WriteOp {
  enum class Kind { Insert, Update, Delete };
  Kind kind = Kind::Insert;
  std::vector<ExprPtr> rowExprs;         // Insert: one per column, schema order
  ExprPtr predicate;                     // Update / Delete
  std::vector<Assignment> assignments;   // Update
};

const char* to_string(ReadMode::Kind kind);
const char* to_string(WriteOp::Kind kind);

struct Stmt;
using Block = std::vector<Stmt>;

struct Stmt {
  struct Let {
    std::string name;
    ExprPtr value;
  };
  struct If {
    ExprPtr cond;
    Block thenBranch;
    Block elseBranch;
  };
  struct Arm {
    std::string variantName;
    std::vector<std::string> bindings;
    Block body;
  };
  struct CallApi {
    std::string bind;
    std::string api;
    std::vector<ExprPtr> args;
    std::vector<Arm> arms;
  };
  struct TableRead {
    std::string bind;
    std::string table;
    ReadMode mode;
  };
  struct TableWrite {
    std::string table;
    WriteOp op;
  };
  struct Return {
    std::string variant;
    std::vector<ExprPtr> payload;
  };

  std::variant<Let, If, CallApi, TableRead, TableWrite, Return> node;
  int line = 0;  // source line in the bundle file, 0 if synthesized
};

struct ApiDef {
  std::string name;
  std::string service;
  std::vector<Param> params;
  std::vector<ReturnVariant> resultVariants;
  Block body;
  std::string docText;
  std::string sourceFile;  // bundle-relative, for diagnostics

  const ReturnVariant* find_variant(const std::string& variant) const;
  std::optional<std::size_t> variant_index(const std::string& variant) const;
};

struct Service {
  std::string name;
  std::vector<std::string> tables;  // table names owned by the service
  std::vector<std::string> apis;    // api names owned by the service
};

/// A validated project. Tables and APIs are stored flat; services keep the
/// ownership lists in declaration order.
struct Project {
  std::string name;
  std::vector<Service> services;
  std::vector<TableSchema> tables;
  std::vector<ApiDef> apis;
  std::optional<std::string> docsDir;

  const TableSchema* find_table(const std::string& table) const;
  const ApiDef* find_api(const std::string& api) const;
  const Service* service_of_table(const std::string& table) const;
};

// ---------------------------------------------------------------------------
// Validation

struct Diagnostic {
  std::string entity;   // e.g. "api Withdrawal", "table Account"
  std::string file;
  int line = 0;
  std::string message;

  std::string to_string() const;
};

/// Checks every Stmt/Expr invariant of one API against the project's tables
/// and APIs. Empty result means the API is well-formed.
std::vector<Diagnostic> type_check_api(const Project& project, const ApiDef& api);

/// Project-wide checks (name uniqueness, table schemas, foreign keys,
/// services) plus type_check_api for every API.
std::vector<Diagnostic> validate_project(const Project& project);

/// Throws ValidationError listing every diagnostic when validation fails.
void ensure_valid(const Project& project);

/// True iff every control path through `block` ends in exactly one Return.
bool block_terminates(const Block& block);

/// Names no API may use for params or bindings (reserved for the emitted
/// table-state binders and the row variable).
std::string state_binder_name(const std::string& table);

}  // namespace specforge::ir
