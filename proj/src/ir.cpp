#include "specforge/ir.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/names.hpp"

namespace specforge::ir {

const char* to_string(ColType type) {
  switch (type) {
    case ColType::Int: return "Int";
    case ColType::Bool: return "Bool";
    case ColType::Str: return "Str";
  }
  return "?";
}

std::optional<ColType> col_type_from_string(const std::string& text) {
  if (text == "Int") return ColType::Int;
  if (text == "Bool") return ColType::Bool;
  if (text == "Str" || text == "String") return ColType::Str;
  return std::nullopt;
}

const char* to_string(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "<=";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return ">=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

std::optional<BinOp> bin_op_from_string(const std::string& text) {
  static const std::map<std::string, BinOp> table = {
      {"+", BinOp::Add},  {"-", BinOp::Sub},  {"−", BinOp::Sub},  {"*", BinOp::Mul},
      {"×", BinOp::Mul},  {"=", BinOp::Eq},   {"==", BinOp::Eq},  {"!=", BinOp::Ne},
      {"≠", BinOp::Ne},   {"<", BinOp::Lt},   {"<=", BinOp::Le},  {"≤", BinOp::Le},
      {">", BinOp::Gt},   {">=", BinOp::Ge},  {"≥", BinOp::Ge},   {"&&", BinOp::And},
      {"∧", BinOp::And},  {"and", BinOp::And}, {"||", BinOp::Or}, {"∨", BinOp::Or},
      {"or", BinOp::Or},
  };
  auto it = table.find(text);
  if (it == table.end()) return std::nullopt;
  return it->second;
}

bool is_arithmetic(BinOp op) { return op == BinOp::Add || op == BinOp::Sub || op == BinOp::Mul; }
bool is_comparison(BinOp op) {
  return op == BinOp::Lt || op == BinOp::Le || op == BinOp::Gt || op == BinOp::Ge;
}
bool is_logical(BinOp op) { return op == BinOp::And || op == BinOp::Or; }

const char* to_string(ReadMode::Kind kind) {
  switch (kind) {
    case ReadMode::Kind::Query: return "Query";
    case ReadMode::Kind::Count: return "Count";
    case ReadMode::Kind::SumField: return "SumField";
    case ReadMode::Kind::Exists: return "Exists";
  }
  return "?";
}

const char* to_string(WriteOp::Kind kind) {
  switch (kind) {
    case WriteOp::Kind::Insert: return "Insert";
    case WriteOp::Kind::Update: return "Update";
    case WriteOp::Kind::Delete: return "Delete";
  }
  return "?";
}

ExprPtr var(std::string name) { return std::make_shared<Expr>(Expr{Expr::Var{std::move(name)}}); }
ExprPtr lit(std::int64_t value) { return std::make_shared<Expr>(Expr{Expr::LitInt{value}}); }
ExprPtr lit(bool value) { return std::make_shared<Expr>(Expr{Expr::LitBool{value}}); }
ExprPtr lit_str(std::string value) {
  return std::make_shared<Expr>(Expr{Expr::LitStr{std::move(value)}});
}
ExprPtr binary(BinOp op, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<Expr>(Expr{Expr::Binary{op, std::move(lhs), std::move(rhs)}});
}
ExprPtr field_of(std::string rowVar, std::string column) {
  return std::make_shared<Expr>(Expr{Expr::FieldOf{std::move(rowVar), std::move(column)}});
}
ExprPtr neg(ExprPtr operand) { return std::make_shared<Expr>(Expr{Expr::Neg{std::move(operand)}}); }

bool expr_equal(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, Expr::Var>) return x.name == y.name;
        if constexpr (std::is_same_v<T, Expr::LitInt>) return x.value == y.value;
        if constexpr (std::is_same_v<T, Expr::LitBool>) return x.value == y.value;
        if constexpr (std::is_same_v<T, Expr::LitStr>) return x.value == y.value;
        if constexpr (std::is_same_v<T, Expr::Binary>) {
          return x.op == y.op && expr_equal(*x.lhs, *y.lhs) && expr_equal(*x.rhs, *y.rhs);
        }
        if constexpr (std::is_same_v<T, Expr::FieldOf>) {
          return x.rowVar == y.rowVar && x.column == y.column;
        }
        if constexpr (std::is_same_v<T, Expr::Neg>) return expr_equal(*x.operand, *y.operand);
        return false;
      },
      a.node);
}

namespace {

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

int precedence(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt:
    case BinOp::Le:
    case BinOp::Gt:
    case BinOp::Ge: return 3;
    case BinOp::Add:
    case BinOp::Sub: return 4;
    case BinOp::Mul: return 5;
  }
  return 0;
}

std::string text_at(const Expr& expr, int context) {
  return std::visit(
      [&](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) return x.name;
        if constexpr (std::is_same_v<T, Expr::LitInt>) return std::to_string(x.value);
        if constexpr (std::is_same_v<T, Expr::LitBool>) return x.value ? "true" : "false";
        if constexpr (std::is_same_v<T, Expr::LitStr>) return quote(x.value);
        if constexpr (std::is_same_v<T, Expr::FieldOf>) return x.rowVar + "." + x.column;
        if constexpr (std::is_same_v<T, Expr::Neg>) return "-" + text_at(*x.operand, 6);
        if constexpr (std::is_same_v<T, Expr::Binary>) {
          int p = precedence(x.op);
          std::string s = text_at(*x.lhs, p) + " " + to_string(x.op) + " " + text_at(*x.rhs, p + 1);
          return p < context ? "(" + s + ")" : s;
        }
        return {};
      },
      expr.node);
}

}  // namespace

std::string to_text(const Expr& expr) { return text_at(expr, 0); }

const Column* TableSchema::find_column(const std::string& column) const {
  for (const auto& c : columns) {
    if (c.name == column) return &c;
  }
  return nullptr;
}

std::optional<std::size_t> TableSchema::column_index(const std::string& column) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == column) return i;
  }
  return std::nullopt;
}

const ReturnVariant* ApiDef::find_variant(const std::string& variant) const {
  for (const auto& v : resultVariants) {
    if (v.name == variant) return &v;
  }
  return nullptr;
}

std::optional<std::size_t> ApiDef::variant_index(const std::string& variant) const {
  for (std::size_t i = 0; i < resultVariants.size(); ++i) {
    if (resultVariants[i].name == variant) return i;
  }
  return std::nullopt;
}

const TableSchema* Project::find_table(const std::string& table) const {
  for (const auto& t : tables) {
    if (t.name == table) return &t;
  }
  return nullptr;
}

const ApiDef* Project::find_api(const std::string& api) const {
  for (const auto& a : apis) {
    if (a.name == api) return &a;
  }
  return nullptr;
}

const Service* Project::service_of_table(const std::string& table) const {
  for (const auto& s : services) {
    if (std::find(s.tables.begin(), s.tables.end(), table) != s.tables.end()) return &s;
  }
  return nullptr;
}

std::string Diagnostic::to_string() const {
  std::ostringstream out;
  if (!file.empty()) {
    out << file;
    if (line > 0) out << ":" << line;
    out << ": ";
  }
  out << entity << ": " << message;
  return out.str();
}

std::string state_binder_name(const std::string& table) { return lower_camel(table) + "Table"; }

bool block_terminates(const Block& block) {
  for (const auto& stmt : block) {
    bool terminates = std::visit(
        [](const auto& s) -> bool {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, Stmt::Return>) return true;
          if constexpr (std::is_same_v<T, Stmt::If>) {
            return block_terminates(s.thenBranch) && block_terminates(s.elseBranch);
          }
          if constexpr (std::is_same_v<T, Stmt::CallApi>) {
            if (s.arms.empty()) return false;
            return std::all_of(s.arms.begin(), s.arms.end(),
                               [](const Stmt::Arm& arm) { return block_terminates(arm.body); });
          }
          return false;
        },
        stmt.node);
    if (terminates) return true;
  }
  return false;
}

// ---------------------------------------------------------------------------
// Type checking

namespace {

struct VarInfo {
  enum class Kind { Scalar, Rows, CallResult };
  Kind kind = Kind::Scalar;
  ColType type = ColType::Int;
  std::string table;  // Rows
};

using Scope = std::map<std::string, VarInfo>;

class ApiChecker {
 public:
  ApiChecker(const Project& project, const ApiDef& api) : project_(project), api_(api) {
    for (const auto& t : project.tables) reserved_.insert(state_binder_name(t.name));
    for (const auto& a : project.apis) reserved_.insert(lower_camel(a.name));
    reserved_.insert(kRowVar);
  }

  std::vector<Diagnostic> run() {
    if (api_.name.empty()) error(0, "API name is empty");
    if (!project_.find_api(api_.name) && !api_.service.empty()) {
      // formalize_source checks an API that is not yet part of the project.
    }
    Scope scope;
    std::set<std::string> paramNames;
    for (const auto& p : api_.params) {
      if (!paramNames.insert(p.name).second) error(0, "duplicate parameter '" + p.name + "'");
      check_name(0, p.name, "parameter");
      scope[p.name] = VarInfo{VarInfo::Kind::Scalar, p.colType, {}};
    }
    check_variants();
    std::set<std::string> declared;
    for (const auto& [name, info] : scope) declared.insert(name);
    check_block(api_.body, scope, declared, "body");
    if (!block_terminates(api_.body)) error(0, "missing Return on some control path of the body");
    return std::move(diags_);
  }

 private:
  void error(int line, const std::string& message) {
    diags_.push_back(Diagnostic{"api " + api_.name, api_.sourceFile, line, message});
  }

  void check_name(int line, const std::string& name, const char* what) {
    if (name.empty()) {
      error(line, std::string(what) + " name is empty");
      return;
    }
    if (reserved_.count(name)) {
      error(line, std::string(what) + " name '" + name + "' is reserved");
    }
  }

  void check_variants() {
    std::set<std::string> names;
    bool anySuccess = false;
    if (api_.resultVariants.empty()) error(0, "no result variants declared");
    for (const auto& v : api_.resultVariants) {
      if (v.name.empty()) error(0, "result variant with empty name");
      if (!names.insert(v.name).second) error(0, "duplicate result variant '" + v.name + "'");
      anySuccess = anySuccess || v.success;
      std::set<std::string> fields;
      for (const auto& f : v.payload) {
        if (!fields.insert(f.name).second) {
          error(0, "variant '" + v.name + "' has duplicate payload field '" + f.name + "'");
        }
      }
    }
    if (!api_.resultVariants.empty() && !anySuccess) {
      error(0, "no result variant is flagged success");
    }
  }

  void declare(int line, const std::string& name, VarInfo info, Scope& scope,
               std::set<std::string>& declared, const char* what) {
    check_name(line, name, what);
    if (declared.count(name)) {
      error(line, std::string(what) + " '" + name + "' redeclares a name already bound on this path");
    }
    declared.insert(name);
    scope[name] = std::move(info);
  }

  std::optional<ColType> check_expr(const Expr& expr, const Scope& scope, const TableSchema* rowTable,
                                    int line) {
    return std::visit(
        [&](const auto& x) -> std::optional<ColType> {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Expr::Var>) {
            if (x.name == kRowVar) {
              error(line, "the row variable can only be used through a field access");
              return std::nullopt;
            }
            auto it = scope.find(x.name);
            if (it == scope.end()) {
              error(line, "unknown name '" + x.name + "'");
              return std::nullopt;
            }
            if (it->second.kind != VarInfo::Kind::Scalar) {
              error(line, "'" + x.name + "' is not a scalar value");
              return std::nullopt;
            }
            return it->second.type;
          }
          if constexpr (std::is_same_v<T, Expr::LitInt>) return ColType::Int;
          if constexpr (std::is_same_v<T, Expr::LitBool>) return ColType::Bool;
          if constexpr (std::is_same_v<T, Expr::LitStr>) return ColType::Str;
          if constexpr (std::is_same_v<T, Expr::FieldOf>) {
            const TableSchema* table = nullptr;
            if (x.rowVar == kRowVar) {
              if (rowTable == nullptr) {
                error(line, "row variable used outside a table predicate");
                return std::nullopt;
              }
              table = rowTable;
            } else {
              auto it = scope.find(x.rowVar);
              if (it == scope.end() || it->second.kind != VarInfo::Kind::Rows) {
                error(line, "'" + x.rowVar + "' is not a row list bound by a Query read");
                return std::nullopt;
              }
              table = project_.find_table(it->second.table);
              if (table == nullptr) return std::nullopt;
            }
            const Column* col = table->find_column(x.column);
            if (col == nullptr) {
              error(line, "unknown column '" + x.column + "' in table " + table->name);
              return std::nullopt;
            }
            if (!col->notNull) {
              error(line, "nullable column '" + x.column + "' of table " + table->name +
                              " cannot be read in an expression");
              return std::nullopt;
            }
            return col->colType;
          }
          if constexpr (std::is_same_v<T, Expr::Neg>) {
            auto t = check_expr(*x.operand, scope, rowTable, line);
            if (t && *t == ColType::Str) {
              error(line, "negation of a Str value");
              return std::nullopt;
            }
            return t;
          }
          if constexpr (std::is_same_v<T, Expr::Binary>) {
            auto lt = check_expr(*x.lhs, scope, rowTable, line);
            auto rt = check_expr(*x.rhs, scope, rowTable, line);
            if (!lt || !rt) return std::nullopt;
            std::string op = to_string(x.op);
            if (is_arithmetic(x.op) || is_comparison(x.op)) {
              if (*lt != ColType::Int || *rt != ColType::Int) {
                error(line, "operator '" + op + "' requires Int operands, got " + to_string(*lt) +
                                " and " + to_string(*rt));
                return std::nullopt;
              }
              return is_arithmetic(x.op) ? ColType::Int : ColType::Bool;
            }
            if (is_logical(x.op)) {
              if (*lt != ColType::Bool || *rt != ColType::Bool) {
                error(line, "operator '" + op + "' requires Bool operands, got " + to_string(*lt) +
                                " and " + to_string(*rt));
                return std::nullopt;
              }
              return ColType::Bool;
            }
            if (*lt != *rt) {
              error(line, "operator '" + op + "' compares " + to_string(*lt) + " with " +
                              to_string(*rt));
              return std::nullopt;
            }
            return ColType::Bool;
          }
          return std::nullopt;
        },
        expr.node);
  }

  void expect(const ExprPtr& expr, ColType want, const Scope& scope, const TableSchema* rowTable,
              int line, const std::string& what) {
    if (!expr) {
      error(line, what + " is missing");
      return;
    }
    auto got = check_expr(*expr, scope, rowTable, line);
    if (got && *got != want) {
      error(line, what + " must be " + to_string(want) + ", got " + to_string(*got));
    }
  }

  // Returns the names declared anywhere inside `block`.
  void check_block(const Block& block, Scope scope, std::set<std::string>& declared,
                   const std::string& where) {
    bool terminated = false;
    for (std::size_t i = 0; i < block.size(); ++i) {
      const Stmt& stmt = block[i];
      if (terminated) {
        error(stmt.line, "unreachable statement after a terminating statement in " + where);
        break;
      }
      std::visit([&](const auto& s) { check_stmt(s, stmt.line, scope, declared, where); }, stmt.node);
      terminated = block_terminates(Block{stmt});
    }
  }

  void check_stmt(const Stmt::Let& s, int line, Scope& scope, std::set<std::string>& declared,
                  const std::string&) {
    std::optional<ColType> type;
    if (!s.value) {
      error(line, "let '" + s.name + "' has no value");
    } else {
      type = check_expr(*s.value, scope, nullptr, line);
    }
    declare(line, s.name, VarInfo{VarInfo::Kind::Scalar, type.value_or(ColType::Int), {}}, scope,
            declared, "let");
  }

  void check_stmt(const Stmt::If& s, int line, Scope& scope, std::set<std::string>& declared,
                  const std::string& where) {
    expect(s.cond, ColType::Bool, scope, nullptr, line, "if condition");
    std::set<std::string> thenDeclared = declared;
    std::set<std::string> elseDeclared = declared;
    check_block(s.thenBranch, scope, thenDeclared, where + ".thenBranch");
    check_block(s.elseBranch, scope, elseDeclared, where + ".elseBranch");
    declared.insert(thenDeclared.begin(), thenDeclared.end());
    declared.insert(elseDeclared.begin(), elseDeclared.end());
  }

  void check_stmt(const Stmt::CallApi& s, int line, Scope& scope, std::set<std::string>& declared,
                  const std::string& where) {
    const ApiDef* callee = project_.find_api(s.api);
    if (callee == nullptr) {
      error(line, "call to unknown API '" + s.api + "'");
    } else if (callee->name == api_.name) {
      error(line, "API calls itself");
      callee = nullptr;
    }
    if (callee != nullptr) {
      if (s.args.size() != callee->params.size()) {
        error(line, "call to " + s.api + " passes " + std::to_string(s.args.size()) +
                        " arguments, expected " + std::to_string(callee->params.size()));
      }
      for (std::size_t i = 0; i < s.args.size() && i < callee->params.size(); ++i) {
        expect(s.args[i], callee->params[i].colType, scope, nullptr, line,
               "argument '" + callee->params[i].name + "' of " + s.api);
      }
    } else {
      for (const auto& a : s.args) {
        if (a) check_expr(*a, scope, nullptr, line);
      }
    }
    declare(line, s.bind, VarInfo{VarInfo::Kind::CallResult, ColType::Int, {}}, scope, declared,
            "call binding");

    std::set<std::string> covered;
    std::set<std::string> armDeclaredAll = declared;
    for (const auto& arm : s.arms) {
      Scope armScope = scope;
      std::set<std::string> armDeclared = declared;
      const ReturnVariant* variant = callee ? callee->find_variant(arm.variantName) : nullptr;
      if (callee && variant == nullptr) {
        error(line, "arm '" + arm.variantName + "' is not a variant of " + s.api);
      }
      if (!covered.insert(arm.variantName).second) {
        error(line, "duplicate arm '" + arm.variantName + "' in call to " + s.api);
      }
      if (variant && arm.bindings.size() != variant->payload.size()) {
        error(line, "arm '" + arm.variantName + "' binds " + std::to_string(arm.bindings.size()) +
                        " values, variant carries " + std::to_string(variant->payload.size()));
      }
      for (std::size_t i = 0; i < arm.bindings.size(); ++i) {
        ColType t = (variant && i < variant->payload.size()) ? variant->payload[i].colType : ColType::Int;
        declare(line, arm.bindings[i], VarInfo{VarInfo::Kind::Scalar, t, {}}, armScope, armDeclared,
                "arm binding");
      }
      check_block(arm.body, armScope, armDeclared, where + ".arm(" + arm.variantName + ")");
      armDeclaredAll.insert(armDeclared.begin(), armDeclared.end());
    }
    if (callee) {
      for (const auto& v : callee->resultVariants) {
        if (!covered.count(v.name)) {
          error(line, "call to " + s.api + " does not handle variant '" + v.name + "'");
        }
      }
    }
    declared = std::move(armDeclaredAll);
  }

  void check_stmt(const Stmt::TableRead& s, int line, Scope& scope, std::set<std::string>& declared,
                  const std::string&) {
    const TableSchema* table = project_.find_table(s.table);
    VarInfo info;
    if (table == nullptr) {
      error(line, "read of unknown table '" + s.table + "'");
    } else {
      expect(s.mode.predicate, ColType::Bool, scope, table, line, "predicate");
      if (s.mode.kind == ReadMode::Kind::SumField) {
        const Column* col = table->find_column(s.mode.column);
        if (col == nullptr) {
          error(line, "unknown column '" + s.mode.column + "' in table " + table->name);
        } else if (col->colType != ColType::Int || !col->notNull) {
          error(line, "SumField column '" + s.mode.column + "' must be a non-null Int");
        }
      }
    }
    switch (s.mode.kind) {
      case ReadMode::Kind::Query: info = VarInfo{VarInfo::Kind::Rows, ColType::Int, s.table}; break;
      case ReadMode::Kind::Count:
      case ReadMode::Kind::SumField: info = VarInfo{VarInfo::Kind::Scalar, ColType::Int, {}}; break;
      case ReadMode::Kind::Exists: info = VarInfo{VarInfo::Kind::Scalar, ColType::Bool, {}}; break;
    }
    declare(line, s.bind, info, scope, declared, "read binding");
  }

  void check_stmt(const Stmt::TableWrite& s, int line, Scope& scope, std::set<std::string>&,
                  const std::string&) {
    const TableSchema* table = project_.find_table(s.table);
    if (table == nullptr) {
      error(line, "write to unknown table '" + s.table + "'");
      return;
    }
    switch (s.op.kind) {
      case WriteOp::Kind::Insert:
        if (s.op.rowExprs.size() != table->columns.size()) {
          error(line, "insert into " + s.table + " supplies " + std::to_string(s.op.rowExprs.size()) +
                          " values, table has " + std::to_string(table->columns.size()) + " columns");
        }
        for (std::size_t i = 0; i < s.op.rowExprs.size() && i < table->columns.size(); ++i) {
          expect(s.op.rowExprs[i], table->columns[i].colType, scope, nullptr, line,
                 "value for column '" + table->columns[i].name + "'");
        }
        break;
      case WriteOp::Kind::Update: {
        expect(s.op.predicate, ColType::Bool, scope, table, line, "predicate");
        std::set<std::string> seen;
        if (s.op.assignments.empty()) error(line, "update of " + s.table + " assigns nothing");
        for (const auto& a : s.op.assignments) {
          const Column* col = table->find_column(a.column);
          if (col == nullptr) {
            error(line, "unknown column '" + a.column + "' in table " + table->name);
            continue;
          }
          if (!seen.insert(a.column).second) error(line, "column '" + a.column + "' assigned twice");
          expect(a.value, col->colType, scope, table, line, "value for column '" + a.column + "'");
        }
        break;
      }
      case WriteOp::Kind::Delete:
        expect(s.op.predicate, ColType::Bool, scope, table, line, "predicate");
        break;
    }
  }

  void check_stmt(const Stmt::Return& s, int line, Scope& scope, std::set<std::string>&,
                  const std::string&) {
    const ReturnVariant* variant = api_.find_variant(s.variant);
    if (variant == nullptr) {
      error(line, "return of undeclared variant '" + s.variant + "'");
      for (const auto& p : s.payload) {
        if (p) check_expr(*p, scope, nullptr, line);
      }
      return;
    }
    if (s.payload.size() != variant->payload.size()) {
      error(line, "return " + s.variant + " carries " + std::to_string(s.payload.size()) +
                      " values, variant declares " + std::to_string(variant->payload.size()));
    }
    for (std::size_t i = 0; i < s.payload.size() && i < variant->payload.size(); ++i) {
      expect(s.payload[i], variant->payload[i].colType, scope, nullptr, line,
             "payload '" + variant->payload[i].name + "' of " + s.variant);
    }
  }

  const Project& project_;
  const ApiDef& api_;
  std::set<std::string> reserved_;
  std::vector<Diagnostic> diags_;
};

void check_table(const Project& project, const TableSchema& table, std::vector<Diagnostic>& out) {
  auto err = [&](const std::string& msg) { out.push_back(Diagnostic{"table " + table.name, {}, 0, msg}); };
  if (table.name.empty()) err("table name is empty");
  if (table.columns.empty()) err("table has no columns");
  std::set<std::string> names;
  for (const auto& c : table.columns) {
    if (c.name.empty()) err("column with empty name");
    if (!names.insert(c.name).second) err("duplicate column '" + c.name + "'");
    if (c.foreignKey) {
      const TableSchema* target = project.find_table(c.foreignKey->table);
      if (target == nullptr) {
        err("column '" + c.name + "' references unknown table '" + c.foreignKey->table + "'");
      } else {
        const Column* tc = target->find_column(c.foreignKey->column);
        if (tc == nullptr) {
          err("column '" + c.name + "' references unknown column '" + c.foreignKey->table + "." +
              c.foreignKey->column + "'");
        } else if (tc->colType != c.colType) {
          err("column '" + c.name + "' has type " + to_string(c.colType) + " but references " +
              c.foreignKey->table + "." + c.foreignKey->column + " of type " + to_string(tc->colType));
        }
      }
    }
  }
  for (const auto& pk : table.primaryKey) {
    if (!names.count(pk)) err("primary key column '" + pk + "' is not a column");
  }
}

}  // namespace

std::vector<Diagnostic> type_check_api(const Project& project, const ApiDef& api) {
  return ApiChecker(project, api).run();
}

std::vector<Diagnostic> validate_project(const Project& project) {
  std::vector<Diagnostic> out;
  auto err = [&](const std::string& entity, const std::string& msg) {
    out.push_back(Diagnostic{entity, {}, 0, msg});
  };
  std::set<std::string> services, tables, apis;
  for (const auto& s : project.services) {
    if (s.name.empty()) err("project " + project.name, "service with empty name");
    if (!services.insert(s.name).second) err("service " + s.name, "duplicate service name");
  }
  for (const auto& t : project.tables) {
    if (!tables.insert(t.name).second) err("table " + t.name, "duplicate table name");
  }
  for (const auto& a : project.apis) {
    if (!apis.insert(a.name).second) err("api " + a.name, "duplicate API name");
    if (tables.count(a.name)) err("api " + a.name, "API name collides with a table name");
  }
  std::set<std::string> ownedTables, ownedApis;
  for (const auto& s : project.services) {
    for (const auto& t : s.tables) {
      if (!tables.count(t)) err("service " + s.name, "lists unknown table '" + t + "'");
      if (!ownedTables.insert(t).second) err("table " + t, "owned by more than one service");
    }
    for (const auto& a : s.apis) {
      if (!apis.count(a)) err("service " + s.name, "lists unknown API '" + a + "'");
      if (!ownedApis.insert(a).second) err("api " + a, "owned by more than one service");
    }
  }
  for (const auto& t : project.tables) {
    if (!ownedTables.count(t.name)) err("table " + t.name, "not owned by any service");
    check_table(project, t, out);
  }
  for (const auto& a : project.apis) {
    const bool known = std::any_of(project.services.begin(), project.services.end(),
                                   [&](const Service& s) { return s.name == a.service; });
    if (!known) err("api " + a.name, "unknown service '" + a.service + "'");
    auto diags = type_check_api(project, a);
    out.insert(out.end(), diags.begin(), diags.end());
  }
  return out;
}

void ensure_valid(const Project& project) {
  auto diags = validate_project(project);
  if (diags.empty()) return;
  std::string msg = "project " + project.name + " failed validation:";
  for (const auto& d : diags) msg += "\n  " + d.to_string();
  throw ValidationError(msg);
}

}  // namespace specforge::ir
