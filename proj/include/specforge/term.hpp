#pragma once

// Typed terms over theorem binders. One representation serves three
// consumers: Lean rendering (emitted bodies, hypotheses, conclusions),
// concrete evaluation (oracles), and structural comparison (path pruning).

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "specforge/interpreter.hpp"
#include "specforge/ir.hpp"

namespace specforge {

struct TermType {
  enum class Kind { Int, Bool, Str, Rows, State, Result, Outcome, Pred };
  Kind kind = Kind::Int;
  std::string name;  // table for Rows/State/Pred, API for Result/Outcome

  static TermType of(ir::ColType t);
  static TermType state(std::string table) { return {Kind::State, std::move(table)}; }
  bool operator==(const TermType&) const = default;
};

/// Lean spelling of a binder type, e.g. `Int`, `String`, `AccountTable`.
std::string lean_type(const TermType& type);

struct Term;
using TermPtr = std::shared_ptr<const Term>;

struct Term {
  enum class Kind {
    Var,
    IntLit,
    BoolLit,
    StrLit,
    Not,
    NegInt,
    Bin,
    RowField,   // field of the row bound by the enclosing Lambda
    Rows,       // kids[0].rows
    Filter,     // kids[0] rows filtered by kids[1] (Lambda or PredRef)
    Length,     // (kids[0].length : Int)
    SumOf,      // sum of `name` over rows kids[0]
    AnyOf,      // kids[0] rows, kids[1] predicate
    HeadField,  // field `name` of the first row of kids[0], or the column default
    Insert,     // kids[0] state, kids[1..] one value per column
    Update,     // kids[0] state, kids[1] predicate Lambda, kids[2..] values for `labels`
    Delete,     // kids[0] state, kids[1] predicate Lambda
    Call,       // api `name`; kids = args then states; `arity` = #args; `labels` = table names
    Ctor,       // `name`.`variant` applied to kids
    Tuple,      // kids[0] result, kids[1..] states
    Proj,       // component `index` of an `arity`-tuple kids[0]
    IsSuccess,  // kids[0] result
    PredRef,    // named predicate local
    Lambda,     // fun row => kids[0]; type Pred(table)
  };

  Kind kind = Kind::Var;
  TermType type;
  std::string name;
  std::string variant;
  std::int64_t intValue = 0;
  bool boolValue = false;
  std::string strValue;
  ir::BinOp op = ir::BinOp::Add;
  std::vector<TermPtr> kids;
  std::vector<std::string> labels;  // Insert/Update column names, Call table names
  std::vector<bool> optional;       // Insert: column is nullable
  int index = 0;
  int arity = 0;
};

namespace term {

TermPtr var(std::string name, TermType type);
TermPtr int_lit(std::int64_t v);
TermPtr bool_lit(bool v);
TermPtr str_lit(std::string v);
TermPtr not_(TermPtr t);
TermPtr neg_int(TermPtr t);
TermPtr bin(ir::BinOp op, TermPtr a, TermPtr b);
TermPtr eq(TermPtr a, TermPtr b);
TermPtr row_field(std::string column, ir::ColType type);
TermPtr rows(TermPtr state);
TermPtr filter(TermPtr rows, TermPtr pred);
TermPtr length(TermPtr rows);
TermPtr sum_of(TermPtr rows, std::string column);
TermPtr any_of(TermPtr rows, TermPtr pred);
TermPtr head_field(TermPtr rows, std::string column, ir::ColType type);
TermPtr insert(TermPtr state, const ir::TableSchema& table, std::vector<TermPtr> values);
TermPtr update(TermPtr state, TermPtr pred, std::vector<std::string> columns, std::vector<TermPtr> values);
TermPtr delete_(TermPtr state, TermPtr pred);
TermPtr call(const ir::ApiDef& api, std::vector<TermPtr> args, std::vector<std::string> tables,
             std::vector<TermPtr> states);
TermPtr ctor(const ir::ApiDef& api, std::string variant, std::vector<TermPtr> payload);
TermPtr tuple(const std::string& api, TermPtr result, std::vector<TermPtr> states);
TermPtr proj(TermPtr tuple, int index, int arity);
TermPtr is_success(TermPtr result);
TermPtr pred_ref(std::string name, std::string table);
TermPtr lambda(std::string table, TermPtr body);

}  // namespace term

/// Lowers an IR expression. `names` maps every in-scope IR name to its term
/// (Query binds map to a Rows term); `rowTable` is the table bound to `row`
/// inside a predicate, null elsewhere.
TermPtr lower_expr(const ir::Expr& expr, const std::map<std::string, TermPtr>& names,
                   const ir::TableSchema* rowTable, const ir::Project& project);

bool term_equal(const Term& a, const Term& b);
bool term_equal(const TermPtr& a, const TermPtr& b);

/// Free variable names, first occurrence order.
std::vector<std::string> free_vars(const Term& t);

// ---------------------------------------------------------------------------
// Lean rendering

enum class RenderMode { Prop, Bool, Value };

/// `name` -> `nameResult`, `name.variant` -> lowerCamel constructor.
std::string result_type_name(const std::string& api);
std::string ctor_name(const std::string& variant);
std::string api_fn_name(const std::string& api);
std::string row_type_name(const std::string& table);
std::string table_type_name(const std::string& table);

std::string render(const Term& t, RenderMode mode);
std::string render(const TermPtr& t, RenderMode mode);

/// Renders as an application argument: atoms bare, everything else parenthesized.
std::string render_arg(const TermPtr& t);

/// `.1`, `.2.1`, ..., `.2.2` for component `index` of an `arity`-tuple.
std::string proj_suffix(int index, int arity);

// ---------------------------------------------------------------------------
// Concrete evaluation

struct ResultValue {
  std::string api;
  std::string variant;
  std::vector<Value> payload;
  bool operator==(const ResultValue&) const = default;
};

struct OutcomeValue {
  ResultValue result;
  std::vector<TableState> states;
  bool operator==(const OutcomeValue&) const = default;
};

using RowsValue = std::vector<Row>;
using CValue = std::variant<Value, TableState, RowsValue, ResultValue, OutcomeValue>;

bool operator==(const CValue& a, const CValue& b);
std::string to_string(const CValue& v);

using CEnv = std::map<std::string, CValue>;

/// Evaluates against the implementation held by `interp`. Call terms run the
/// interpreter; the schema comes from the same project. Throws EvalError.
class TermEvaluator {
 public:
  explicit TermEvaluator(const Interpreter& interp) : interp_(interp) {}

  CValue eval(const Term& t, const CEnv& env) const;
  bool eval_bool(const Term& t, const CEnv& env) const;

  /// Matches `pattern` against a concrete value, binding unbound Var leaves in
  /// `env`. Bound subterms are evaluated and compared.
  bool match(const Term& pattern, const CValue& value, CEnv& env) const;

 private:
  CValue eval_in(const Term& t, const CEnv& env, const Row* row, const std::string& rowTable) const;
  bool pred_holds(const Term& pred, const CEnv& env, const Row& row, const std::string& table) const;

  const Interpreter& interp_;
};

}  // namespace specforge
