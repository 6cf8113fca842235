#include "specforge/term.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/names.hpp"

namespace specforge {

using ir::BinOp;
using Kind = Term::Kind;

TermType TermType::of(ir::ColType t) {
  switch (t) {
    case ir::ColType::Int: return {Kind::Int, {}};
    case ir::ColType::Bool: return {Kind::Bool, {}};
    case ir::ColType::Str: return {Kind::Str, {}};
  }
  return {};
}

std::string result_type_name(const std::string& api) { return api + "Result"; }
std::string ctor_name(const std::string& variant) { return lean_ident(lower_camel(variant)); }
std::string api_fn_name(const std::string& api) { return lean_ident(lower_camel(api)); }
std::string row_type_name(const std::string& table) { return table + "Row"; }
std::string table_type_name(const std::string& table) { return table + "Table"; }

std::string lean_type(const TermType& type) {
  switch (type.kind) {
    case TermType::Kind::Int: return "Int";
    case TermType::Kind::Bool: return "Bool";
    case TermType::Kind::Str: return "String";
    case TermType::Kind::Rows: return "List " + row_type_name(type.name);
    case TermType::Kind::State: return table_type_name(type.name);
    case TermType::Kind::Result: return result_type_name(type.name);
    case TermType::Kind::Outcome: return result_type_name(type.name) + " × ...";
    case TermType::Kind::Pred: return row_type_name(type.name) + " → Bool";
  }
  return "?";
}

namespace term {

namespace {
std::shared_ptr<Term> make(Kind kind, TermType type) {
  auto t = std::make_shared<Term>();
  t->kind = kind;
  t->type = std::move(type);
  return t;
}
const TermType kInt{TermType::Kind::Int, {}};
const TermType kBool{TermType::Kind::Bool, {}};
const TermType kStr{TermType::Kind::Str, {}};
}  // namespace

TermPtr var(std::string name, TermType type) {
  auto t = make(Kind::Var, std::move(type));
  t->name = std::move(name);
  return t;
}
TermPtr int_lit(std::int64_t v) {
  auto t = make(Kind::IntLit, kInt);
  t->intValue = v;
  return t;
}
TermPtr bool_lit(bool v) {
  auto t = make(Kind::BoolLit, kBool);
  t->boolValue = v;
  return t;
}
TermPtr str_lit(std::string v) {
  auto t = make(Kind::StrLit, kStr);
  t->strValue = std::move(v);
  return t;
}
TermPtr not_(TermPtr x) {
  auto t = make(Kind::Not, kBool);
  t->kids = {std::move(x)};
  return t;
}
TermPtr neg_int(TermPtr x) {
  auto t = make(Kind::NegInt, kInt);
  t->kids = {std::move(x)};
  return t;
}
TermPtr bin(BinOp op, TermPtr a, TermPtr b) {
  auto t = make(Kind::Bin, ir::is_arithmetic(op) ? kInt : kBool);
  t->op = op;
  t->kids = {std::move(a), std::move(b)};
  return t;
}
TermPtr eq(TermPtr a, TermPtr b) { return bin(BinOp::Eq, std::move(a), std::move(b)); }
TermPtr row_field(std::string column, ir::ColType type) {
  auto t = make(Kind::RowField, TermType::of(type));
  t->name = std::move(column);
  return t;
}
TermPtr rows(TermPtr state) {
  auto t = make(Kind::Rows, {TermType::Kind::Rows, state->type.name});
  t->kids = {std::move(state)};
  return t;
}
TermPtr filter(TermPtr rowsTerm, TermPtr pred) {
  auto t = make(Kind::Filter, rowsTerm->type);
  t->kids = {std::move(rowsTerm), std::move(pred)};
  return t;
}
TermPtr length(TermPtr rowsTerm) {
  auto t = make(Kind::Length, kInt);
  t->kids = {std::move(rowsTerm)};
  return t;
}
TermPtr sum_of(TermPtr rowsTerm, std::string column) {
  auto t = make(Kind::SumOf, kInt);
  t->name = std::move(column);
  t->kids = {std::move(rowsTerm)};
  return t;
}
TermPtr any_of(TermPtr rowsTerm, TermPtr pred) {
  auto t = make(Kind::AnyOf, kBool);
  t->kids = {std::move(rowsTerm), std::move(pred)};
  return t;
}
TermPtr head_field(TermPtr rowsTerm, std::string column, ir::ColType type) {
  auto t = make(Kind::HeadField, TermType::of(type));
  t->name = std::move(column);
  t->kids = {std::move(rowsTerm)};
  return t;
}
TermPtr insert(TermPtr state, const ir::TableSchema& table, std::vector<TermPtr> values) {
  auto t = make(Kind::Insert, state->type);
  t->kids.push_back(std::move(state));
  for (auto& v : values) t->kids.push_back(std::move(v));
  for (const auto& c : table.columns) {
    t->labels.push_back(c.name);
    t->optional.push_back(!c.notNull);
  }
  return t;
}
TermPtr update(TermPtr state, TermPtr pred, std::vector<std::string> columns, std::vector<TermPtr> values) {
  auto t = make(Kind::Update, state->type);
  t->kids.push_back(std::move(state));
  t->kids.push_back(std::move(pred));
  for (auto& v : values) t->kids.push_back(std::move(v));
  t->labels = std::move(columns);
  return t;
}
TermPtr delete_(TermPtr state, TermPtr pred) {
  auto t = make(Kind::Delete, state->type);
  t->kids = {std::move(state), std::move(pred)};
  return t;
}
TermPtr call(const ir::ApiDef& api, std::vector<TermPtr> args, std::vector<std::string> tables,
             std::vector<TermPtr> states) {
  auto t = make(Kind::Call, {tables.empty() ? TermType::Kind::Result : TermType::Kind::Outcome, api.name});
  t->name = api.name;
  t->arity = static_cast<int>(args.size());
  for (auto& a : args) t->kids.push_back(std::move(a));
  for (auto& s : states) t->kids.push_back(std::move(s));
  t->labels = std::move(tables);
  return t;
}
TermPtr ctor(const ir::ApiDef& api, std::string variant, std::vector<TermPtr> payload) {
  auto t = make(Kind::Ctor, {TermType::Kind::Result, api.name});
  t->name = api.name;
  t->variant = std::move(variant);
  t->kids = std::move(payload);
  return t;
}
TermPtr tuple(const std::string& api, TermPtr result, std::vector<TermPtr> states) {
  if (states.empty()) return result;
  auto t = make(Kind::Tuple, {TermType::Kind::Outcome, api});
  t->kids.push_back(std::move(result));
  for (auto& s : states) t->kids.push_back(std::move(s));
  return t;
}
TermPtr proj(TermPtr tupleTerm, int index, int arity) {
  TermType type;
  if (tupleTerm->kind == Kind::Tuple) {
    type = tupleTerm->kids[index]->type;
  } else if (tupleTerm->kind == Kind::Call) {
    type = index == 0 ? TermType{TermType::Kind::Result, tupleTerm->name} : TermType::state(tupleTerm->labels[index - 1]);
  }
  auto t = make(Kind::Proj, type);
  t->index = index;
  t->arity = arity;
  t->kids = {std::move(tupleTerm)};
  return t;
}
TermPtr is_success(TermPtr result) {
  auto t = make(Kind::IsSuccess, kBool);
  t->kids = {std::move(result)};
  return t;
}
TermPtr pred_ref(std::string name, std::string table) {
  auto t = make(Kind::PredRef, {TermType::Kind::Pred, std::move(table)});
  t->name = std::move(name);
  return t;
}
TermPtr lambda(std::string table, TermPtr body) {
  auto t = make(Kind::Lambda, {TermType::Kind::Pred, std::move(table)});
  t->kids = {std::move(body)};
  return t;
}

}  // namespace term

TermPtr lower_expr(const ir::Expr& expr, const std::map<std::string, TermPtr>& names,
                   const ir::TableSchema* rowTable, const ir::Project& project) {
  using ir::Expr;
  return std::visit(
      [&](const auto& x) -> TermPtr {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) {
          auto it = names.find(x.name);
          if (it == names.end()) throw EmitError("unbound name " + x.name);
          return it->second;
        }
        if constexpr (std::is_same_v<T, Expr::LitInt>) return term::int_lit(x.value);
        if constexpr (std::is_same_v<T, Expr::LitBool>) return term::bool_lit(x.value);
        if constexpr (std::is_same_v<T, Expr::LitStr>) return term::str_lit(x.value);
        if constexpr (std::is_same_v<T, Expr::Binary>) {
          return term::bin(x.op, lower_expr(*x.lhs, names, rowTable, project), lower_expr(*x.rhs, names, rowTable, project));
        }
        if constexpr (std::is_same_v<T, Expr::FieldOf>) {
          if (x.rowVar == ir::kRowVar) {
            if (!rowTable) throw EmitError("row used outside a predicate");
            const ir::Column* c = rowTable->find_column(x.column);
            if (!c) throw EmitError("unknown column " + x.column);
            return term::row_field(x.column, c->colType);
          }
          auto it = names.find(x.rowVar);
          if (it == names.end() || it->second->type.kind != TermType::Kind::Rows) {
            throw EmitError(x.rowVar + " is not a row list");
          }
          const ir::TableSchema* t = project.find_table(it->second->type.name);
          const ir::Column* c = t ? t->find_column(x.column) : nullptr;
          if (!c) throw EmitError("unknown column " + x.column);
          return term::head_field(it->second, x.column, c->colType);
        }
        if constexpr (std::is_same_v<T, Expr::Neg>) {
          TermPtr inner = lower_expr(*x.operand, names, rowTable, project);
          if (inner->type.kind == TermType::Kind::Bool) return term::not_(inner);
          return term::neg_int(inner);
        }
        throw EmitError("unsupported expression");
      },
      expr.node);
}

bool term_equal(const Term& a, const Term& b) {
  if (a.kind != b.kind || a.name != b.name || a.variant != b.variant || a.kids.size() != b.kids.size()) {
    return false;
  }
  switch (a.kind) {
    case Kind::IntLit:
      if (a.intValue != b.intValue) return false;
      break;
    case Kind::BoolLit:
      if (a.boolValue != b.boolValue) return false;
      break;
    case Kind::StrLit:
      if (a.strValue != b.strValue) return false;
      break;
    case Kind::Bin:
      if (a.op != b.op) return false;
      break;
    case Kind::Proj:
      if (a.index != b.index || a.arity != b.arity) return false;
      break;
    default: break;
  }
  if (a.labels != b.labels || !(a.type == b.type)) return false;
  for (std::size_t i = 0; i < a.kids.size(); ++i) {
    if (!term_equal(*a.kids[i], *b.kids[i])) return false;
  }
  return true;
}

bool term_equal(const TermPtr& a, const TermPtr& b) {
  if (!a || !b) return a == b;
  return term_equal(*a, *b);
}

namespace {
void collect_vars(const Term& t, std::vector<std::string>& out, std::set<std::string>& seen) {
  if (t.kind == Kind::Var && seen.insert(t.name).second) out.push_back(t.name);
  for (const auto& k : t.kids) collect_vars(*k, out, seen);
}
}  // namespace

std::vector<std::string> free_vars(const Term& t) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  collect_vars(t, out, seen);
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

std::string proj_suffix(int index, int arity) {
  std::string out;
  for (int i = 0; i < index; ++i) out += ".2";
  if (index < arity - 1) out += ".1";
  return out;
}

namespace {

bool is_atom(const Term& t) {
  switch (t.kind) {
    case Kind::Var:
    case Kind::BoolLit:
    case Kind::StrLit:
    case Kind::RowField:
    case Kind::Rows:
    case Kind::Proj:
    case Kind::PredRef:
    case Kind::Length:
    case Kind::Tuple: return true;
    case Kind::IntLit: return t.intValue >= 0;
    case Kind::Ctor: return t.kids.empty();
    default: return false;
  }
}

std::string default_text(const TermType& type) {
  switch (type.kind) {
    case TermType::Kind::Int: return "0";
    case TermType::Kind::Bool: return "false";
    case TermType::Kind::Str: return "\"\"";
    default: return "default";
  }
}

std::string paren(const std::string& s) { return "(" + s + ")"; }

std::string sub(const TermPtr& t, RenderMode mode) {
  std::string s = render(*t, mode);
  bool propAtom = mode == RenderMode::Prop && t->type.kind == TermType::Kind::Bool && t->kind != Kind::BoolLit;
  return is_atom(*t) && !propAtom ? s : paren(s);
}

const char* prop_op(BinOp op) {
  switch (op) {
    case BinOp::Eq: return "=";
    case BinOp::Ne: return "≠";
    case BinOp::Lt: return "<";
    case BinOp::Le: return "≤";
    case BinOp::Gt: return ">";
    case BinOp::Ge: return "≥";
    case BinOp::And: return "∧";
    case BinOp::Or: return "∨";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Mul: return "*";
  }
  return "?";
}

const char* bool_op(BinOp op) {
  switch (op) {
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
    default: return prop_op(op);
  }
}

std::string render_bin(const Term& t, RenderMode mode) {
  const TermPtr& a = t.kids[0];
  const TermPtr& b = t.kids[1];
  if (ir::is_arithmetic(t.op)) {
    return sub(a, RenderMode::Value) + " " + prop_op(t.op) + " " + sub(b, RenderMode::Value);
  }
  if (ir::is_logical(t.op)) {
    if (mode == RenderMode::Prop) return sub(a, RenderMode::Prop) + " " + prop_op(t.op) + " " + sub(b, RenderMode::Prop);
    return sub(a, RenderMode::Bool) + " " + bool_op(t.op) + " " + sub(b, RenderMode::Bool);
  }
  // Comparison or (in)equality; both operands are values of one type.
  RenderMode operands = a->type.kind == TermType::Kind::Bool ? RenderMode::Bool : RenderMode::Value;
  if (mode == RenderMode::Prop) {
    return sub(a, operands) + " " + prop_op(t.op) + " " + sub(b, operands);
  }
  if (ir::is_comparison(t.op)) {
    return "decide (" + sub(a, operands) + " " + prop_op(t.op) + " " + sub(b, operands) + ")";
  }
  return sub(a, operands) + " " + bool_op(t.op) + " " + sub(b, operands);
}

std::string render_lambda(const Term& t) { return "fun row => " + render(*t.kids[0], RenderMode::Bool); }

std::string render_pred_arg(const TermPtr& p) {
  if (p->kind == Kind::PredRef) return p->name;
  return paren(render_lambda(*p));
}

std::string render_value(const Term& t) {
  switch (t.kind) {
    case Kind::Var: return lean_ident(t.name);
    case Kind::IntLit: return std::to_string(t.intValue);
    case Kind::BoolLit: return t.boolValue ? "true" : "false";
    case Kind::StrLit: return lean_string_literal(t.strValue);
    case Kind::Not: return "!" + sub(t.kids[0], RenderMode::Bool);
    case Kind::NegInt: return "-" + sub(t.kids[0], RenderMode::Value);
    case Kind::Bin: return render_bin(t, RenderMode::Bool);
    case Kind::RowField: return "row." + lean_ident(t.name);
    case Kind::Rows: return render_arg(t.kids[0]) + ".rows";
    case Kind::Filter: return render_arg(t.kids[0]) + ".filter " + render_pred_arg(t.kids[1]);
    case Kind::Length: return "(" + render_arg(t.kids[0]) + ".length : Int)";
    case Kind::SumOf:
      return render_arg(t.kids[0]) + ".foldl (fun acc r => acc + r." + lean_ident(t.name) + ") (0 : Int)";
    case Kind::AnyOf: return render_arg(t.kids[0]) + ".any " + render_pred_arg(t.kids[1]);
    case Kind::HeadField:
      return "(" + render_arg(t.kids[0]) + ".head?.map (fun r => r." + lean_ident(t.name) + ")).getD " +
             default_text(t.type);
    case Kind::Insert: {
      std::string row = "{ ";
      for (std::size_t i = 0; i < t.labels.size(); ++i) {
        if (i) row += ", ";
        std::string v = render(*t.kids[i + 1], RenderMode::Value);
        if (t.optional[i]) v = "some " + render_arg(t.kids[i + 1]);
        row += lean_ident(t.labels[i]) + " := " + v;
      }
      row += " }";
      return "({ rows := " + render_arg(t.kids[0]) + ".rows ++ [(" + row + " : " + row_type_name(t.type.name) +
             ")] } : " + table_type_name(t.type.name) + ")";
    }
    case Kind::Update: {
      std::string with = "{ row with ";
      for (std::size_t i = 0; i < t.labels.size(); ++i) {
        if (i) with += ", ";
        with += lean_ident(t.labels[i]) + " := " + render(*t.kids[i + 2], RenderMode::Value);
      }
      with += " }";
      return "({ rows := " + render_arg(t.kids[0]) + ".rows.map (fun row => if " +
             render(*t.kids[1]->kids[0], RenderMode::Prop) + " then " + with + " else row) } : " +
             table_type_name(t.type.name) + ")";
    }
    case Kind::Delete:
      return "({ rows := " + render_arg(t.kids[0]) + ".rows.filter (fun row => !" +
             sub(t.kids[1]->kids[0], RenderMode::Bool) + ") } : " + table_type_name(t.type.name) + ")";
    case Kind::Call: {
      std::string s = api_fn_name(t.name);
      for (const auto& k : t.kids) s += " " + render_arg(k);
      return s;
    }
    case Kind::Ctor: {
      std::string s = result_type_name(t.name) + "." + ctor_name(t.variant);
      for (const auto& k : t.kids) s += " " + render_arg(k);
      return s;
    }
    case Kind::Tuple: {
      std::string s = "(";
      for (std::size_t i = 0; i < t.kids.size(); ++i) {
        if (i) s += ", ";
        s += render(*t.kids[i], RenderMode::Value);
      }
      return s + ")";
    }
    case Kind::Proj: return render_arg(t.kids[0]) + proj_suffix(t.index, t.arity);
    case Kind::IsSuccess: return render_arg(t.kids[0]) + ".isSuccess";
    case Kind::PredRef: return t.name;
    case Kind::Lambda: return render_lambda(t);
  }
  return "?";
}

}  // namespace

std::string render(const Term& t, RenderMode mode) {
  const bool boolTyped = t.type.kind == TermType::Kind::Bool;
  if (mode == RenderMode::Value && boolTyped) mode = RenderMode::Bool;
  if (mode == RenderMode::Prop && boolTyped) {
    switch (t.kind) {
      case Kind::BoolLit: return t.boolValue ? "True" : "False";
      case Kind::Not: return "¬" + sub(t.kids[0], RenderMode::Prop);
      case Kind::Bin: return render_bin(t, RenderMode::Prop);
      default: return render_value(t) + " = true";
    }
  }
  if (mode == RenderMode::Bool && t.kind == Kind::Bin) return render_bin(t, RenderMode::Bool);
  return render_value(t);
}

std::string render(const TermPtr& t, RenderMode mode) { return render(*t, mode); }

std::string render_arg(const TermPtr& t) {
  std::string s = render(*t, RenderMode::Value);
  return is_atom(*t) ? s : paren(s);
}

// ---------------------------------------------------------------------------
// Evaluation

bool operator==(const CValue& a, const CValue& b) {
  if (a.index() != b.index()) return false;
  return std::visit(
      [&](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        return x == std::get<T>(b);
      },
      a);
}

namespace {
std::string rows_text(const std::vector<Row>& rows) {
  std::string s = "[";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i) s += ", ";
    s += "(";
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      if (j) s += ", ";
      s += to_string(rows[i][j]);
    }
    s += ")";
  }
  return s + "]";
}
std::string result_text(const ResultValue& r) {
  std::string s = r.variant;
  for (const auto& p : r.payload) s += " " + to_string(p);
  return s;
}
}  // namespace

std::string to_string(const CValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Value>) return to_string(x);
        if constexpr (std::is_same_v<T, TableState>) return rows_text(x.rows);
        if constexpr (std::is_same_v<T, RowsValue>) return rows_text(x);
        if constexpr (std::is_same_v<T, ResultValue>) return result_text(x);
        if constexpr (std::is_same_v<T, OutcomeValue>) {
          std::string s = "(" + result_text(x.result);
          for (const auto& st : x.states) s += ", " + rows_text(st.rows);
          return s + ")";
        }
        return {};
      },
      v);
}

namespace {

const Value& as_value(const CValue& v) {
  if (auto p = std::get_if<Value>(&v)) return *p;
  throw EvalError("expected a scalar, got " + to_string(v));
}

const TableState& as_state(const CValue& v) {
  if (auto p = std::get_if<TableState>(&v)) return *p;
  throw EvalError("expected a table state, got " + to_string(v));
}

const RowsValue& as_rows(const CValue& v) {
  if (auto p = std::get_if<RowsValue>(&v)) return *p;
  throw EvalError("expected rows, got " + to_string(v));
}

ResultValue as_result(const CValue& v) {
  if (auto p = std::get_if<ResultValue>(&v)) return *p;
  if (auto p = std::get_if<OutcomeValue>(&v)) return p->result;
  throw EvalError("expected an API result, got " + to_string(v));
}

}  // namespace

CValue TermEvaluator::eval(const Term& t, const CEnv& env) const { return eval_in(t, env, nullptr, {}); }

bool TermEvaluator::eval_bool(const Term& t, const CEnv& env) const { return as_value(eval(t, env)).as_bool(); }

bool TermEvaluator::pred_holds(const Term& pred, const CEnv& env, const Row& row, const std::string& table) const {
  if (pred.kind != Kind::Lambda) throw EvalError("predicate must be a lambda for evaluation");
  return as_value(eval_in(*pred.kids[0], env, &row, table)).as_bool();
}

CValue TermEvaluator::eval_in(const Term& t, const CEnv& env, const Row* row, const std::string& rowTable) const {
  const ir::Project& project = interp_.project();
  auto schema = [&](const std::string& name) -> const ir::TableSchema& {
    const ir::TableSchema* s = project.find_table(name);
    if (!s) throw EvalError("unknown table " + name);
    return *s;
  };
  auto value = [&](const TermPtr& k) { return as_value(eval_in(*k, env, row, rowTable)); };
  switch (t.kind) {
    case Kind::Var: {
      auto it = env.find(t.name);
      if (it == env.end()) throw EvalError("unbound variable " + t.name);
      return it->second;
    }
    case Kind::IntLit: return Value(t.intValue);
    case Kind::BoolLit: return Value(t.boolValue);
    case Kind::StrLit: return Value(t.strValue);
    case Kind::Not: return Value(!value(t.kids[0]).as_bool());
    case Kind::NegInt: return Value(checked_neg(value(t.kids[0]).as_int()));
    case Kind::Bin: {
      if (t.op == BinOp::And) return Value(value(t.kids[0]).as_bool() && value(t.kids[1]).as_bool());
      if (t.op == BinOp::Or) return Value(value(t.kids[0]).as_bool() || value(t.kids[1]).as_bool());
      if (t.op == BinOp::Eq || t.op == BinOp::Ne) {
        const bool eq = eval_in(*t.kids[0], env, row, rowTable) == eval_in(*t.kids[1], env, row, rowTable);
        return Value(t.op == BinOp::Eq ? eq : !eq);
      }
      Value a = value(t.kids[0]);
      Value b = value(t.kids[1]);
      switch (t.op) {
        case BinOp::Add: return Value(checked_add(a.as_int(), b.as_int()));
        case BinOp::Sub: return Value(checked_sub(a.as_int(), b.as_int()));
        case BinOp::Mul: return Value(checked_mul(a.as_int(), b.as_int()));
        case BinOp::Eq: return Value(a == b);
        case BinOp::Ne: return Value(a != b);
        case BinOp::Lt: return Value(a.as_int() < b.as_int());
        case BinOp::Le: return Value(a.as_int() <= b.as_int());
        case BinOp::Gt: return Value(a.as_int() > b.as_int());
        case BinOp::Ge: return Value(a.as_int() >= b.as_int());
        default: break;
      }
      throw EvalError("bad operator");
    }
    case Kind::RowField: {
      if (!row) throw EvalError("row field outside a predicate");
      auto idx = schema(rowTable).column_index(t.name);
      if (!idx) throw EvalError("unknown column " + t.name);
      return (*row)[*idx];
    }
    case Kind::Rows: return RowsValue(as_state(eval_in(*t.kids[0], env, row, rowTable)).rows);
    case Kind::Filter: {
      RowsValue in = as_rows(eval_in(*t.kids[0], env, row, rowTable));
      RowsValue out;
      for (const auto& r : in) {
        if (pred_holds(*t.kids[1], env, r, t.type.name)) out.push_back(r);
      }
      return out;
    }
    case Kind::Length: return Value(static_cast<std::int64_t>(as_rows(eval_in(*t.kids[0], env, row, rowTable)).size()));
    case Kind::SumOf: {
      const RowsValue in = as_rows(eval_in(*t.kids[0], env, row, rowTable));
      auto idx = schema(t.kids[0]->type.name).column_index(t.name);
      if (!idx) throw EvalError("unknown column " + t.name);
      std::int64_t sum = 0;
      for (const auto& r : in) sum = checked_add(sum, r[*idx].as_int());
      return Value(sum);
    }
    case Kind::AnyOf: {
      const RowsValue in = as_rows(eval_in(*t.kids[0], env, row, rowTable));
      for (const auto& r : in) {
        if (pred_holds(*t.kids[1], env, r, t.kids[0]->type.name)) return Value(true);
      }
      return Value(false);
    }
    case Kind::HeadField: {
      const RowsValue in = as_rows(eval_in(*t.kids[0], env, row, rowTable));
      const ir::TableSchema& s = schema(t.kids[0]->type.name);
      auto idx = s.column_index(t.name);
      if (!idx) throw EvalError("unknown column " + t.name);
      if (in.empty()) return default_value(s.columns[*idx].colType);
      return in.front()[*idx];
    }
    case Kind::Insert: {
      TableState st = as_state(eval_in(*t.kids[0], env, row, rowTable));
      Row r;
      for (std::size_t i = 1; i < t.kids.size(); ++i) r.push_back(value(t.kids[i]));
      st.rows.push_back(std::move(r));
      return st;
    }
    case Kind::Update: {
      TableState st = as_state(eval_in(*t.kids[0], env, row, rowTable));
      const ir::TableSchema& s = schema(t.type.name);
      for (auto& r : st.rows) {
        if (!pred_holds(*t.kids[1], env, r, t.type.name)) continue;
        Row old = r;
        for (std::size_t i = 0; i < t.labels.size(); ++i) {
          r[*s.column_index(t.labels[i])] = as_value(eval_in(*t.kids[i + 2], env, &old, t.type.name));
        }
      }
      return st;
    }
    case Kind::Delete: {
      TableState st = as_state(eval_in(*t.kids[0], env, row, rowTable));
      TableState out;
      for (const auto& r : st.rows) {
        if (!pred_holds(*t.kids[1], env, r, t.type.name)) out.rows.push_back(r);
      }
      return out;
    }
    case Kind::Call: {
      std::vector<Value> args;
      for (int i = 0; i < t.arity; ++i) args.push_back(value(t.kids[i]));
      States states;
      for (std::size_t i = 0; i < t.labels.size(); ++i) {
        states[t.labels[i]] = as_state(eval_in(*t.kids[t.arity + i], env, row, rowTable));
      }
      Outcome o = interp_.run(t.name, args, states);
      ResultValue r{t.name, o.variant, o.payload};
      if (t.labels.empty()) return r;
      OutcomeValue out{r, {}};
      for (const auto& name : t.labels) out.states.push_back(o.states.at(name));
      return out;
    }
    case Kind::Ctor: {
      ResultValue r{t.name, t.variant, {}};
      for (const auto& k : t.kids) r.payload.push_back(value(k));
      return r;
    }
    case Kind::Tuple: {
      OutcomeValue out{as_result(eval_in(*t.kids[0], env, row, rowTable)), {}};
      for (std::size_t i = 1; i < t.kids.size(); ++i) {
        out.states.push_back(as_state(eval_in(*t.kids[i], env, row, rowTable)));
      }
      return out;
    }
    case Kind::Proj: {
      CValue v = eval_in(*t.kids[0], env, row, rowTable);
      auto* o = std::get_if<OutcomeValue>(&v);
      if (!o) throw EvalError("projection of a non-tuple");
      if (t.index == 0) return o->result;
      if (static_cast<std::size_t>(t.index) > o->states.size()) throw EvalError("projection out of range");
      return o->states[t.index - 1];
    }
    case Kind::IsSuccess: {
      ResultValue r = as_result(eval_in(*t.kids[0], env, row, rowTable));
      const ir::ApiDef* api = project.find_api(r.api);
      if (!api) throw EvalError("unknown API " + r.api);
      const ir::ReturnVariant* v = api->find_variant(r.variant);
      return Value(v != nullptr && v->success);
    }
    case Kind::PredRef:
    case Kind::Lambda: throw EvalError("a predicate is not a value");
  }
  throw EvalError("unsupported term");
}

bool TermEvaluator::match(const Term& pattern, const CValue& value, CEnv& env) const {
  if (pattern.kind == Kind::Var && !env.count(pattern.name)) {
    env[pattern.name] = value;
    return true;
  }
  if (pattern.kind == Kind::Tuple) {
    auto* o = std::get_if<OutcomeValue>(&value);
    if (!o || o->states.size() + 1 != pattern.kids.size()) return false;
    if (!match(*pattern.kids[0], o->result, env)) return false;
    for (std::size_t i = 1; i < pattern.kids.size(); ++i) {
      if (!match(*pattern.kids[i], o->states[i - 1], env)) return false;
    }
    return true;
  }
  if (pattern.kind == Kind::Ctor) {
    auto* r = std::get_if<ResultValue>(&value);
    if (!r || r->variant != pattern.variant || r->payload.size() != pattern.kids.size()) return false;
    for (std::size_t i = 0; i < pattern.kids.size(); ++i) {
      if (!match(*pattern.kids[i], r->payload[i], env)) return false;
    }
    return true;
  }
  return eval(pattern, env) == value;
}

}  // namespace specforge
