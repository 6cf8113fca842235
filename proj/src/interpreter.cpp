#include "specforge/interpreter.hpp"

#include "specforge/depgraph.hpp"
#include "specforge/errors.hpp"

namespace specforge {

std::int64_t Value::as_int() const {
  if (auto p = std::get_if<std::int64_t>(&v)) return *p;
  throw EvalError("expected an Int value, got " + to_string(*this));
}

bool Value::as_bool() const {
  if (auto p = std::get_if<bool>(&v)) return *p;
  throw EvalError("expected a Bool value, got " + to_string(*this));
}

const std::string& Value::as_str() const {
  if (auto p = std::get_if<std::string>(&v)) return *p;
  throw EvalError("expected a Str value, got " + to_string(*this));
}

std::string to_string(const Value& value) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "none";
        if constexpr (std::is_same_v<T, std::int64_t>) return std::to_string(x);
        if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        if constexpr (std::is_same_v<T, std::string>) return "\"" + x + "\"";
        return {};
      },
      value.v);
}

Value default_value(ir::ColType type) {
  switch (type) {
    case ir::ColType::Int: return Value(std::int64_t{0});
    case ir::ColType::Bool: return Value(false);
    case ir::ColType::Str: return Value(std::string());
  }
  return {};
}

std::int64_t checked_add(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw EvalError("integer overflow in addition");
  return r;
}

std::int64_t checked_sub(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_sub_overflow(a, b, &r)) throw EvalError("integer overflow in subtraction");
  return r;
}

std::int64_t checked_mul(std::int64_t a, std::int64_t b) {
  std::int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw EvalError("integer overflow in multiplication");
  return r;
}

std::int64_t checked_neg(std::int64_t a) { return checked_sub(0, a); }

namespace {

using ir::BinOp;
using ir::Expr;
using ir::Stmt;

struct RowList {
  std::string table;
  std::vector<Row> rows;
};

using Slot = std::variant<Value, RowList>;

class Machine {
 public:
  Machine(const ir::Project& project, const DependencyGraph& graph) : project_(project), graph_(graph) {}

  Outcome run(const ir::ApiDef& api, const std::vector<Value>& args, const States& initial) {
    if (args.size() != api.params.size()) {
      throw EvalError(api.name + " expects " + std::to_string(api.params.size()) + " arguments, got " +
                      std::to_string(args.size()));
    }
    std::map<std::string, Slot> env;
    for (std::size_t i = 0; i < args.size(); ++i) {
      check_type(args[i], api.params[i].colType, api.name + " argument " + api.params[i].name);
      env[api.params[i].name] = args[i];
    }
    States states;
    for (const auto& t : dependent_tables(graph_, api.name)) {
      auto it = initial.find(t);
      states[t] = it == initial.end() ? TableState{} : it->second;
    }
    std::optional<Outcome> out = exec(api, api.body, env, states);
    if (!out) throw EvalError(api.name + ": control reached the end of the body without a Return");
    return *out;
  }

 private:
  static void check_type(const Value& v, ir::ColType t, const std::string& what) {
    bool ok = (t == ir::ColType::Int && std::holds_alternative<std::int64_t>(v.v)) ||
              (t == ir::ColType::Bool && std::holds_alternative<bool>(v.v)) ||
              (t == ir::ColType::Str && std::holds_alternative<std::string>(v.v));
    if (!ok) throw EvalError(what + " has the wrong type: " + to_string(v));
  }

  const ir::TableSchema& table(const std::string& name) const {
    const ir::TableSchema* t = project_.find_table(name);
    if (!t) throw EvalError("unknown table " + name);
    return *t;
  }

  Value eval(const Expr& e, const std::map<std::string, Slot>& env, const ir::TableSchema* rowTable,
             const Row* row) const {
    return std::visit(
        [&](const auto& x) -> Value {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, Expr::Var>) {
            auto it = env.find(x.name);
            if (it == env.end() || !std::holds_alternative<Value>(it->second)) {
              throw EvalError("unbound scalar " + x.name);
            }
            return std::get<Value>(it->second);
          }
          if constexpr (std::is_same_v<T, Expr::LitInt>) return Value(x.value);
          if constexpr (std::is_same_v<T, Expr::LitBool>) return Value(x.value);
          if constexpr (std::is_same_v<T, Expr::LitStr>) return Value(x.value);
          if constexpr (std::is_same_v<T, Expr::FieldOf>) {
            if (x.rowVar == ir::kRowVar) {
              if (!row || !rowTable) throw EvalError("row used outside a predicate");
              auto idx = rowTable->column_index(x.column);
              if (!idx) throw EvalError("unknown column " + x.column);
              return (*row)[*idx];
            }
            auto it = env.find(x.rowVar);
            if (it == env.end() || !std::holds_alternative<RowList>(it->second)) {
              throw EvalError("unbound row list " + x.rowVar);
            }
            const RowList& list = std::get<RowList>(it->second);
            const ir::TableSchema& t = table(list.table);
            auto idx = t.column_index(x.column);
            if (!idx) throw EvalError("unknown column " + x.column);
            if (list.rows.empty()) return default_value(t.columns[*idx].colType);
            return list.rows.front()[*idx];
          }
          if constexpr (std::is_same_v<T, Expr::Neg>) {
            Value v = eval(*x.operand, env, rowTable, row);
            if (std::holds_alternative<bool>(v.v)) return Value(!v.as_bool());
            return Value(checked_neg(v.as_int()));
          }
          if constexpr (std::is_same_v<T, Expr::Binary>) {
            if (x.op == BinOp::And) {
              return Value(eval(*x.lhs, env, rowTable, row).as_bool() && eval(*x.rhs, env, rowTable, row).as_bool());
            }
            if (x.op == BinOp::Or) {
              return Value(eval(*x.lhs, env, rowTable, row).as_bool() || eval(*x.rhs, env, rowTable, row).as_bool());
            }
            Value a = eval(*x.lhs, env, rowTable, row);
            Value b = eval(*x.rhs, env, rowTable, row);
            switch (x.op) {
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
          }
          throw EvalError("unsupported expression");
        },
        e.node);
  }

  bool matches(const ir::ExprPtr& pred, const std::map<std::string, Slot>& env, const ir::TableSchema& t,
               const Row& row) const {
    return eval(*pred, env, &t, &row).as_bool();
  }

  std::optional<Outcome> exec(const ir::ApiDef& api, const ir::Block& block, std::map<std::string, Slot>& env,
                              States& states) {
    for (const auto& stmt : block) {
      std::optional<Outcome> out = std::visit(
          [&](const auto& s) -> std::optional<Outcome> { return step(api, s, env, states); }, stmt.node);
      if (out) return out;
    }
    return std::nullopt;
  }

  std::optional<Outcome> step(const ir::ApiDef&, const Stmt::Let& s, std::map<std::string, Slot>& env, States&) {
    env[s.name] = eval(*s.value, env, nullptr, nullptr);
    return std::nullopt;
  }

  std::optional<Outcome> step(const ir::ApiDef& api, const Stmt::If& s, std::map<std::string, Slot>& env,
                              States& states) {
    bool cond = eval(*s.cond, env, nullptr, nullptr).as_bool();
    std::map<std::string, Slot> inner = env;
    auto out = exec(api, cond ? s.thenBranch : s.elseBranch, inner, states);
    return out;
  }

  std::optional<Outcome> step(const ir::ApiDef& api, const Stmt::CallApi& s, std::map<std::string, Slot>& env,
                              States& states) {
    const ir::ApiDef* callee = project_.find_api(s.api);
    if (!callee) throw EvalError("unknown API " + s.api);
    std::vector<Value> args;
    for (const auto& a : s.args) args.push_back(eval(*a, env, nullptr, nullptr));
    Outcome result = run(*callee, args, states);
    for (auto& [t, st] : result.states) states[t] = st;
    for (const auto& arm : s.arms) {
      if (arm.variantName != result.variant) continue;
      std::map<std::string, Slot> inner = env;
      for (std::size_t i = 0; i < arm.bindings.size() && i < result.payload.size(); ++i) {
        inner[arm.bindings[i]] = result.payload[i];
      }
      return exec(api, arm.body, inner, states);
    }
    throw EvalError("no arm for variant " + result.variant + " of " + s.api);
  }

  std::optional<Outcome> step(const ir::ApiDef&, const Stmt::TableRead& s, std::map<std::string, Slot>& env,
                              States& states) {
    const ir::TableSchema& t = table(s.table);
    const TableState& st = states[s.table];
    switch (s.mode.kind) {
      case ir::ReadMode::Kind::Query: {
        RowList list{s.table, {}};
        for (const auto& r : st.rows) {
          if (matches(s.mode.predicate, env, t, r)) list.rows.push_back(r);
        }
        env[s.bind] = std::move(list);
        break;
      }
      case ir::ReadMode::Kind::Count: {
        std::int64_t n = 0;
        for (const auto& r : st.rows) {
          if (matches(s.mode.predicate, env, t, r)) ++n;
        }
        env[s.bind] = Value(n);
        break;
      }
      case ir::ReadMode::Kind::SumField: {
        auto idx = t.column_index(s.mode.column);
        std::int64_t sum = 0;
        for (const auto& r : st.rows) {
          if (matches(s.mode.predicate, env, t, r)) sum = checked_add(sum, r[*idx].as_int());
        }
        env[s.bind] = Value(sum);
        break;
      }
      case ir::ReadMode::Kind::Exists: {
        bool any = false;
        for (const auto& r : st.rows) {
          if (matches(s.mode.predicate, env, t, r)) {
            any = true;
            break;
          }
        }
        env[s.bind] = Value(any);
        break;
      }
    }
    return std::nullopt;
  }

  std::optional<Outcome> step(const ir::ApiDef&, const Stmt::TableWrite& s, std::map<std::string, Slot>& env,
                              States& states) {
    const ir::TableSchema& t = table(s.table);
    TableState& st = states[s.table];
    switch (s.op.kind) {
      case ir::WriteOp::Kind::Insert: {
        Row row;
        for (const auto& e : s.op.rowExprs) row.push_back(eval(*e, env, nullptr, nullptr));
        st.rows.push_back(std::move(row));
        break;
      }
      case ir::WriteOp::Kind::Update: {
        for (auto& r : st.rows) {
          if (!matches(s.op.predicate, env, t, r)) continue;
          Row old = r;
          for (const auto& a : s.op.assignments) {
            r[*t.column_index(a.column)] = eval(*a.value, env, &t, &old);
          }
        }
        break;
      }
      case ir::WriteOp::Kind::Delete: {
        std::vector<Row> kept;
        for (const auto& r : st.rows) {
          if (!matches(s.op.predicate, env, t, r)) kept.push_back(r);
        }
        st.rows = std::move(kept);
        break;
      }
    }
    return std::nullopt;
  }

  std::optional<Outcome> step(const ir::ApiDef& api, const Stmt::Return& s, std::map<std::string, Slot>& env,
                              States& states) {
    Outcome out;
    out.variant = s.variant;
    for (const auto& p : s.payload) out.payload.push_back(eval(*p, env, nullptr, nullptr));
    for (const auto& t : dependent_tables(graph_, api.name)) out.states[t] = states[t];
    return out;
  }

  const ir::Project& project_;
  const DependencyGraph& graph_;
};

}  // namespace

Outcome interpret_api(const ir::Project& project, const ir::ApiDef& api, const std::vector<Value>& args,
                      const States& states) {
  DependencyGraph graph = analyze_dependencies(project);
  return Machine(project, graph).run(api, args, states);
}

Outcome interpret_api(const ir::Project& project, const std::string& api, const std::vector<Value>& args,
                      const States& states) {
  const ir::ApiDef* def = project.find_api(api);
  if (!def) throw EvalError("unknown API " + api);
  return interpret_api(project, *def, args, states);
}

struct Interpreter::Impl {
  const ir::Project& project;
  DependencyGraph graph;
};

Interpreter::Interpreter(const ir::Project& project)
    : impl_(std::make_unique<Impl>(Impl{project, analyze_dependencies(project)})) {}
Interpreter::~Interpreter() = default;
Interpreter::Interpreter(Interpreter&&) noexcept = default;

Outcome Interpreter::run(const std::string& api, const std::vector<Value>& args, const States& states) const {
  const ir::ApiDef* def = impl_->project.find_api(api);
  if (!def) throw EvalError("unknown API " + api);
  return Machine(impl_->project, impl_->graph).run(*def, args, states);
}

const ir::Project& Interpreter::project() const { return impl_->project; }

}  // namespace specforge
