#include "specforge/oracle.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "specforge/depgraph.hpp"
#include "specforge/errors.hpp"

namespace specforge {

namespace {

void collect_expr(const ir::Expr& e, std::set<std::int64_t>& ints, std::set<std::string>& strs) {
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, ir::Expr::LitInt>) ints.insert(x.value);
        if constexpr (std::is_same_v<T, ir::Expr::LitStr>) strs.insert(x.value);
        if constexpr (std::is_same_v<T, ir::Expr::Binary>) {
          collect_expr(*x.lhs, ints, strs);
          collect_expr(*x.rhs, ints, strs);
        }
        if constexpr (std::is_same_v<T, ir::Expr::Neg>) collect_expr(*x.operand, ints, strs);
      },
      e.node);
}

void collect_block(const ir::Block& b, std::set<std::int64_t>& ints, std::set<std::string>& strs) {
  auto ex = [&](const ir::ExprPtr& e) {
    if (e) collect_expr(*e, ints, strs);
  };
  for (const auto& s : b) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ir::Stmt::Let>) ex(x.value);
          if constexpr (std::is_same_v<T, ir::Stmt::If>) {
            ex(x.cond);
            collect_block(x.thenBranch, ints, strs);
            collect_block(x.elseBranch, ints, strs);
          }
          if constexpr (std::is_same_v<T, ir::Stmt::CallApi>) {
            for (const auto& a : x.args) ex(a);
            for (const auto& arm : x.arms) collect_block(arm.body, ints, strs);
          }
          if constexpr (std::is_same_v<T, ir::Stmt::TableRead>) ex(x.mode.predicate);
          if constexpr (std::is_same_v<T, ir::Stmt::TableWrite>) {
            for (const auto& r : x.op.rowExprs) ex(r);
            ex(x.op.predicate);
            for (const auto& a : x.op.assignments) ex(a.value);
          }
          if constexpr (std::is_same_v<T, ir::Stmt::Return>) {
            for (const auto& p : x.payload) ex(p);
          }
        },
        s.node);
  }
}

std::size_t cost(const CValue& v) {
  if (auto s = std::get_if<Value>(&v)) {
    if (auto i = std::get_if<std::int64_t>(&s->v)) {
      std::int64_t a = *i < 0 ? -*i : *i;
      return static_cast<std::size_t>(std::min<std::int64_t>(a, 1000000000)) * 2 + (*i < 0 ? 1 : 0);
    }
    if (auto str = std::get_if<std::string>(&s->v)) return str->size();
    return 0;
  }
  if (auto st = std::get_if<TableState>(&v)) {
    std::size_t c = st->rows.size() * 1000;
    for (const auto& r : st->rows) {
      for (const auto& cell : r) c += cost(cell);
    }
    return c;
  }
  return 0;
}

}  // namespace

Domains literal_domains(const ir::Project& project, const std::vector<std::string>& apis) {
  std::set<std::int64_t> lits;
  std::set<std::string> strs = {"", "a", "b"};
  DependencyGraph graph = analyze_dependencies(project);
  std::set<std::string> all(apis.begin(), apis.end());
  for (const auto& a : apis) {
    for (const auto& c : transitive_callees(graph, a)) all.insert(c);
  }
  for (const auto& name : all) {
    if (const ir::ApiDef* api = project.find_api(name)) collect_block(api->body, lits, strs);
  }
  std::set<std::int64_t> ints = {-1, 0, 1, 2};
  for (auto l : lits) {
    for (std::int64_t d = -1; d <= 1; ++d) {
      if ((d < 0 && l == INT64_MIN) || (d > 0 && l == INT64_MAX)) continue;
      ints.insert(l + d);
    }
  }
  return {{ints.begin(), ints.end()}, {strs.begin(), strs.end()}, 3};
}

AssignmentSampler::AssignmentSampler(const ir::Project& project, Domains domains, std::uint64_t seed)
    : project_(project), domains_(std::move(domains)), rng_(seed) {}

Value AssignmentSampler::value(ir::ColType type) {
  switch (type) {
    case ir::ColType::Int: {
      std::uniform_int_distribution<std::size_t> d(0, domains_.ints.size() - 1);
      return Value(domains_.ints[d(rng_)]);
    }
    case ir::ColType::Bool: return Value(std::uniform_int_distribution<int>(0, 1)(rng_) == 1);
    case ir::ColType::Str: {
      std::uniform_int_distribution<std::size_t> d(0, domains_.strs.size() - 1);
      return Value(domains_.strs[d(rng_)]);
    }
  }
  return {};
}

TableState AssignmentSampler::state(const ir::TableSchema& schema, const std::vector<Value>& pool) {
  TableState st;
  const int n = std::uniform_int_distribution<int>(0, std::max(0, domains_.maxRows))(rng_);
  for (int i = 0; i < n; ++i) {
    Row row;
    for (const auto& c : schema.columns) {
      if (!c.notNull && std::uniform_int_distribution<int>(0, 3)(rng_) == 0) {
        row.push_back(Value());
        continue;
      }
      std::vector<const Value*> same;
      for (const auto& v : pool) {
        bool match = (c.colType == ir::ColType::Int && std::holds_alternative<std::int64_t>(v.v)) ||
                     (c.colType == ir::ColType::Bool && std::holds_alternative<bool>(v.v)) ||
                     (c.colType == ir::ColType::Str && std::holds_alternative<std::string>(v.v));
        if (match) same.push_back(&v);
      }
      if (!same.empty() && std::uniform_int_distribution<int>(0, 1)(rng_) == 0) {
        row.push_back(*same[std::uniform_int_distribution<std::size_t>(0, same.size() - 1)(rng_)]);
      } else {
        row.push_back(value(c.colType));
      }
    }
    st.rows.push_back(std::move(row));
  }
  return st;
}

CEnv AssignmentSampler::sample(const std::vector<Binder>& binders) {
  CEnv env;
  std::vector<Value> pool;
  for (const auto& b : binders) {
    if (b.origin != Binder::Origin::Param) continue;
    ir::ColType t = b.type.kind == TermType::Kind::Bool  ? ir::ColType::Bool
                    : b.type.kind == TermType::Kind::Str ? ir::ColType::Str
                                                         : ir::ColType::Int;
    Value v = value(t);
    pool.push_back(v);
    env[b.name] = v;
  }
  for (const auto& b : binders) {
    if (b.origin != Binder::Origin::State) continue;
    const ir::TableSchema* s = project_.find_table(b.type.name);
    if (!s) throw EvalError("unknown table " + b.type.name);
    env[b.name] = state(*s, pool);
  }
  return env;
}

bool hypotheses_hold(const TermEvaluator& eval, const std::vector<TermPtr>& hyps, CEnv& env) {
  for (const auto& h : hyps) {
    if (h->kind == Term::Kind::Bin && h->op == ir::BinOp::Eq && h->kids[0]->kind == Term::Kind::Call) {
      const auto vars = free_vars(*h->kids[1]);
      bool unbound = std::any_of(vars.begin(), vars.end(), [&](const std::string& v) { return !env.count(v); });
      if (unbound) {
        if (!eval.match(*h->kids[1], eval.eval(*h->kids[0], env), env)) return false;
        continue;
      }
    }
    if (!eval.eval_bool(*h, env)) return false;
  }
  return true;
}

BoundedVerdict bounded_check(const Interpreter& impl, const TheoremSpec& theorem, const BoundedOptions& options) {
  BoundedVerdict verdict;
  if (!theorem.conclusion || theorem.kind == TheoremKind::Negation) {
    verdict.checkable = false;
    verdict.holds = false;
    return verdict;
  }
  const ir::Project& project = impl.project();
  AssignmentSampler sampler(project, literal_domains(project, {theorem.api}), options.seed);
  TermEvaluator eval(impl);
  std::size_t best = SIZE_MAX;
  for (std::size_t i = 0; i < options.samples; ++i) {
    CEnv env = sampler.sample(theorem.binders);
    ++verdict.samples;
    try {
      if (!hypotheses_hold(eval, theorem.hypotheses, env)) continue;
      ++verdict.satisfying;
      if (eval.eval_bool(*theorem.conclusion, env)) continue;
    } catch (const EvalError&) {
      ++verdict.evalErrors;
      continue;
    }
    verdict.holds = false;
    std::size_t c = 0;
    for (const auto& [_, v] : env) c += cost(v);
    if (c < best) {
      best = c;
      verdict.counterexample = env;
    }
  }
  if (verdict.satisfying == 0) verdict.checkable = false;
  return verdict;
}

std::string witness_proof(const TheoremSpec& negation, const CEnv& witness, const ir::Project& project) {
  if (negation.binders.empty()) return "decide";
  std::string s = "exact ⟨";
  for (const auto& b : negation.binders) {
    auto it = witness.find(b.name);
    if (it == witness.end()) throw EvalError("witness lacks binder " + b.name);
    s += lean_literal(it->second, b.type, project) + ", ";
  }
  s += "by decide⟩";
  return s;
}

}  // namespace specforge
