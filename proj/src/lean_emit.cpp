#include "specforge/lean_emit.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/hash.hpp"
#include "specforge/names.hpp"
#include "specforge/term.hpp"

namespace specforge {

const char* to_string(FormalModule::Kind kind) {
  switch (kind) {
    case FormalModule::Kind::TablesDef: return "TablesDef";
    case FormalModule::Kind::ApiDef: return "ApiDef";
    case FormalModule::Kind::TheoremFile: return "TheoremFile";
    case FormalModule::Kind::Prelude: return "Prelude";
  }
  return "?";
}

std::string with_banner(const std::string& body) {
  return "-- Generated by specforge " SPECFORGE_VERSION ". Content hash: " + sha256_hex(body) + "\n" + body;
}

std::string tables_module_name(const std::string& project) { return project + ".Tables"; }
std::string api_module_name(const std::string& project, const std::string& api) { return project + "." + api; }

std::string module_path(const std::string& moduleName) {
  std::string p = moduleName;
  std::replace(p.begin(), p.end(), '.', '/');
  return p + ".lean";
}

std::string outcome_type(const ir::ApiDef& api, const std::vector<std::string>& tables) {
  std::string s = result_type_name(api.name);
  for (const auto& t : tables) s += " × " + table_type_name(t);
  return s;
}

namespace {

std::string lean_col_type(const ir::Column& c) {
  std::string base = lean_type(TermType::of(c.colType));
  return c.notNull ? base : "Option " + base;
}

std::string pad(int indent) { return std::string(static_cast<std::size_t>(indent) * 2, ' '); }

std::string header(const std::vector<std::string>& imports, const std::string& ns) {
  std::string s;
  for (const auto& i : imports) s += "import " + i + "\n";
  s += "\nnamespace " + ns + "\n\n";
  return s;
}

std::string footer(const std::string& ns) { return "end " + ns + "\n"; }

std::string result_type_decl(const ir::ApiDef& api) {
  const std::string type = result_type_name(api.name);
  std::string s = "inductive " + type + " where\n";
  for (const auto& v : api.resultVariants) {
    s += "  | " + ctor_name(v.name);
    for (const auto& p : v.payload) {
      s += " (" + lean_ident(p.name) + " : " + lean_type(TermType::of(p.colType)) + ")";
    }
    s += "\n";
  }
  s += "  deriving Repr, DecidableEq\n\n";
  s += "def " + type + ".isSuccess : " + type + " → Bool\n";
  for (const auto& v : api.resultVariants) {
    s += "  | ." + ctor_name(v.name);
    for (std::size_t i = 0; i < v.payload.size(); ++i) s += " _";
    s += std::string(" => ") + (v.success ? "true" : "false") + "\n";
  }
  return s;
}

using Seq = std::vector<const ir::Stmt*>;

Seq prepend(const ir::Block& block, const Seq& rest) {
  Seq out;
  for (const auto& s : block) out.push_back(&s);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

class ApiEmitter {
 public:
  ApiEmitter(const ir::Project& project, const ir::ApiDef& api, const DependencyGraph& graph)
      : project_(project), api_(api), graph_(graph), tables_(dependent_tables(graph, api.name)) {}

  std::string emit() {
    std::string s = "def " + api_fn_name(api_.name);
    std::map<std::string, TermPtr> names;
    for (const auto& p : api_.params) {
      s += " (" + lean_ident(p.name) + " : " + lean_type(TermType::of(p.colType)) + ")";
      names[p.name] = term::var(p.name, TermType::of(p.colType));
    }
    for (const auto& t : tables_) {
      s += " (" + ir::state_binder_name(t) + " : " + table_type_name(t) + ")";
    }
    s += " : " + outcome_type(api_, tables_) + " :=\n";
    std::string body;
    walk(prepend(api_.body, {}), names, 1, body);
    return s + body;
  }

 private:
  TermPtr state_var(const std::string& table) const {
    return term::var(ir::state_binder_name(table), TermType::state(table));
  }

  const ir::TableSchema& table(const std::string& name) const {
    const ir::TableSchema* t = project_.find_table(name);
    if (!t) throw EmitError("unknown table " + name);
    return *t;
  }

  TermPtr lower(const ir::ExprPtr& e, const std::map<std::string, TermPtr>& names,
                const ir::TableSchema* rowTable = nullptr) const {
    return lower_expr(*e, names, rowTable, project_);
  }

  void line(std::string& out, int indent, const std::string& text) const { out += pad(indent) + text + "\n"; }

  void walk(const Seq& seq, std::map<std::string, TermPtr> names, int indent, std::string& out) const {
    if (seq.empty()) throw EmitError("control path of " + api_.name + " ends without a Return");
    const ir::Stmt& stmt = *seq.front();
    const Seq rest(seq.begin() + 1, seq.end());
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ir::Stmt::Let>) {
            TermPtr v = lower(x.value, names);
            line(out, indent, "let " + lean_ident(x.name) + " : " + lean_type(v->type) + " := " +
                                  render(v, RenderMode::Value));
            names[x.name] = term::var(x.name, v->type);
            walk(rest, names, indent, out);
          } else if constexpr (std::is_same_v<T, ir::Stmt::If>) {
            line(out, indent, "if " + render(lower(x.cond, names), RenderMode::Prop) + " then");
            walk(prepend(x.thenBranch, rest), names, indent + 1, out);
            line(out, indent, "else");
            walk(prepend(x.elseBranch, rest), names, indent + 1, out);
          } else if constexpr (std::is_same_v<T, ir::Stmt::CallApi>) {
            emit_call(x, rest, names, indent, out);
          } else if constexpr (std::is_same_v<T, ir::Stmt::TableRead>) {
            emit_read(x, names, indent, out);
            walk(rest, names, indent, out);
          } else if constexpr (std::is_same_v<T, ir::Stmt::TableWrite>) {
            emit_write(x, names, indent, out);
            walk(rest, names, indent, out);
          } else if constexpr (std::is_same_v<T, ir::Stmt::Return>) {
            std::vector<TermPtr> payload;
            for (const auto& p : x.payload) payload.push_back(lower(p, names));
            std::vector<TermPtr> states;
            for (const auto& t : tables_) states.push_back(state_var(t));
            TermPtr ret = term::tuple(api_.name, term::ctor(api_, x.variant, payload), states);
            line(out, indent, render(ret, RenderMode::Value));
          }
        },
        stmt.node);
  }

  void emit_call(const ir::Stmt::CallApi& x, const Seq& rest, const std::map<std::string, TermPtr>& names,
                 int indent, std::string& out) const {
    const ir::ApiDef* callee = project_.find_api(x.api);
    if (!callee) throw EmitError("unknown API " + x.api);
    const auto calleeTables = dependent_tables(graph_, callee->name);
    const auto writes = written_tables(graph_, callee->name);
    std::vector<TermPtr> args;
    for (const auto& a : x.args) args.push_back(lower(a, names));
    std::vector<TermPtr> states;
    for (const auto& t : calleeTables) states.push_back(state_var(t));
    TermPtr call = term::call(*callee, args, calleeTables, states);
    line(out, indent, "match " + render(call, RenderMode::Value) + " with");
    for (const auto& arm : x.arms) {
      const ir::ReturnVariant* v = callee->find_variant(arm.variantName);
      if (!v) throw EmitError("unknown variant " + arm.variantName + " of " + callee->name);
      auto armNames = names;
      std::string pat = result_type_name(callee->name) + "." + ctor_name(v->name);
      for (std::size_t i = 0; i < v->payload.size(); ++i) {
        if (i < arm.bindings.size()) {
          pat += " " + lean_ident(arm.bindings[i]);
          armNames[arm.bindings[i]] = term::var(arm.bindings[i], TermType::of(v->payload[i].colType));
        } else {
          pat += " _";
        }
      }
      if (!calleeTables.empty()) {
        pat = "(" + pat;
        for (const auto& t : calleeTables) {
          bool written = std::find(writes.begin(), writes.end(), t) != writes.end();
          pat += ", " + (written ? ir::state_binder_name(t) : std::string("_"));
        }
        pat += ")";
      }
      line(out, indent, "| " + pat + " =>");
      walk(prepend(arm.body, rest), armNames, indent + 1, out);
    }
  }

  void emit_read(const ir::Stmt::TableRead& x, std::map<std::string, TermPtr>& names, int indent,
                 std::string& out) const {
    const ir::TableSchema& schema = table(x.table);
    const std::string predName = x.bind + "Pred";
    if (names.count(predName)) throw EmitError("predicate name " + predName + " collides with a local");
    TermPtr body = lower(x.mode.predicate, names, &schema);
    line(out, indent, "let " + predName + " := fun (row : " + row_type_name(x.table) + ") => " +
                          render(body, RenderMode::Bool));
    TermPtr rows = term::rows(state_var(x.table));
    TermPtr pred = term::pred_ref(predName, x.table);
    const std::string bind = lean_ident(x.bind);
    switch (x.mode.kind) {
      case ir::ReadMode::Kind::Count:
        line(out, indent, "let " + bind + " : Int := " + render(term::length(term::filter(rows, pred)), RenderMode::Value));
        names[x.bind] = term::var(x.bind, TermType::of(ir::ColType::Int));
        break;
      case ir::ReadMode::Kind::SumField:
        line(out, indent, "let " + bind + " : Int := " +
                              render(term::sum_of(term::filter(rows, pred), x.mode.column), RenderMode::Value));
        names[x.bind] = term::var(x.bind, TermType::of(ir::ColType::Int));
        break;
      case ir::ReadMode::Kind::Exists:
        line(out, indent, "let " + bind + " : Bool := " + render(term::any_of(rows, pred), RenderMode::Value));
        names[x.bind] = term::var(x.bind, TermType::of(ir::ColType::Bool));
        break;
      case ir::ReadMode::Kind::Query:
        line(out, indent, "let " + bind + " : List " + row_type_name(x.table) + " := " +
                              render(term::filter(rows, pred), RenderMode::Value));
        names[x.bind] = term::var(x.bind, {TermType::Kind::Rows, x.table});
        break;
    }
  }

  void emit_write(const ir::Stmt::TableWrite& x, const std::map<std::string, TermPtr>& names, int indent,
                  std::string& out) const {
    const ir::TableSchema& schema = table(x.table);
    TermPtr st = state_var(x.table);
    TermPtr next;
    switch (x.op.kind) {
      case ir::WriteOp::Kind::Insert: {
        std::vector<TermPtr> values;
        for (const auto& e : x.op.rowExprs) values.push_back(lower(e, names));
        next = term::insert(st, schema, values);
        break;
      }
      case ir::WriteOp::Kind::Update: {
        std::vector<std::string> cols;
        std::vector<TermPtr> values;
        for (const auto& a : x.op.assignments) {
          cols.push_back(a.column);
          values.push_back(lower(a.value, names, &schema));
        }
        next = term::update(st, term::lambda(x.table, lower(x.op.predicate, names, &schema)), cols, values);
        break;
      }
      case ir::WriteOp::Kind::Delete:
        next = term::delete_(st, term::lambda(x.table, lower(x.op.predicate, names, &schema)));
        break;
    }
    line(out, indent, "let " + ir::state_binder_name(x.table) + " : " + table_type_name(x.table) + " := " +
                          render(next, RenderMode::Value));
  }

  const ir::Project& project_;
  const ir::ApiDef& api_;
  const DependencyGraph& graph_;
  std::vector<std::string> tables_;
};

bool has_module(const std::vector<FormalModule>& emitted, const std::string& name) {
  return std::any_of(emitted.begin(), emitted.end(), [&](const FormalModule& m) { return m.name == name; });
}

std::vector<std::string> direct_callees(const DependencyGraph& graph, const std::string& api) {
  std::vector<std::string> out;
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::ApiApi && e.from == api) out.push_back(e.to);
  }
  // Order callees by topoOrder so imports follow the formalization order.
  std::sort(out.begin(), out.end(), [&](const std::string& a, const std::string& b) {
    auto ia = std::find(graph.topoOrder.begin(), graph.topoOrder.end(), a);
    auto ib = std::find(graph.topoOrder.begin(), graph.topoOrder.end(), b);
    return ia < ib;
  });
  return out;
}

std::string prelude_module_name(const std::string& project) { return project + ".Prelude"; }

}  // namespace

FormalModule emit_table(const ir::TableSchema& schema) {
  std::string s = "structure " + row_type_name(schema.name) + " where\n";
  for (const auto& c : schema.columns) s += "  " + lean_ident(c.name) + " : " + lean_col_type(c) + "\n";
  s += "  deriving Repr, DecidableEq\n\n";
  s += "structure " + table_type_name(schema.name) + " where\n";
  s += "  rows : List " + row_type_name(schema.name) + "\n";
  s += "  deriving Repr, DecidableEq\n";
  FormalModule m;
  m.name = schema.name;
  m.kind = FormalModule::Kind::TablesDef;
  m.sourceText = s;
  return m;
}

FormalModule emit_tables(const ir::Project& project, const DependencyGraph& graph) {
  FormalModule m;
  m.name = tables_module_name(project.name);
  m.kind = FormalModule::Kind::TablesDef;
  m.path = module_path(m.name);
  m.imports = {prelude_module_name(project.name)};
  std::string body = header(m.imports, project.name);
  for (const auto& node : graph.topoOrder) {
    const ir::TableSchema* t = project.find_table(node);
    if (!t) continue;
    body += emit_table(*t).sourceText + "\n";
  }
  body += footer(project.name);
  m.sourceText = with_banner(body);
  return m;
}

FormalModule emit_api(const ir::Project& project, const ir::ApiDef& api, const DependencyGraph& graph,
                      const std::vector<FormalModule>& emitted) {
  FormalModule m;
  m.name = api_module_name(project.name, api.name);
  m.kind = FormalModule::Kind::ApiDef;
  m.path = module_path(m.name);
  m.imports.push_back(tables_module_name(project.name));
  for (const auto& callee : direct_callees(graph, api.name)) m.imports.push_back(api_module_name(project.name, callee));
  for (const auto& i : m.imports) {
    if (!has_module(emitted, i)) throw EmitError("emit_api " + api.name + ": dependency " + i + " not emitted yet");
  }
  std::string body = header(m.imports, project.name);
  body += result_type_decl(api) + "\n";
  body += ApiEmitter(project, api, graph).emit() + "\n";
  body += footer(project.name);
  m.sourceText = with_banner(body);
  return m;
}

LeanProject emit_project(const ir::Project& project, const DependencyGraph& graph, const EmitOptions& options) {
  LeanProject lp;
  lp.name = project.name;
  FormalModule prelude;
  prelude.name = prelude_module_name(project.name);
  prelude.kind = FormalModule::Kind::Prelude;
  prelude.path = module_path(prelude.name);
  prelude.imports = {kPreludePackage};
  prelude.sourceText = with_banner("import " + std::string(kPreludePackage) + "\n");
  lp.modules.push_back(prelude);
  if (!project.tables.empty() || !project.apis.empty()) lp.modules.push_back(emit_tables(project, graph));
  for (const auto& node : graph.topoOrder) {
    const ir::ApiDef* api = project.find_api(node);
    if (!api) continue;
    lp.modules.push_back(emit_api(project, *api, graph, lp.modules));
  }
  std::string root;
  for (const auto& m : lp.modules) root += "import " + m.name + "\n";
  lp.rootModule = with_banner(root);
  lp.lakefile = with_banner("import Lake\nopen Lake DSL\n\npackage " + lean_ident(lower_camel(project.name)) +
                            "\n\nrequire " + kPreludePackage + " from \"" + options.preludePath + "\"\n\n" +
                            "@[default_target]\nlean_lib " + project.name + "\n");
  lp.toolchain = std::string(kLeanToolchain) + "\n";
  return lp;
}

}  // namespace specforge
