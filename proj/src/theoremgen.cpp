#include "specforge/theoremgen.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/names.hpp"

namespace specforge {

const char* to_string(TheoremKind kind) {
  switch (kind) {
    case TheoremKind::ApiPath: return "ApiPath";
    case TheoremKind::TableProp: return "TableProp";
    case TheoremKind::Negation: return "Negation";
  }
  return "?";
}

const char* to_string(TheoremStatus status) {
  switch (status) {
    case TheoremStatus::Unproved: return "Unproved";
    case TheoremStatus::Proved: return "Proved";
    case TheoremStatus::BugFound: return "BugFound";
    case TheoremStatus::Unresolved: return "Unresolved";
  }
  return "?";
}

std::optional<TheoremStatus> theorem_status_from_string(const std::string& text) {
  for (auto s : {TheoremStatus::Unproved, TheoremStatus::Proved, TheoremStatus::BugFound, TheoremStatus::Unresolved}) {
    if (text == to_string(s)) return s;
  }
  return std::nullopt;
}

const char* to_string(TableProperty::Kind kind) {
  switch (kind) {
    case TableProperty::Kind::PreservedAlways: return "PreservedAlways";
    case TableProperty::Kind::CountDeltaOnSuccess: return "CountDeltaOnSuccess";
    case TableProperty::Kind::Custom: return "Custom";
  }
  return "?";
}

TermPtr Premise::proposition() const {
  if (kind == Kind::Branch) return holds ? cond : term::not_(cond);
  return term::eq(call, pattern);
}

// ---------------------------------------------------------------------------
// Path enumeration

namespace {

using Seq = std::vector<const ir::Stmt*>;

Seq prepend(const ir::Block& block, const Seq& rest) {
  Seq out;
  for (const auto& s : block) out.push_back(&s);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

struct SymState {
  std::map<std::string, TermPtr> names;
  std::map<std::string, TermPtr> tables;
  std::vector<Premise> premises;
  std::vector<Binder> binders;
  std::vector<TableWriteEffect> writes;
  bool calleeWrites = false;
};

std::string args_text(const std::vector<ir::ExprPtr>& args) {
  std::string s = "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) s += ", ";
    s += ir::to_text(*args[i]);
  }
  return s + ")";
}

std::string write_phrase(const TableWriteEffect& w) {
  switch (w.kind) {
    case ir::WriteOp::Kind::Insert: return "inserts one row into " + w.table;
    case ir::WriteOp::Kind::Update: return "updates matching rows of " + w.table;
    case ir::WriteOp::Kind::Delete: return "deletes matching rows of " + w.table;
  }
  return {};
}

class PathWalker {
 public:
  PathWalker(const ir::Project& project, const ir::ApiDef& api, const DependencyGraph& graph, std::size_t cap)
      : project_(project), api_(api), graph_(graph), cap_(cap), tables_(dependent_tables(graph, api.name)) {}

  std::vector<Requirement> run() {
    SymState st;
    for (const auto& p : api_.params) st.names[p.name] = term::var(p.name, TermType::of(p.colType));
    for (const auto& t : tables_) st.tables[t] = term::var(ir::state_binder_name(t), TermType::state(t));
    walk(prepend(api_.body, {}), st);
    return std::move(out_);
  }

 private:
  TermPtr lower(const ir::ExprPtr& e, const SymState& st, const ir::TableSchema* rowTable = nullptr) const {
    return lower_expr(*e, st.names, rowTable, project_);
  }

  const ir::TableSchema& table(const std::string& name) const {
    const ir::TableSchema* t = project_.find_table(name);
    if (!t) throw FormalizationFailed("unknown table " + name);
    return *t;
  }

  void walk(const Seq& seq, SymState st) {
    if (seq.empty()) throw FormalizationFailed("control path of " + api_.name + " ends without a Return");
    const ir::Stmt& stmt = *seq.front();
    const Seq rest(seq.begin() + 1, seq.end());
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, ir::Stmt::Let>) {
            st.names[x.name] = lower(x.value, st);
            walk(rest, std::move(st));
          } else if constexpr (std::is_same_v<T, ir::Stmt::If>) {
            branch(x, rest, std::move(st));
          } else if constexpr (std::is_same_v<T, ir::Stmt::CallApi>) {
            call(x, rest, std::move(st));
          } else if constexpr (std::is_same_v<T, ir::Stmt::TableRead>) {
            read(x, st);
            walk(rest, std::move(st));
          } else if constexpr (std::is_same_v<T, ir::Stmt::TableWrite>) {
            write(x, st);
            walk(rest, std::move(st));
          } else if constexpr (std::is_same_v<T, ir::Stmt::Return>) {
            finish(x, st);
          }
        },
        stmt.node);
  }

  void branch(const ir::Stmt::If& x, const Seq& rest, SymState st) {
    TermPtr cond = lower(x.cond, st);
    for (const auto& p : st.premises) {
      if (p.kind == Premise::Kind::Branch && term_equal(p.cond, cond)) {
        walk(prepend(p.holds ? x.thenBranch : x.elseBranch, rest), std::move(st));
        return;
      }
    }
    const std::string text = ir::to_text(*x.cond);
    SymState other = st;
    Premise yes{Premise::Kind::Branch, cond, true, {}, {}, nullptr, nullptr, text};
    st.premises.push_back(yes);
    walk(prepend(x.thenBranch, rest), std::move(st));
    Premise no{Premise::Kind::Branch, cond, false, {}, {}, nullptr, nullptr, "not (" + text + ")"};
    other.premises.push_back(no);
    walk(prepend(x.elseBranch, rest), std::move(other));
  }

  void call(const ir::Stmt::CallApi& x, const Seq& rest, SymState st) {
    const ir::ApiDef* callee = project_.find_api(x.api);
    if (!callee) throw FormalizationFailed("unknown API " + x.api);
    const auto calleeTables = dependent_tables(graph_, callee->name);
    const auto writes = written_tables(graph_, callee->name);
    std::vector<TermPtr> args;
    for (const auto& a : x.args) args.push_back(lower(a, st));
    std::vector<TermPtr> states;
    for (const auto& t : calleeTables) states.push_back(st.tables.at(t));
    TermPtr callTerm = term::call(*callee, args, calleeTables, states);

    for (const auto& p : st.premises) {
      if (p.kind != Premise::Kind::CalleeVariant || !term_equal(p.call, callTerm)) continue;
      for (const auto& arm : x.arms) {
        if (arm.variantName != p.variant) continue;
        SymState next = st;
        const TermPtr& ctor = calleeTables.empty() ? p.pattern : p.pattern->kids[0];
        for (std::size_t i = 0; i < arm.bindings.size() && i < ctor->kids.size(); ++i) {
          next.names[arm.bindings[i]] = ctor->kids[i];
        }
        for (std::size_t i = 0; i < calleeTables.size(); ++i) next.tables[calleeTables[i]] = p.pattern->kids[i + 1];
        walk(prepend(arm.body, rest), std::move(next));
        return;
      }
    }

    for (const auto& arm : x.arms) {
      const ir::ReturnVariant* v = callee->find_variant(arm.variantName);
      if (!v) throw FormalizationFailed("unknown variant " + arm.variantName + " of " + callee->name);
      SymState next = st;
      std::vector<TermPtr> payload;
      std::string text = callee->name + args_text(x.args) + " = " + v->name;
      for (std::size_t i = 0; i < v->payload.size(); ++i) {
        std::string name = i < arm.bindings.size() ? arm.bindings[i] : x.bind + "_" + v->payload[i].name;
        TermType type = TermType::of(v->payload[i].colType);
        TermPtr b = term::var(name, type);
        next.binders.push_back({name, type, Binder::Origin::CalleePayload});
        next.names[name] = b;
        payload.push_back(b);
        text += (i ? ", " : "(") + name;
      }
      if (!v->payload.empty()) text += ")";
      std::vector<TermPtr> outStates;
      for (const auto& t : calleeTables) {
        if (std::find(writes.begin(), writes.end(), t) != writes.end()) {
          std::string name = ir::state_binder_name(t) + "_" + x.bind;
          TermPtr b = term::var(name, TermType::state(t));
          next.binders.push_back({name, TermType::state(t), Binder::Origin::CalleeState});
          next.tables[t] = b;
          next.calleeWrites = true;
          outStates.push_back(b);
        } else {
          outStates.push_back(st.tables.at(t));
        }
      }
      TermPtr pattern = term::tuple(callee->name, term::ctor(*callee, v->name, payload), outStates);
      Premise p;
      p.kind = Premise::Kind::CalleeVariant;
      p.callee = callee->name;
      p.variant = v->name;
      p.call = callTerm;
      p.pattern = pattern;
      p.irText = text;
      next.premises.push_back(p);
      walk(prepend(arm.body, rest), std::move(next));
    }
  }

  void read(const ir::Stmt::TableRead& x, SymState& st) const {
    const ir::TableSchema& schema = table(x.table);
    TermPtr pred = term::lambda(x.table, lower(x.mode.predicate, st, &schema));
    TermPtr rows = term::rows(st.tables.at(x.table));
    switch (x.mode.kind) {
      case ir::ReadMode::Kind::Count: st.names[x.bind] = term::length(term::filter(rows, pred)); break;
      case ir::ReadMode::Kind::SumField: st.names[x.bind] = term::sum_of(term::filter(rows, pred), x.mode.column); break;
      case ir::ReadMode::Kind::Exists: st.names[x.bind] = term::any_of(rows, pred); break;
      case ir::ReadMode::Kind::Query: st.names[x.bind] = term::filter(rows, pred); break;
    }
  }

  void write(const ir::Stmt::TableWrite& x, SymState& st) const {
    const ir::TableSchema& schema = table(x.table);
    TermPtr cur = st.tables.at(x.table);
    TableWriteEffect effect{x.table, x.op.kind, nullptr};
    switch (x.op.kind) {
      case ir::WriteOp::Kind::Insert: {
        std::vector<TermPtr> values;
        for (const auto& e : x.op.rowExprs) values.push_back(lower(e, st));
        st.tables[x.table] = term::insert(cur, schema, values);
        break;
      }
      case ir::WriteOp::Kind::Update: {
        std::vector<std::string> cols;
        std::vector<TermPtr> values;
        for (const auto& a : x.op.assignments) {
          cols.push_back(a.column);
          values.push_back(lower(a.value, st, &schema));
        }
        effect.predicate = term::lambda(x.table, lower(x.op.predicate, st, &schema));
        st.tables[x.table] = term::update(cur, effect.predicate, cols, values);
        break;
      }
      case ir::WriteOp::Kind::Delete:
        effect.predicate = term::lambda(x.table, lower(x.op.predicate, st, &schema));
        st.tables[x.table] = term::delete_(cur, effect.predicate);
        break;
    }
    st.writes.push_back(effect);
  }

  void finish(const ir::Stmt::Return& x, const SymState& st) {
    if (out_.size() >= cap_) {
      throw PathExplosion(api_.name + " has more than " + std::to_string(cap_) + " control paths");
    }
    const ir::ReturnVariant* v = api_.find_variant(x.variant);
    if (!v) throw FormalizationFailed("unknown variant " + x.variant);
    Requirement r;
    r.project = project_.name;
    r.api = api_.name;
    r.pathId = static_cast<int>(out_.size()) + 1;
    r.premises = st.premises;
    r.calleeBinders = st.binders;
    r.outcome.variant = v->name;
    r.outcome.success = v->success;
    for (const auto& p : x.payload) r.outcome.payload.push_back(lower(p, st));
    r.outcome.tables = tables_;
    for (const auto& t : tables_) r.outcome.finalStates.push_back(st.tables.at(t));
    r.outcome.writes = st.writes;
    r.outcome.calleeWrites = st.calleeWrites;

    std::string result = v->name;
    if (!x.payload.empty()) result += args_text(x.payload);
    std::string prose;
    if (r.premises.empty()) {
      prose = api_.name + " always returns " + result;
    } else {
      prose = "When ";
      for (std::size_t i = 0; i < r.premises.size(); ++i) {
        if (i) prose += i + 1 == r.premises.size() ? " and " : ", ";
        prose += r.premises[i].irText;
      }
      prose += ", " + api_.name + " returns " + result;
    }
    if (st.writes.empty()) {
      prose += st.calleeWrites ? "." : " and leaves every table unchanged.";
    } else {
      for (std::size_t i = 0; i < st.writes.size(); ++i) prose += (i ? ", then " : " and ") + write_phrase(st.writes[i]);
      prose += ".";
    }
    r.prose = prose;
    out_.push_back(std::move(r));
  }

  const ir::Project& project_;
  const ir::ApiDef& api_;
  const DependencyGraph& graph_;
  std::size_t cap_;
  std::vector<std::string> tables_;
  std::vector<Requirement> out_;
};

}  // namespace

std::vector<Requirement> enumerate_paths(const ir::Project& project, const ir::ApiDef& api,
                                         const DependencyGraph& graph, const EnumerateOptions& options) {
  return PathWalker(project, api, graph, options.pathCap).run();
}

// ---------------------------------------------------------------------------
// Theorem text

std::string theorem_lean_name(const std::string& id) {
  std::string s = id;
  auto dot = s.find('.');
  if (dot != std::string::npos) s = s.substr(dot + 1);
  std::replace(s.begin(), s.end(), '.', '_');
  return s;
}

namespace {

std::string binder_text(const Binder& b) { return "(" + lean_ident(b.name) + " : " + lean_type(b.type) + ")"; }

std::string hypothesis_block(const TheoremSpec& t) {
  std::string s;
  for (std::size_t i = 0; i < t.hypotheses.size(); ++i) {
    s += "\n    (" + t.hypothesisNames[i] + " : " + render(t.hypotheses[i], RenderMode::Prop) + ")";
  }
  return s;
}

std::string conclusion_text(const TheoremSpec& t) {
  if (t.conclusion) return render(t.conclusion, RenderMode::Prop);
  return t.conclusionText;
}

std::string conjunct(const TermPtr& h) {
  std::string s = render(h, RenderMode::Prop);
  if (h->kind == Term::Kind::Bin && ir::is_logical(h->op)) return "(" + s + ")";
  return s;
}

std::string statement_text(const TheoremSpec& t) {
  std::string s = "theorem " + t.leanName;
  if (t.kind != TheoremKind::Negation) {
    for (const auto& b : t.binders) s += " " + binder_text(b);
    s += hypothesis_block(t);
    s += " :\n    " + conclusion_text(t) + " := by";
    return s;
  }
  s += " :\n    ";
  if (!t.binders.empty()) {
    s += "∃";
    for (const auto& b : t.binders) s += " " + binder_text(b);
    s += ",\n      ";
  }
  for (const auto& h : t.hypotheses) s += conjunct(h) + " ∧\n      ";
  s += "¬(" + render(t.conclusion->kids[0], RenderMode::Prop) + ") := by";
  return s;
}

std::string indent_proof(const std::string& script) {
  std::string out;
  std::istringstream in(script);
  std::string line;
  bool any = false;
  while (std::getline(in, line)) {
    out += line.empty() ? "\n" : "  " + line + "\n";
    any = true;
  }
  if (!any) out = "  sorry\n";
  return out;
}

std::string file_body(const TheoremSpec& t, const std::string& proof) {
  std::string s;
  for (const auto& i : t.imports) s += "import " + i + "\n";
  s += "\nnamespace " + t.project + "\n\n";
  if (!t.prose.empty()) s += "-- " + t.prose + "\n";
  s += t.statement + "\n";
  s += indent_proof(proof);
  s += "\nend " + t.project + "\n";
  return s;
}

void finalize(TheoremSpec& t) {
  t.leanName = theorem_lean_name(t.id);
  t.moduleName = t.project + ".Theorems." + t.leanName;
  t.path = module_path(t.moduleName);
  t.statement = statement_text(t);
  t.sourceText = theorem_file(t, "sorry");
  // Banner line, then the body up to and including the statement.
  std::string head = file_body(t, "");
  head = head.substr(0, head.find(t.statement) + t.statement.size());
  t.proofLineOffset = 3 + static_cast<int>(std::count(head.begin(), head.end(), '\n'));
}

const LeanProject& require_module(const LeanProject& emitted, const std::string& module) {
  for (const auto& m : emitted.modules) {
    if (m.name == module) return emitted;
  }
  throw TemplateError("module " + module + " has not been emitted");
}

std::vector<Binder> signature_binders(const ir::ApiDef& api, const std::vector<std::string>& tables) {
  std::vector<Binder> out;
  for (const auto& p : api.params) out.push_back({p.name, TermType::of(p.colType), Binder::Origin::Param});
  for (const auto& t : tables) out.push_back({ir::state_binder_name(t), TermType::state(t), Binder::Origin::State});
  return out;
}

TermPtr signature_call(const ir::ApiDef& api, const std::vector<std::string>& tables) {
  std::vector<TermPtr> args;
  for (const auto& p : api.params) args.push_back(term::var(p.name, TermType::of(p.colType)));
  std::vector<TermPtr> states;
  for (const auto& t : tables) states.push_back(term::var(ir::state_binder_name(t), TermType::state(t)));
  return term::call(api, args, tables, states);
}

std::vector<std::string> unfold_defs(const ir::Project& project, const ir::ApiDef& api, const DependencyGraph& graph,
                                     bool withSuccess) {
  std::vector<std::string> out = {api_fn_name(api.name)};
  const auto callees = transitive_callees(graph, api.name);
  for (const auto& node : graph.topoOrder) {
    if (callees.count(node) && project.find_api(node)) out.push_back(api_fn_name(node));
  }
  if (withSuccess) out.push_back(result_type_name(api.name) + ".isSuccess");
  return out;
}

std::string service_of(const ir::Project& project, const std::string& api) {
  const ir::ApiDef* a = project.find_api(api);
  return a ? a->service : std::string();
}

}  // namespace

std::string goal_text(const TheoremSpec& t) {
  if (t.kind == TheoremKind::Negation) {
    std::string s = "⊢ ";
    if (!t.binders.empty()) {
      s += "∃";
      for (const auto& b : t.binders) s += " " + lean_ident(b.name);
      s += ", ";
    }
    for (const auto& h : t.hypotheses) s += conjunct(h) + " ∧ ";
    return s + "¬(" + render(t.conclusion->kids[0], RenderMode::Prop) + ")";
  }
  std::string s;
  for (const auto& b : t.binders) s += lean_ident(b.name) + " : " + lean_type(b.type) + "\n";
  for (std::size_t i = 0; i < t.hypotheses.size(); ++i) {
    s += t.hypothesisNames[i] + " : " + render(t.hypotheses[i], RenderMode::Prop) + "\n";
  }
  return s + "⊢ " + conclusion_text(t);
}

std::string theorem_file(const TheoremSpec& spec, const std::string& proofScript) {
  return with_banner(file_body(spec, proofScript));
}

TheoremSpec formalize_api_theorem(const Requirement& req, const ir::Project& project, const DependencyGraph& graph,
                                  const LeanProject& emitted) {
  const ir::ApiDef* api = project.find_api(req.api);
  if (!api) throw TemplateError("unknown API " + req.api);
  const std::string module = api_module_name(project.name, api->name);
  require_module(emitted, module);
  const auto tables = dependent_tables(graph, api->name);
  if (tables != req.outcome.tables) throw TemplateError("requirement tables disagree with the dependency graph");

  TheoremSpec t;
  t.id = project.name + "." + api->name + ".path" + std::to_string(req.pathId);
  t.kind = TheoremKind::ApiPath;
  t.project = project.name;
  t.api = api->name;
  t.service = api->service;
  t.binders = signature_binders(*api, tables);
  for (const auto& b : req.calleeBinders) t.binders.push_back(b);
  for (std::size_t i = 0; i < req.premises.size(); ++i) {
    t.hypotheses.push_back(req.premises[i].proposition());
    t.hypothesisNames.push_back("h" + std::to_string(i + 1));
  }
  TermPtr expected =
      term::tuple(api->name, term::ctor(*api, req.outcome.variant, req.outcome.payload), req.outcome.finalStates);
  t.conclusion = term::eq(signature_call(*api, tables), expected);
  t.prose = req.prose;
  t.imports = {module};
  t.unfoldDefs = unfold_defs(project, *api, graph, false);
  finalize(t);
  return t;
}

// ---------------------------------------------------------------------------
// Table properties

namespace {

enum class RuleClass { None, Preserved, PlusOne, MinusOne };

struct Classification {
  RuleClass kind = RuleClass::None;
  TermPtr deletePredicate;
};

bool within_params(const TermPtr& t, const ir::ApiDef& api) {
  for (const auto& v : free_vars(*t)) {
    bool isParam = std::any_of(api.params.begin(), api.params.end(), [&](const ir::Param& p) { return p.name == v; });
    if (!isParam) return false;
  }
  return true;
}

Classification classify_api(const ir::Project& project, const ir::ApiDef& api, const std::string& table,
                            const DependencyGraph& graph) {
  const auto written = written_tables(graph, api.name);
  if (std::find(written.begin(), written.end(), table) == written.end()) return {RuleClass::Preserved, nullptr};
  std::vector<Requirement> paths;
  try {
    paths = enumerate_paths(project, api, graph);
  } catch (const PathExplosion&) {
    return {};
  }
  std::optional<ir::WriteOp::Kind> successKind;
  TermPtr deletePred;
  bool anySuccess = false;
  for (const auto& r : paths) {
    if (r.outcome.calleeWrites) return {};
    std::vector<TableWriteEffect> mine;
    for (const auto& w : r.outcome.writes) {
      if (w.table == table) mine.push_back(w);
    }
    if (!r.outcome.success) {
      if (!mine.empty()) return {};
      continue;
    }
    anySuccess = true;
    if (mine.size() != 1 || mine[0].kind == ir::WriteOp::Kind::Update) return {};
    if (successKind && *successKind != mine[0].kind) return {};
    successKind = mine[0].kind;
    if (mine[0].kind == ir::WriteOp::Kind::Delete) {
      if (deletePred && !term_equal(deletePred, mine[0].predicate)) return {};
      deletePred = mine[0].predicate;
    }
  }
  if (!anySuccess || !successKind) return {};
  if (*successKind == ir::WriteOp::Kind::Insert) return {RuleClass::PlusOne, nullptr};
  if (!within_params(deletePred, api)) return {};
  return {RuleClass::MinusOne, deletePred};
}

std::vector<const ir::ApiDef*> interacting_apis(const ir::Project& project, const std::string& table,
                                                const DependencyGraph& graph) {
  std::set<std::string> names;
  for (const auto& e : graph.edges) {
    if ((e.kind == EdgeKind::ApiTableRead || e.kind == EdgeKind::ApiTableWrite) && e.to == table) names.insert(e.from);
  }
  std::vector<const ir::ApiDef*> out;
  for (const auto& n : names) out.push_back(project.find_api(n));
  return out;
}

}  // namespace

std::vector<TableProperty> summarize_table_properties(const ir::Project& project, const ir::TableSchema& table,
                                                      const DependencyGraph& graph, Summarizer* summarizer) {
  const auto apis = interacting_apis(project, table.name, graph);
  std::vector<std::string> plus, minus, preserved;
  for (const ir::ApiDef* api : apis) {
    switch (classify_api(project, *api, table.name, graph).kind) {
      case RuleClass::PlusOne: plus.push_back(api->name); break;
      case RuleClass::MinusOne: minus.push_back(api->name); break;
      case RuleClass::Preserved: preserved.push_back(api->name); break;
      case RuleClass::None: break;
    }
  }
  std::vector<TableProperty> out;
  if (!plus.empty()) {
    out.push_back({table.name, "A successful call adds exactly one record to " + table.name + ".",
                   TableProperty::Kind::CountDeltaOnSuccess, +1, plus, TableProperty::Source::RuleBased, {}});
  }
  if (!minus.empty()) {
    out.push_back({table.name,
                   "A successful call removes exactly one record from " + table.name +
                       " when exactly one record matches it.",
                   TableProperty::Kind::CountDeltaOnSuccess, -1, minus, TableProperty::Source::RuleBased, {}});
  }
  if (!preserved.empty()) {
    out.push_back({table.name, "The number of records in " + table.name + " never changes.",
                   TableProperty::Kind::PreservedAlways, 0, preserved, TableProperty::Source::RuleBased, {}});
  }
  if (summarizer) {
    for (auto p : summarizer->summarize(table, apis)) {
      p.source = TableProperty::Source::Summarizer;
      p.kind = TableProperty::Kind::Custom;
      p.table = table.name;
      std::sort(p.apis.begin(), p.apis.end());
      out.push_back(std::move(p));
    }
  }
  return out;
}

TheoremSpec formalize_table_theorem(const TableProperty& prop, int propIndex, const ir::ApiDef& api,
                                    const ir::Project& project, const DependencyGraph& graph,
                                    const LeanProject& emitted) {
  if (std::find(prop.apis.begin(), prop.apis.end(), api.name) == prop.apis.end()) {
    throw TemplateError(api.name + " is not associated with the property of " + prop.table);
  }
  const auto tables = dependent_tables(graph, api.name);
  auto pos = std::find(tables.begin(), tables.end(), prop.table);
  if (pos == tables.end()) {
    throw TemplateError("table " + prop.table + " is not in the signature of " + api.name);
  }
  const std::string module = api_module_name(project.name, api.name);
  require_module(emitted, module);

  TheoremSpec t;
  t.id = project.name + "." + prop.table + ".prop" + std::to_string(propIndex) + "." + api.name;
  t.kind = TheoremKind::TableProp;
  t.project = project.name;
  t.api = api.name;
  t.table = prop.table;
  t.service = service_of(project, api.name);
  t.binders = signature_binders(api, tables);
  t.prose = prop.statement;
  t.imports = {module};
  t.unfoldDefs = unfold_defs(project, api, graph, prop.kind == TableProperty::Kind::CountDeltaOnSuccess);

  const int arity = static_cast<int>(tables.size()) + 1;
  const int index = static_cast<int>(pos - tables.begin()) + 1;
  TermPtr call = signature_call(api, tables);
  TermPtr initial = term::var(ir::state_binder_name(prop.table), TermType::state(prop.table));
  TermPtr before = term::length(term::rows(initial));
  TermPtr after = term::length(term::rows(term::proj(call, index, arity)));
  TermPtr success = term::is_success(term::proj(call, 0, arity));

  switch (prop.kind) {
    case TableProperty::Kind::PreservedAlways: t.conclusion = term::eq(after, before); break;
    case TableProperty::Kind::CountDeltaOnSuccess:
      t.hypotheses.push_back(success);
      t.hypothesisNames.push_back("h_success");
      if (prop.delta > 0) {
        t.conclusion = term::eq(after, term::bin(ir::BinOp::Add, before, term::int_lit(1)));
      } else {
        Classification c = classify_api(project, api, prop.table, graph);
        if (c.kind != RuleClass::MinusOne) throw TemplateError(api.name + " has no single delete on success");
        t.hypotheses.push_back(term::eq(term::length(term::filter(term::rows(initial), c.deletePredicate)),
                                        term::int_lit(1)));
        t.hypothesisNames.push_back("h_single");
        t.conclusion = term::eq(term::bin(ir::BinOp::Add, after, term::int_lit(1)), before);
      }
      break;
    case TableProperty::Kind::Custom:
      if (prop.customProp.empty()) throw TemplateError("custom property without a proposition");
      t.conclusionText = prop.customProp;
      break;
  }
  finalize(t);
  return t;
}

TheoremSpec negate_theorem(const TheoremSpec& t) {
  if (t.kind == TheoremKind::Negation) throw AlreadyNegated(t.id + " is already a negation");
  if (!t.conclusion) throw TemplateError(t.id + " has no structured conclusion to negate");
  TheoremSpec n = t;
  n.id = t.id + ".neg";
  n.kind = TheoremKind::Negation;
  n.negationOf = t.id;
  n.conclusion = term::not_(t.conclusion);
  n.prose = "Counterexample to " + t.id + ": " + t.prose;
  n.status = TheoremStatus::Unproved;
  n.proof.clear();
  finalize(n);
  return n;
}

std::vector<TheoremSpec> generate_theorems(const ir::Project& project, const DependencyGraph& graph,
                                           const LeanProject& emitted, const EnumerateOptions& options) {
  std::vector<TheoremSpec> out;
  for (const auto& node : graph.topoOrder) {
    const ir::ApiDef* api = project.find_api(node);
    if (!api) continue;
    for (const auto& req : enumerate_paths(project, *api, graph, options)) {
      out.push_back(formalize_api_theorem(req, project, graph, emitted));
    }
  }
  for (const auto& node : graph.topoOrder) {
    const ir::TableSchema* table = project.find_table(node);
    if (!table) continue;
    const auto props = summarize_table_properties(project, *table, graph);
    for (std::size_t i = 0; i < props.size(); ++i) {
      for (const auto& apiName : props[i].apis) {
        out.push_back(formalize_table_theorem(props[i], static_cast<int>(i) + 1, *project.find_api(apiName), project,
                                              graph, emitted));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Witness literals

namespace {

std::string scalar_literal(const Value& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::monostate>) return "none";
        if constexpr (std::is_same_v<T, std::int64_t>) return x < 0 ? "(" + std::to_string(x) + ")" : std::to_string(x);
        if constexpr (std::is_same_v<T, bool>) return x ? "true" : "false";
        if constexpr (std::is_same_v<T, std::string>) return lean_string_literal(x);
        return {};
      },
      v.v);
}

}  // namespace

std::string lean_literal(const CValue& value, const TermType& type, const ir::Project& project) {
  if (auto v = std::get_if<Value>(&value)) return scalar_literal(*v);
  if (auto st = std::get_if<TableState>(&value)) {
    const ir::TableSchema* schema = project.find_table(type.name);
    if (!schema) throw EvalError("unknown table " + type.name);
    std::string s = "({ rows := [";
    for (std::size_t i = 0; i < st->rows.size(); ++i) {
      if (i) s += ", ";
      s += "{ ";
      for (std::size_t c = 0; c < schema->columns.size(); ++c) {
        if (c) s += ", ";
        const Value& cell = st->rows[i][c];
        std::string lit = scalar_literal(cell);
        if (!schema->columns[c].notNull && !cell.is_null()) lit = "some " + lit;
        s += lean_ident(schema->columns[c].name) + " := " + lit;
      }
      s += " }";
    }
    return s + "] } : " + table_type_name(type.name) + ")";
  }
  throw EvalError("no Lean literal for " + to_string(value));
}

}  // namespace specforge
