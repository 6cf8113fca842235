#include "specforge/bundle.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>

#include "specforge/errors.hpp"
#include "specforge/expr_parser.hpp"

namespace fs = std::filesystem;

namespace specforge::ir {
namespace {

int line_of(const YAML::Node& node) {
  auto mark = node.Mark();
  return mark.line >= 0 ? mark.line + 1 : 0;
}

class Reader {
 public:
  explicit Reader(std::string file) : file_(std::move(file)) {}

  [[noreturn]] void fail(const YAML::Node& at, const std::string& detail) const {
    throw ParseError(file_, at ? line_of(at) : 0, detail);
  }

  YAML::Node load(const std::string& text) const {
    try {
      return YAML::Load(text);
    } catch (const YAML::Exception& e) {
      throw ParseError(file_, e.mark.line >= 0 ? e.mark.line + 1 : 0, e.msg);
    }
  }

  YAML::Node require(const YAML::Node& map, const char* key) const {
    if (!map.IsMap()) fail(map, "expected an object");
    YAML::Node v = map[key];
    if (!v) fail(map, std::string("missing field '") + key + "'");
    return v;
  }

  std::string str(const YAML::Node& node, const char* what) const {
    if (!node.IsScalar()) fail(node, std::string(what) + " must be a string");
    return node.Scalar();
  }

  std::string str_field(const YAML::Node& map, const char* key) const {
    return str(require(map, key), key);
  }

  bool bool_value(const YAML::Node& node, const char* what) const {
    if (!node.IsScalar()) fail(node, std::string(what) + " must be a boolean");
    const std::string& s = node.Scalar();
    if (s == "true") return true;
    if (s == "false") return false;
    fail(node, std::string(what) + " must be true or false");
  }

  bool optional_bool(const YAML::Node& map, const char* key, bool fallback) const {
    YAML::Node v = map[key];
    if (!v || v.IsNull()) return fallback;
    return bool_value(v, key);
  }

  std::vector<YAML::Node> seq(const YAML::Node& node, const char* what) const {
    if (node.IsNull()) return {};
    if (!node.IsSequence()) fail(node, std::string(what) + " must be an array");
    std::vector<YAML::Node> out;
    for (const auto& child : node) out.push_back(child);
    return out;
  }

  std::vector<YAML::Node> seq_field(const YAML::Node& map, const char* key) const {
    return seq(require(map, key), key);
  }

  std::vector<YAML::Node> optional_seq(const YAML::Node& map, const char* key) const {
    YAML::Node v = map[key];
    if (!v) return {};
    return seq(v, key);
  }

  ColType col_type(const YAML::Node& node) const {
    auto t = col_type_from_string(str(node, "colType"));
    if (!t) fail(node, "unknown column type '" + node.Scalar() + "' (expected Int, Bool or Str)");
    return *t;
  }

  // -------------------------------------------------------------------------

  ExprPtr expr(const YAML::Node& node) const {
    if (!node || node.IsNull()) fail(node, "missing expression");
    if (node.IsScalar()) {
      try {
        return parse_expr_text(node.Scalar());
      } catch (const ExprSyntaxError& e) {
        fail(node, "in expression '" + node.Scalar() + "': " + e.what());
      }
    }
    if (!node.IsMap()) fail(node, "expression must be an object or an infix string");
    std::string kind = str_field(node, "kind");
    if (kind == "Var") return var(str_field(node, "name"));
    if (kind == "LitInt") {
      YAML::Node v = require(node, "value");
      try {
        return lit(v.as<std::int64_t>());
      } catch (const YAML::Exception&) {
        fail(v, "LitInt value must be a 64-bit integer");
      }
    }
    if (kind == "LitBool") return lit(bool_value(require(node, "value"), "LitBool value"));
    if (kind == "LitStr") return lit_str(str_field(node, "value"));
    if (kind == "BinOp") {
      YAML::Node opNode = require(node, "op");
      auto op = bin_op_from_string(str(opNode, "op"));
      if (!op) fail(opNode, "unknown operator '" + opNode.Scalar() + "'");
      return binary(*op, expr(require(node, "lhs")), expr(require(node, "rhs")));
    }
    if (kind == "FieldOf") return field_of(str_field(node, "rowVar"), str_field(node, "column"));
    if (kind == "Neg") return neg(expr(require(node, "expr")));
    fail(node, "unknown expression kind '" + kind + "'");
  }

  std::vector<ExprPtr> exprs(const YAML::Node& map, const char* key) const {
    std::vector<ExprPtr> out;
    for (const auto& e : optional_seq(map, key)) out.push_back(expr(e));
    return out;
  }

  Block block(const YAML::Node& node) const {
    Block out;
    for (const auto& s : seq(node, "statement list")) out.push_back(stmt(s));
    return out;
  }

  Block optional_block(const YAML::Node& map, const char* key) const {
    YAML::Node v = map[key];
    if (!v) return {};
    return block(v);
  }

  Stmt stmt(const YAML::Node& node) const {
    if (!node.IsMap()) fail(node, "statement must be an object");
    Stmt out;
    out.line = line_of(node);
    std::string kind = str_field(node, "kind");
    if (kind == "Let") {
      out.node = Stmt::Let{str_field(node, "name"), expr(require(node, "value"))};
    } else if (kind == "If") {
      out.node = Stmt::If{expr(require(node, "cond")), optional_block(node, "thenBranch"),
                          optional_block(node, "elseBranch")};
    } else if (kind == "CallApi") {
      Stmt::CallApi call;
      call.bind = str_field(node, "bind");
      call.api = str_field(node, "api");
      call.args = exprs(node, "args");
      for (const auto& a : seq_field(node, "arms")) {
        Stmt::Arm arm;
        arm.variantName = str_field(a, "variantName");
        for (const auto& b : optional_seq(a, "bindings")) arm.bindings.push_back(str(b, "binding"));
        arm.body = optional_block(a, "body");
        call.arms.push_back(std::move(arm));
      }
      out.node = std::move(call);
    } else if (kind == "TableRead") {
      Stmt::TableRead read;
      read.bind = str_field(node, "bind");
      read.table = str_field(node, "table");
      YAML::Node mode = require(node, "mode");
      std::string mk = str_field(mode, "kind");
      if (mk == "Query") {
        read.mode.kind = ReadMode::Kind::Query;
      } else if (mk == "Count") {
        read.mode.kind = ReadMode::Kind::Count;
      } else if (mk == "SumField") {
        read.mode.kind = ReadMode::Kind::SumField;
        read.mode.column = str_field(mode, "column");
      } else if (mk == "Exists") {
        read.mode.kind = ReadMode::Kind::Exists;
      } else {
        fail(mode, "unknown read mode '" + mk + "'");
      }
      read.mode.predicate = expr(require(mode, "predicate"));
      out.node = std::move(read);
    } else if (kind == "TableWrite") {
      Stmt::TableWrite write;
      write.table = str_field(node, "table");
      YAML::Node op = require(node, "op");
      std::string ok = str_field(op, "kind");
      if (ok == "Insert") {
        write.op.kind = WriteOp::Kind::Insert;
        for (const auto& e : seq_field(op, "rowExprs")) write.op.rowExprs.push_back(expr(e));
      } else if (ok == "Update") {
        write.op.kind = WriteOp::Kind::Update;
        write.op.predicate = expr(require(op, "predicate"));
        for (const auto& a : seq_field(op, "assignments")) {
          write.op.assignments.push_back(Assignment{str_field(a, "column"), expr(require(a, "value"))});
        }
      } else if (ok == "Delete") {
        write.op.kind = WriteOp::Kind::Delete;
        write.op.predicate = expr(require(op, "predicate"));
      } else {
        fail(op, "unknown write op '" + ok + "'");
      }
      out.node = std::move(write);
    } else if (kind == "Return") {
      out.node = Stmt::Return{str_field(node, "variant"), exprs(node, "payload")};
    } else {
      fail(node, "unknown statement kind '" + kind + "'");
    }
    return out;
  }

  std::vector<Param> params(const YAML::Node& map, const char* key) const {
    std::vector<Param> out;
    for (const auto& p : optional_seq(map, key)) {
      out.push_back(Param{str_field(p, "name"), col_type(require(p, "colType"))});
    }
    return out;
  }

  ApiDef api(const YAML::Node& node) const {
    if (!node.IsMap()) fail(node, "API file must contain an object");
    ApiDef out;
    out.name = str_field(node, "name");
    if (YAML::Node s = node["service"]; s && !s.IsNull()) out.service = str(s, "service");
    out.params = params(node, "params");
    for (const auto& v : seq_field(node, "resultVariants")) {
      ReturnVariant rv;
      rv.name = str_field(v, "name");
      rv.payload = params(v, "payload");
      rv.success = optional_bool(v, "success", false);
      out.resultVariants.push_back(std::move(rv));
    }
    out.body = block(require(node, "body"));
    if (YAML::Node d = node["docText"]; d && !d.IsNull()) out.docText = str(d, "docText");
    out.sourceFile = file_;
    return out;
  }

  // Fig-style constraint strings: "primary key", "unique", "not null",
  // "nullable", "foreign key Account.userId", "references Account(userId)".
  void apply_constraint(const YAML::Node& node, Column& col, bool& primary) const {
    std::string raw = str(node, "constraint");
    std::string s;
    for (char c : raw) s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    static const std::regex fk(R"(\s*(?:references\s+|->\s*)?([A-Za-z_]\w*)\s*[.(]\s*([A-Za-z_]\w*)\s*\)?\s*)",
                               std::regex::icase);
    if (s == "primary key" || s == "primary_key" || s == "pk") {
      primary = true;
    } else if (s == "unique") {
      col.unique = true;
    } else if (s == "not null" || s == "not_null" || s == "notnull") {
      col.notNull = true;
    } else if (s == "nullable" || s == "null") {
      col.notNull = false;
    } else if (s.rfind("foreign key", 0) == 0 || s.rfind("references", 0) == 0 || s.rfind("fk", 0) == 0) {
      std::string rest = raw;
      for (const char* prefix : {"foreign key", "FOREIGN KEY", "Foreign Key", "references", "REFERENCES", "fk", "FK"}) {
        std::string p(prefix);
        if (rest.rfind(p, 0) == 0) {
          rest = rest.substr(p.size());
          break;
        }
      }
      std::smatch m;
      if (!std::regex_match(rest, m, fk)) fail(node, "cannot read foreign key constraint '" + raw + "'");
      col.foreignKey = ForeignKey{m[1].str(), m[2].str()};
    } else {
      fail(node, "unknown column constraint '" + raw + "'");
    }
  }

  TableSchema table(const YAML::Node& node) const {
    if (!node.IsMap()) fail(node, "table file must contain an object");
    TableSchema out;
    out.name = str_field(node, "name");
    for (const auto& c : seq_field(node, "columns")) {
      if (!c.IsMap()) fail(c, "column must be an object");
      Column col;
      col.name = str_field(c, "name");
      if (YAML::Node t = c["colType"]) {
        col.colType = col_type(t);
      } else if (YAML::Node t2 = c["type"]) {
        col.colType = col_type(t2);
      } else {
        fail(c, "column '" + col.name + "' has no colType");
      }
      if (YAML::Node fkNode = c["foreignKey"]; fkNode && !fkNode.IsNull()) {
        col.foreignKey = ForeignKey{str_field(fkNode, "table"), str_field(fkNode, "column")};
      }
      col.unique = optional_bool(c, "unique", false);
      col.notNull = optional_bool(c, "notNull", true);
      bool primary = false;
      for (const auto& k : optional_seq(c, "constraints")) apply_constraint(k, col, primary);
      if (primary) out.primaryKey.push_back(col.name);
      out.columns.push_back(std::move(col));
    }
    for (const auto& pk : optional_seq(node, "primaryKey")) {
      std::string name = str(pk, "primaryKey entry");
      if (std::find(out.primaryKey.begin(), out.primaryKey.end(), name) == out.primaryKey.end()) {
        out.primaryKey.push_back(name);
      }
    }
    return out;
  }

 private:
  std::string file_;
};

std::string read_file(const fs::path& path, const std::string& label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(label, 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path resolve(const fs::path& root, const std::string& subdir, const std::string& entry) {
  fs::path p(entry);
  if (p.has_parent_path()) return root / p;
  return root / subdir / p;
}

}  // namespace

ApiDef parse_api_text(const std::string& text, const std::string& sourceName) {
  Reader r(sourceName);
  return r.api(r.load(text));
}

Block parse_block_text(const std::string& text, const std::string& sourceName) {
  Reader r(sourceName);
  return r.block(r.load(text));
}

TableSchema parse_table_text(const std::string& text, const std::string& sourceName) {
  Reader r(sourceName);
  return r.table(r.load(text));
}

Project parse_project(const fs::path& bundlePath) {
  if (!fs::is_directory(bundlePath)) {
    throw ParseError(bundlePath.string(), 0, "bundle directory does not exist");
  }
  const fs::path manifest = bundlePath / "project.json";
  Reader r("project.json");
  YAML::Node root = r.load(read_file(manifest, "project.json"));
  if (!root.IsMap()) r.fail(root, "project.json must contain an object");

  Project project;
  project.name = r.str_field(root, "name");
  std::string docsDir = "docs";
  if (YAML::Node d = root["docsDir"]; d && !d.IsNull()) {
    project.docsDir = r.str(d, "docsDir");
    docsDir = *project.docsDir;
  } else if (fs::is_directory(bundlePath / "docs")) {
    project.docsDir = "docs";
  }

  for (const auto& s : r.seq_field(root, "services")) {
    Service service;
    service.name = r.str_field(s, "name");
    for (const auto& t : r.optional_seq(s, "tables")) {
      std::string entry = r.str(t, "table file");
      fs::path path = resolve(bundlePath, "tables", entry);
      std::string label = fs::relative(path, bundlePath).generic_string();
      TableSchema table = parse_table_text(read_file(path, label), label);
      service.tables.push_back(table.name);
      project.tables.push_back(std::move(table));
    }
    for (const auto& a : r.optional_seq(s, "apis")) {
      std::string entry = r.str(a, "API file");
      fs::path path = resolve(bundlePath, "apis", entry);
      std::string label = fs::relative(path, bundlePath).generic_string();
      ApiDef api = parse_api_text(read_file(path, label), label);
      if (api.service.empty()) {
        api.service = service.name;
      } else if (api.service != service.name) {
        throw ValidationError("api " + api.name + ": declares service '" + api.service +
                              "' but is listed under service '" + service.name + "'");
      }
      if (api.docText.empty()) {
        fs::path doc = bundlePath / docsDir / (api.name + ".md");
        if (fs::is_regular_file(doc)) api.docText = read_file(doc, doc.string());
      }
      service.apis.push_back(api.name);
      project.apis.push_back(std::move(api));
    }
    project.services.push_back(std::move(service));
  }
  ensure_valid(project);
  return project;
}

// ---------------------------------------------------------------------------
// Canonical JSON

using nlohmann::json;

json to_json(const Expr& expr) {
  return std::visit(
      [](const auto& x) -> json {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, Expr::Var>) return {{"kind", "Var"}, {"name", x.name}};
        if constexpr (std::is_same_v<T, Expr::LitInt>) return {{"kind", "LitInt"}, {"value", x.value}};
        if constexpr (std::is_same_v<T, Expr::LitBool>) return {{"kind", "LitBool"}, {"value", x.value}};
        if constexpr (std::is_same_v<T, Expr::LitStr>) return {{"kind", "LitStr"}, {"value", x.value}};
        if constexpr (std::is_same_v<T, Expr::Binary>) {
          return {{"kind", "BinOp"}, {"op", to_string(x.op)}, {"lhs", to_json(*x.lhs)}, {"rhs", to_json(*x.rhs)}};
        }
        if constexpr (std::is_same_v<T, Expr::FieldOf>) {
          return {{"kind", "FieldOf"}, {"rowVar", x.rowVar}, {"column", x.column}};
        }
        if constexpr (std::is_same_v<T, Expr::Neg>) return {{"kind", "Neg"}, {"expr", to_json(*x.operand)}};
        return nullptr;
      },
      expr.node);
}

namespace {

json exprs_json(const std::vector<ExprPtr>& exprs) {
  json out = json::array();
  for (const auto& e : exprs) out.push_back(to_json(*e));
  return out;
}

json params_json(const std::vector<Param>& params) {
  json out = json::array();
  for (const auto& p : params) out.push_back({{"name", p.name}, {"colType", to_string(p.colType)}});
  return out;
}

json stmt_json(const Stmt& stmt) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Stmt::Let>) {
          return {{"kind", "Let"}, {"name", s.name}, {"value", to_json(*s.value)}};
        }
        if constexpr (std::is_same_v<T, Stmt::If>) {
          return {{"kind", "If"},
                  {"cond", to_json(*s.cond)},
                  {"thenBranch", to_json(s.thenBranch)},
                  {"elseBranch", to_json(s.elseBranch)}};
        }
        if constexpr (std::is_same_v<T, Stmt::CallApi>) {
          json arms = json::array();
          for (const auto& a : s.arms) {
            arms.push_back({{"variantName", a.variantName}, {"bindings", a.bindings}, {"body", to_json(a.body)}});
          }
          return {{"kind", "CallApi"}, {"bind", s.bind}, {"api", s.api}, {"args", exprs_json(s.args)}, {"arms", arms}};
        }
        if constexpr (std::is_same_v<T, Stmt::TableRead>) {
          json mode = {{"kind", to_string(s.mode.kind)}, {"predicate", to_json(*s.mode.predicate)}};
          if (s.mode.kind == ReadMode::Kind::SumField) mode["column"] = s.mode.column;
          return {{"kind", "TableRead"}, {"bind", s.bind}, {"table", s.table}, {"mode", mode}};
        }
        if constexpr (std::is_same_v<T, Stmt::TableWrite>) {
          json op = {{"kind", to_string(s.op.kind)}};
          if (s.op.kind == WriteOp::Kind::Insert) op["rowExprs"] = exprs_json(s.op.rowExprs);
          if (s.op.kind != WriteOp::Kind::Insert) op["predicate"] = to_json(*s.op.predicate);
          if (s.op.kind == WriteOp::Kind::Update) {
            json as = json::array();
            for (const auto& a : s.op.assignments) as.push_back({{"column", a.column}, {"value", to_json(*a.value)}});
            op["assignments"] = as;
          }
          return {{"kind", "TableWrite"}, {"table", s.table}, {"op", op}};
        }
        if constexpr (std::is_same_v<T, Stmt::Return>) {
          return {{"kind", "Return"}, {"variant", s.variant}, {"payload", exprs_json(s.payload)}};
        }
        return nullptr;
      },
      stmt.node);
}

}  // namespace

json to_json(const Block& block) {
  json out = json::array();
  for (const auto& s : block) out.push_back(stmt_json(s));
  return out;
}

json to_json(const TableSchema& table) {
  json cols = json::array();
  for (const auto& c : table.columns) {
    json col = {{"name", c.name}, {"colType", to_string(c.colType)}, {"unique", c.unique}, {"notNull", c.notNull}};
    if (c.foreignKey) col["foreignKey"] = {{"table", c.foreignKey->table}, {"column", c.foreignKey->column}};
    cols.push_back(col);
  }
  return {{"name", table.name}, {"columns", cols}, {"primaryKey", table.primaryKey}};
}

json to_json(const ApiDef& api) {
  json variants = json::array();
  for (const auto& v : api.resultVariants) {
    variants.push_back({{"name", v.name}, {"payload", params_json(v.payload)}, {"success", v.success}});
  }
  json out = {{"name", api.name},
              {"service", api.service},
              {"params", params_json(api.params)},
              {"resultVariants", variants},
              {"body", to_json(api.body)}};
  if (!api.docText.empty()) out["docText"] = api.docText;
  return out;
}

json to_json(const Project& project) {
  json services = json::array();
  for (const auto& s : project.services) {
    json tables = json::array();
    for (const auto& t : s.tables) tables.push_back(to_json(*project.find_table(t)));
    json apis = json::array();
    for (const auto& a : s.apis) apis.push_back(to_json(*project.find_api(a)));
    services.push_back({{"name", s.name}, {"tables", tables}, {"apis", apis}});
  }
  json out = {{"name", project.name}, {"services", services}};
  if (project.docsDir) out["docsDir"] = *project.docsDir;
  return out;
}

}  // namespace specforge::ir
