#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>

#include "specforge/corpus.hpp"
#include "specforge/depgraph.hpp"
#include "specforge/errors.hpp"

using namespace specforge;

namespace {

std::set<DepEdge> expected_bank_edges() {
  using K = EdgeKind;
  return {
      {K::TableTable, "Transaction", "Account"},     {K::ApiTableRead, "BalanceQuery", "Account"},
      {K::ApiTableRead, "BalanceQuery", "Transaction"}, {K::ApiTableRead, "CreateAccount", "Account"},
      {K::ApiTableRead, "Deposit", "Account"},       {K::ApiTableRead, "Deposit", "Transaction"},
      {K::ApiTableRead, "Withdrawal", "Transaction"}, {K::ApiTableWrite, "CloseAccount", "Account"},
      {K::ApiTableWrite, "CreateAccount", "Account"}, {K::ApiTableWrite, "Deposit", "Transaction"},
      {K::ApiTableWrite, "Withdrawal", "Transaction"}, {K::ApiApi, "CloseAccount", "BalanceQuery"},
      {K::ApiApi, "Withdrawal", "BalanceQuery"},
  };
}

// Independent re-walk of every statement.
void scan(const std::string& api, const ir::Block& block, std::set<DepEdge>& out) {
  for (const auto& s : block) {
    if (auto* r = std::get_if<ir::Stmt::TableRead>(&s.node)) out.insert({EdgeKind::ApiTableRead, api, r->table});
    if (auto* w = std::get_if<ir::Stmt::TableWrite>(&s.node)) out.insert({EdgeKind::ApiTableWrite, api, w->table});
    if (auto* c = std::get_if<ir::Stmt::CallApi>(&s.node)) {
      out.insert({EdgeKind::ApiApi, api, c->api});
      for (const auto& arm : c->arms) scan(api, arm.body, out);
    }
    if (auto* i = std::get_if<ir::Stmt::If>(&s.node)) {
      scan(api, i->thenBranch, out);
      scan(api, i->elseBranch, out);
    }
  }
}

std::set<DepEdge> rescan(const ir::Project& p) {
  std::set<DepEdge> out;
  for (const auto& t : p.tables) {
    for (const auto& c : t.columns) {
      if (c.foreignKey) out.insert({EdgeKind::TableTable, t.name, c.foreignKey->table});
    }
  }
  for (const auto& a : p.apis) scan(a.name, a.body, out);
  return out;
}

ir::Stmt stmt(decltype(ir::Stmt::node) n) {
  ir::Stmt s;
  s.node = std::move(n);
  return s;
}

/// Random valid project: 10 tables with foreign keys to earlier tables and
/// 40 APIs whose nested bodies read, write and call earlier APIs.
struct RandomProject {
  std::mt19937_64 rng;
  ir::Project p;
  int fresh = 0;

  explicit RandomProject(std::uint64_t seed) : rng(seed) {}

  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  ir::Block block(int depth, int apiIndex) {
    ir::Block b;
    const int n = pick(3);
    for (int i = 0; i < n; ++i) {
      const std::string table = p.tables[pick(static_cast<int>(p.tables.size()))].name;
      if (pick(2)) {
        b.push_back(stmt(ir::Stmt::TableRead{"r" + std::to_string(fresh++), table,
                                             {ir::ReadMode::Kind::Count, ir::lit(true), ""}}));
      } else {
        ir::WriteOp op;
        op.kind = ir::WriteOp::Kind::Delete;
        op.predicate = ir::binary(ir::BinOp::Eq, ir::field_of("row", "id"), ir::var("x"));
        b.push_back(stmt(ir::Stmt::TableWrite{table, op}));
      }
    }
    const int shape = depth > 2 ? 0 : pick(3);
    if (shape == 1) {
      b.push_back(stmt(ir::Stmt::If{ir::binary(ir::BinOp::Gt, ir::var("x"), ir::lit(std::int64_t{pick(5)})),
                                    block(depth + 1, apiIndex), block(depth + 1, apiIndex)}));
    } else if (shape == 2 && apiIndex > 0) {
      ir::Stmt::CallApi c;
      c.bind = "c" + std::to_string(fresh++);
      c.api = p.apis[pick(apiIndex)].name;
      c.args = {ir::var("x")};
      c.arms.push_back({"Ok", {}, block(depth + 1, apiIndex)});
      c.arms.push_back({"Err", {}, block(depth + 1, apiIndex)});
      b.push_back(stmt(std::move(c)));
    } else {
      b.push_back(stmt(ir::Stmt::Return{pick(2) ? "Ok" : "Err", {}}));
    }
    return b;
  }

  ir::Project make() {
    p.name = "Rand";
    p.services.push_back({"S", {}, {}});
    for (int i = 0; i < 10; ++i) {
      ir::TableSchema t;
      t.name = "T" + std::to_string(i);
      t.columns.push_back({"id", ir::ColType::Int, std::nullopt, true, true});
      if (i > 0 && pick(3)) {
        t.columns.push_back({"ref", ir::ColType::Int, ir::ForeignKey{"T" + std::to_string(pick(i)), "id"}, false, true});
      }
      t.primaryKey = {"id"};
      p.services[0].tables.push_back(t.name);
      p.tables.push_back(t);
    }
    for (int i = 0; i < 40; ++i) {
      ir::ApiDef a;
      char buf[8];
      std::snprintf(buf, sizeof buf, "A%02d", 39 - i);  // callees sort after callers
      a.name = buf;
      a.service = "S";
      a.params = {{"x", ir::ColType::Int}};
      a.resultVariants = {{"Ok", {}, true}, {"Err", {}, false}};
      a.body = block(0, i);
      p.services[0].apis.push_back(a.name);
      p.apis.push_back(std::move(a));
    }
    return p;
  }
};

}  // namespace

TEST(Depgraph, BankAccountExactEdges) {
  const ir::Project p = load_fixture("BankAccount");
  const DependencyGraph g = analyze_dependencies(p);
  EXPECT_EQ(g.edges, expected_bank_edges());
  EXPECT_TRUE(g.edges.count({EdgeKind::ApiApi, "Withdrawal", "BalanceQuery"}));
  EXPECT_TRUE(g.edges.count({EdgeKind::ApiTableRead, "BalanceQuery", "Account"}));
  EXPECT_TRUE(g.edges.count({EdgeKind::ApiTableRead, "BalanceQuery", "Transaction"}));
  EXPECT_EQ(g.tables, (std::set<std::string>{"Account", "Transaction"}));
  EXPECT_EQ(g.apis.size(), 5u);
}

TEST(Depgraph, BankAccountOrder) {
  const DependencyGraph g = analyze_dependencies(load_fixture("BankAccount"));
  EXPECT_EQ(g.topoOrder, (std::vector<std::string>{"Account", "Transaction", "BalanceQuery", "CloseAccount",
                                                   "CreateAccount", "Deposit", "Withdrawal"}));
  EXPECT_EQ(topological_order(g), g.topoOrder);
}

TEST(Depgraph, TransitiveQueries) {
  const DependencyGraph g = analyze_dependencies(load_fixture("BankAccount"));
  EXPECT_EQ(dependent_tables(g, "Withdrawal"), (std::vector<std::string>{"Account", "Transaction"}));
  EXPECT_EQ(written_tables(g, "Withdrawal"), (std::vector<std::string>{"Transaction"}));
  EXPECT_EQ(dependent_tables(g, "CloseAccount"), (std::vector<std::string>{"Account", "Transaction"}));
  EXPECT_EQ(written_tables(g, "CloseAccount"), (std::vector<std::string>{"Account"}));
  EXPECT_EQ(written_tables(g, "BalanceQuery"), std::vector<std::string>{});
  EXPECT_EQ(transitive_callees(g, "Withdrawal"), (std::set<std::string>{"BalanceQuery"}));
  EXPECT_TRUE(transitive_callees(g, "BalanceQuery").empty());
}

TEST(Depgraph, EmptyProject) {
  ir::Project p;
  p.name = "Empty";
  const DependencyGraph g = analyze_dependencies(p);
  EXPECT_TRUE(g.edges.empty());
  EXPECT_TRUE(g.topoOrder.empty());
}

TEST(Depgraph, SingleNode) {
  DependencyGraph g;
  g.apis = {"Only"};
  EXPECT_EQ(topological_order(g), std::vector<std::string>{"Only"});
}

TEST(Depgraph, CycleIsError) {
  DependencyGraph g;
  g.apis = {"A", "B"};
  g.edges = {{EdgeKind::ApiApi, "A", "B"}, {EdgeKind::ApiApi, "B", "A"}};
  try {
    topological_order(g);
    FAIL() << "expected CyclicDependency";
  } catch (const CyclicDependency& e) {
    const std::string m = e.what();
    EXPECT_NE(m.find("A"), std::string::npos);
    EXPECT_NE(m.find("B"), std::string::npos);
  }
}

TEST(Depgraph, Idempotent) {
  const ir::Project p = load_fixture("BankAccount");
  EXPECT_EQ(analyze_dependencies(p), analyze_dependencies(p));
}

TEST(DepgraphProperty, RandomDagsMatchRescan) {
  for (std::uint64_t seed = 1; seed <= 25; ++seed) {
    RandomProject gen(seed);
    const ir::Project p = gen.make();
    ASSERT_TRUE(ir::validate_project(p).empty()) << "seed " << seed << ": "
                                                   << ir::validate_project(p).front().to_string();
    const DependencyGraph g = analyze_dependencies(p);
    EXPECT_EQ(g.edges, rescan(p)) << "seed " << seed;
    EXPECT_EQ(g.tables.size() + g.apis.size(), 50u);

    std::map<std::string, std::size_t> at;
    for (std::size_t i = 0; i < g.topoOrder.size(); ++i) at[g.topoOrder[i]] = i;
    ASSERT_EQ(at.size(), 50u);
    for (const auto& t : g.tables) {
      for (const auto& a : g.apis) EXPECT_LT(at[t], at[a]);
    }
    for (const auto& e : g.edges) {
      if (e.kind == EdgeKind::ApiApi || e.kind == EdgeKind::TableTable) {
        EXPECT_LT(at[e.to], at[e.from]) << to_string(e.kind) << " " << e.from << "->" << e.to;
      }
    }

    // Declaration order does not matter.
    ir::Project shuffled = p;
    std::shuffle(shuffled.apis.begin(), shuffled.apis.end(), gen.rng);
    std::shuffle(shuffled.tables.begin(), shuffled.tables.end(), gen.rng);
    EXPECT_EQ(analyze_dependencies(shuffled), g);
  }
}
