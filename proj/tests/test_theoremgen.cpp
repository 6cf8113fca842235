#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "specforge/corpus.hpp"
#include "specforge/expr_parser.hpp"
#include "support.hpp"

using namespace specforge;

namespace {

ir::Stmt stmt(decltype(ir::Stmt::node) n) {
  ir::Stmt s;
  s.node = std::move(n);
  return s;
}

ir::Stmt ret(const std::string& v) { return stmt(ir::Stmt::Return{v, {}}); }

ir::Block if_else(const std::string& cond, ir::Block a, ir::Block b) {
  return {stmt(ir::Stmt::If{ir::parse_expr_text(cond), std::move(a), std::move(b)})};
}

ir::ApiDef api_named(const std::string& name, ir::Block body) {
  ir::ApiDef a;
  a.name = name;
  a.service = "S";
  a.params = {{"x", ir::ColType::Int}};
  a.resultVariants = {{"Ok", {}, true}, {"Err", {}, false}, {"Other", {}, false}};
  a.body = std::move(body);
  return a;
}

ir::Project base_project() {
  ir::Project p;
  p.name = "Gen";
  ir::TableSchema t;
  t.name = "T";
  t.columns = {{"id", ir::ColType::Int, std::nullopt, true, true}};
  t.primaryKey = {"id"};
  p.tables.push_back(t);
  p.services.push_back({"S", {"T"}, {}});
  for (const char* c : {"C1", "C2"}) {
    ir::Block b = if_else("x > 0", {ret("Ok")}, {ret("Err")});
    p.apis.push_back(api_named(c, std::move(b)));
    p.services[0].apis.push_back(c);
  }
  return p;
}

/// Nested If/CallApi trees over a small pool of condition and call texts so
/// repeats are frequent.
struct TreeGen {
  std::mt19937_64 rng;
  int fresh = 0;
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

  ir::Block block(int depth) {
    static const char* conds[] = {"x > 0", "x > 1", "x = 2", "x < 0 || x > 5"};
    static const char* vars[] = {"Ok", "Err", "Other"};
    const int shape = depth >= 4 ? 0 : pick(4);
    if (shape == 0) return {ret(vars[pick(3)])};
    if (shape <= 2) return if_else(conds[pick(4)], block(depth + 1), block(depth + 1));
    ir::Stmt::CallApi c;
    c.bind = "r" + std::to_string(fresh++);
    c.api = pick(2) ? "C1" : "C2";
    c.args = {pick(2) ? ir::var("x") : ir::parse_expr_text("x + 1")};
    c.arms = {{"Ok", {}, block(depth + 1)}, {"Err", {}, block(depth + 1)}, {"Other", {}, block(depth + 1)}};
    return {stmt(std::move(c))};
  }
};

}  // namespace

TEST(Paths, UserAuthSevenRequirements) {
  const ir::Project p = load_fixture("UserAuth");
  const DependencyGraph g = analyze_dependencies(p);
  std::size_t n = 0;
  for (const auto& api : p.apis) n += enumerate_paths(p, api, g).size();
  EXPECT_EQ(n, 7u);
}

TEST(Paths, CorpusMatchesBranchProductOracle) {
  for (const char* name : {"UserAuth", "BankAccount"}) {
    const ir::Project p = load_fixture(name);
    const DependencyGraph g = analyze_dependencies(p);
    for (const auto& api : p.apis) {
      const auto want = sftest::BranchProductOracle(api).paths();
      EXPECT_EQ(sftest::enumerated(p, api, g), want) << name << "." << api.name;
    }
  }
}

TEST(Paths, WithdrawalPremises) {
  const ir::Project p = load_fixture("BankAccount");
  const auto reqs = enumerate_paths(p, *p.find_api("Withdrawal"), analyze_dependencies(p));
  ASSERT_EQ(reqs.size(), 4u);
  EXPECT_EQ(reqs[0].outcome.variant, "Success");
  ASSERT_EQ(reqs[0].premises.size(), 3u);
  EXPECT_EQ(reqs[0].premises[1].kind, Premise::Kind::CalleeVariant);
  EXPECT_EQ(reqs[0].premises[1].irText, "BalanceQuery(userId) = Success(balance)");
  EXPECT_EQ(reqs[0].premises[2].irText, "balance >= amount");
  EXPECT_EQ(reqs[3].premises[0].irText, "not (amount > 0)");
  EXPECT_TRUE(reqs[0].outcome.success);
  ASSERT_EQ(reqs[0].outcome.writes.size(), 1u);
  EXPECT_EQ(reqs[0].outcome.writes[0].table, "Transaction");
}

TEST(Paths, RepeatedConditionIsPruned) {
  ir::Project p = base_project();
  p.apis.push_back(api_named("Main", if_else("x > 0", if_else("x > 0", {ret("Ok")}, {ret("Err")}), {ret("Other")})));
  p.services[0].apis.push_back("Main");
  ir::ensure_valid(p);
  const auto reqs = enumerate_paths(p, *p.find_api("Main"), analyze_dependencies(p));
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].outcome.variant, "Ok");
  EXPECT_EQ(reqs[0].premises.size(), 1u);
  EXPECT_EQ(reqs[1].outcome.variant, "Other");
}

TEST(Paths, ExplosionBeyondCap) {
  ir::Project p = base_project();
  ir::Block b = {ret("Ok")};
  for (int i = 0; i < 10; ++i) b = if_else("x > " + std::to_string(i), b, b);
  p.apis.push_back(api_named("Wide", b));
  p.services[0].apis.push_back("Wide");
  const DependencyGraph g = analyze_dependencies(p);
  EXPECT_THROW(enumerate_paths(p, *p.find_api("Wide"), g, {256}), PathExplosion);
  EXPECT_EQ(enumerate_paths(p, *p.find_api("Wide"), g, {2048}).size(), 1024u);
}

TEST(PathsProperty, RandomTreesMatchOracle) {
  TreeGen gen{std::mt19937_64(11)};
  for (int i = 0; i < 200; ++i) {
    ir::Project p = base_project();
    p.apis.push_back(api_named("Main", gen.block(0)));
    p.services[0].apis.push_back("Main");
    ASSERT_TRUE(ir::validate_project(p).empty()) << ir::validate_project(p).front().to_string();
    const DependencyGraph g = analyze_dependencies(p);
    const ir::ApiDef& api = *p.find_api("Main");
    ASSERT_EQ(sftest::enumerated(p, api, g), sftest::BranchProductOracle(api).paths()) << "tree " << i;
  }
}

TEST(PathsProperty, RandomTreesSoundAndComplete) {
  TreeGen gen{std::mt19937_64(29)};
  for (int i = 0; i < 20; ++i) {
    ir::Project p = base_project();
    p.apis.push_back(api_named("Main", gen.block(0)));
    p.services[0].apis.push_back("Main");
    ASSERT_TRUE(ir::validate_project(p).empty());
    for (int n : sftest::path_coverage(p, *p.find_api("Main"), 200, 5 + i)) ASSERT_EQ(n, 1) << "tree " << i;
    ir::Project only = p;
    only.apis = {*p.find_api("C1"), *p.find_api("C2"), *p.find_api("Main")};
    const auto st = sftest::check_soundness(only, 50, 3, 20000);
    EXPECT_EQ(st.mismatches, 0u) << st.firstProblem;
  }
}

// ---------------------------------------------------------------------------
// Soundness and completeness on the corpus

TEST(Soundness, CorpusRequirementsThousandSamples) {
  for (const char* name : {"UserAuth", "BankAccount"}) {
    const auto st = sftest::check_soundness(load_fixture(name), 1000, 7);
    EXPECT_EQ(st.mismatches, 0u) << name << ": " << st.firstProblem;
    EXPECT_EQ(st.starved, 0u) << name << ": " << st.firstProblem;
    EXPECT_EQ(st.checked, st.requirements * 1000) << name;
  }
}

TEST(Soundness, DetectsInjectedBug) {
  const ir::Project spec = load_fixture("BankAccount");
  const ir::Project v2 = apply_variant(spec, 2);
  const auto st = sftest::check_soundness(spec, 200, 7, 400000, &v2);
  EXPECT_GT(st.mismatches, 0u);
  EXPECT_NE(st.firstProblem.find("Deposit"), std::string::npos) << st.firstProblem;
}

TEST(Completeness, ExactlyOnePathHolds) {
  for (const char* name : {"UserAuth", "BankAccount"}) {
    const ir::Project p = load_fixture(name);
    for (const auto& api : p.apis) {
      const auto counts = sftest::path_coverage(p, api, 1000, 17);
      EXPECT_GT(counts.size(), 900u);
      for (int n : counts) ASSERT_EQ(n, 1) << name << "." << api.name;
    }
  }
}

// ---------------------------------------------------------------------------
// Theorem text

TEST(Theorems, CountsAndOrder) {
  const sftest::Loaded ua = sftest::load("UserAuth");
  ASSERT_EQ(ua.theorems.size(), 9u);
  EXPECT_EQ(ua.theorems.front().id, "UserAuth.UserLogin.path1");
  EXPECT_EQ(ua.theorems[7].id, "UserAuth.User.prop1.UserRegister");
  const sftest::Loaded ba = sftest::load("BankAccount");
  ASSERT_EQ(ba.theorems.size(), 24u);
  int paths = 0;
  for (const auto& t : ba.theorems) paths += t.kind == TheoremKind::ApiPath;
  EXPECT_EQ(paths, 17);
}

TEST(Theorems, WithdrawalStatement) {
  const sftest::Loaded l = sftest::load("BankAccount");
  const TheoremSpec& t = sftest::by_id(l.theorems, "BankAccount.Withdrawal.path1");
  EXPECT_EQ(t.leanName, "Withdrawal_path1");
  EXPECT_EQ(t.path, "BankAccount/Theorems/Withdrawal_path1.lean");
  EXPECT_EQ(t.service, "TransactionService");
  EXPECT_EQ(t.statement.rfind("theorem Withdrawal_path1 (userId : Int) (amount : Int) (accountTable : AccountTable) "
                              "(transactionTable : TransactionTable) (balance : Int)",
                              0),
            0u);
  EXPECT_NE(t.statement.find("(h1 : amount > 0)"), std::string::npos);
  EXPECT_NE(t.statement.find("(h3 : balance ≥ amount)"), std::string::npos);
  EXPECT_EQ(t.binders.back().origin, Binder::Origin::CalleePayload);
  EXPECT_EQ(t.unfoldDefs, (std::vector<std::string>{"withdrawal", "balanceQuery"}));

  // The proof line offset points at `sorry`.
  std::istringstream in(t.sourceText);
  std::string line;
  for (int i = 0; i < t.proofLineOffset; ++i) std::getline(in, line);
  EXPECT_EQ(line, "  sorry");
  const auto body = [](const std::string& s) { return s.substr(s.find('\n')); };
  std::string want = t.sourceText;
  want.replace(want.find("  sorry"), 7, "  simp_all");
  EXPECT_EQ(body(theorem_file(t, "simp_all")), body(want));
}

TEST(Theorems, NegationShape) {
  const sftest::Loaded l = sftest::load("BankAccount");
  const TheoremSpec& t = sftest::by_id(l.theorems, "BankAccount.Withdrawal.path1");
  const TheoremSpec n = negate_theorem(t);
  EXPECT_EQ(n.id, "BankAccount.Withdrawal.path1.neg");
  EXPECT_EQ(n.kind, TheoremKind::Negation);
  EXPECT_EQ(n.negationOf, t.id);
  EXPECT_EQ(n.leanName, "Withdrawal_path1_neg");
  EXPECT_NE(n.statement.find("∃ (userId : Int) (amount : Int)"), std::string::npos);
  EXPECT_NE(n.statement.find("amount > 0 ∧"), std::string::npos);
  EXPECT_NE(n.statement.find("¬((withdrawal userId amount"), std::string::npos);
  EXPECT_THROW(negate_theorem(n), AlreadyNegated);
}

TEST(Theorems, GoalText) {
  const sftest::Loaded l = sftest::load("BankAccount");
  const TheoremSpec& t = sftest::by_id(l.theorems, "BankAccount.Withdrawal.path1");
  const std::string g = goal_text(t);
  EXPECT_EQ(g.rfind("userId : Int\n", 0), 0u);
  EXPECT_NE(g.find("h1 : amount > 0\n"), std::string::npos);
  EXPECT_NE(g.find("⊢ (withdrawal userId amount"), std::string::npos) << g;
  EXPECT_EQ(goal_text(negate_theorem(t)).rfind("⊢ ∃ ", 0), 0u);
}

TEST(Theorems, TableProperties) {
  const sftest::Loaded l = sftest::load("BankAccount");
  const auto props = summarize_table_properties(l.project, *l.project.find_table("Account"), l.graph);
  ASSERT_EQ(props.size(), 3u);
  EXPECT_EQ(props[0].kind, TableProperty::Kind::CountDeltaOnSuccess);
  EXPECT_EQ(props[0].delta, 1);
  EXPECT_EQ(props[0].apis, std::vector<std::string>{"CreateAccount"});
  EXPECT_EQ(props[1].delta, -1);
  EXPECT_EQ(props[1].apis, std::vector<std::string>{"CloseAccount"});
  EXPECT_EQ(props[2].kind, TableProperty::Kind::PreservedAlways);
  EXPECT_EQ(props[2].apis, (std::vector<std::string>{"BalanceQuery", "Deposit"}));

  const TheoremSpec& t = sftest::by_id(l.theorems, "BankAccount.Account.prop1.CreateAccount");
  EXPECT_NE(t.statement.find("(h_success : (createAccount userId owner accountTable).1.isSuccess = true)"),
            std::string::npos);
  EXPECT_EQ(t.unfoldDefs, (std::vector<std::string>{"createAccount", "CreateAccountResult.isSuccess"}));
}

TEST(Theorems, SummarizerPropertiesAppended) {
  struct Fixed : Summarizer {
    std::vector<TableProperty> summarize(const ir::TableSchema& table, const std::vector<const ir::ApiDef*>&) override {
      TableProperty p;
      p.table = table.name;
      p.kind = TableProperty::Kind::Custom;
      p.statement = "ids stay positive";
      p.apis = {"CreateAccount"};
      p.customProp = "True";
      return {p};
    }
  } fixed;
  const sftest::Loaded l = sftest::load("BankAccount");
  const auto props = summarize_table_properties(l.project, *l.project.find_table("Account"), l.graph, &fixed);
  ASSERT_EQ(props.size(), 4u);
  EXPECT_EQ(props.back().source, TableProperty::Source::Summarizer);
}

TEST(Theorems, LeanNames) {
  EXPECT_EQ(theorem_lean_name("BankAccount.Withdrawal.path1"), "Withdrawal_path1");
  EXPECT_EQ(theorem_lean_name("BankAccount.Account.prop2.CloseAccount"), "Account_prop2_CloseAccount");
}
