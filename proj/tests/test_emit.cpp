#include <gtest/gtest.h>

#include "specforge/corpus.hpp"
#include "specforge/errors.hpp"
#include "specforge/hash.hpp"
#include "specforge/lean_emit.hpp"
#include "support.hpp"

using namespace specforge;

namespace {

const FormalModule& module_named(const LeanProject& lp, const std::string& name) {
  for (const auto& m : lp.modules) {
    if (m.name == name) return m;
  }
  throw std::runtime_error("no module " + name);
}

}  // namespace

TEST(Emit, TransactionTableGolden) {
  const ir::Project p = load_fixture("BankAccount");
  const FormalModule m = emit_table(*p.find_table("Transaction"));
  EXPECT_EQ(m.sourceText, sftest::read_file(sftest::golden_dir() / "Transaction.table.lean"));
  EXPECT_EQ(m.kind, FormalModule::Kind::TablesDef);
}

TEST(Emit, WithdrawalApiGolden) {
  const sftest::Loaded l = sftest::load("BankAccount");
  const FormalModule& m = module_named(l.emitted, "BankAccount.Withdrawal");
  EXPECT_EQ(m.sourceText, sftest::read_file(sftest::golden_dir() / "Withdrawal.api.lean"));
  EXPECT_EQ(m.path, "BankAccount/Withdrawal.lean");
  EXPECT_EQ(m.imports, (std::vector<std::string>{"BankAccount.Tables", "BankAccount.BalanceQuery"}));
}

TEST(Emit, BannerHashesBody) {
  const std::string body = "def x : Nat := 1\n";
  const std::string text = with_banner(body);
  const auto nl = text.find('\n');
  ASSERT_NE(nl, std::string::npos);
  EXPECT_EQ(text.substr(nl + 1), body);
  EXPECT_NE(text.substr(0, nl).find(sha256_hex(body)), std::string::npos);
  EXPECT_EQ(text.rfind("-- Generated by specforge ", 0), 0u);
}

TEST(Emit, MissingImportIsEmitError) {
  const ir::Project p = load_fixture("BankAccount");
  const DependencyGraph g = analyze_dependencies(p);
  std::vector<FormalModule> emitted = {emit_tables(p, g)};
  EXPECT_THROW(emit_api(p, *p.find_api("Withdrawal"), g, emitted), EmitError);
  EXPECT_THROW(emit_api(p, *p.find_api("BalanceQuery"), g, {}), EmitError);
  emitted.push_back(emit_api(p, *p.find_api("BalanceQuery"), g, emitted));
  EXPECT_NO_THROW(emit_api(p, *p.find_api("Withdrawal"), g, emitted));
}

TEST(Emit, ModuleOrderAndProjectFiles) {
  const sftest::Loaded l = sftest::load("BankAccount");
  std::vector<std::string> names;
  for (const auto& m : l.emitted.modules) names.push_back(m.name);
  EXPECT_EQ(names, (std::vector<std::string>{"BankAccount.Prelude", "BankAccount.Tables", "BankAccount.BalanceQuery",
                                             "BankAccount.CloseAccount", "BankAccount.CreateAccount",
                                             "BankAccount.Deposit", "BankAccount.Withdrawal"}));
  EXPECT_EQ(l.emitted.toolchain.find(kLeanToolchain), 0u);
  EXPECT_NE(l.emitted.lakefile.find(kPreludePackage), std::string::npos);
  EXPECT_NE(l.emitted.lakefile.find("../lean-prelude"), std::string::npos);
  for (const auto& m : l.emitted.modules) {
    EXPECT_NE(l.emitted.rootModule.find("import " + m.name), std::string::npos) << m.name;
  }
}

TEST(Emit, Deterministic) {
  const sftest::Loaded a = sftest::load("BankAccount");
  const sftest::Loaded b = sftest::load("BankAccount");
  ASSERT_EQ(a.emitted.modules.size(), b.emitted.modules.size());
  for (std::size_t i = 0; i < a.emitted.modules.size(); ++i) {
    EXPECT_EQ(a.emitted.modules[i].sourceText, b.emitted.modules[i].sourceText);
  }
}

TEST(Emit, PreludePathOption) {
  const ir::Project p = load_fixture("UserAuth");
  EmitOptions opt;
  opt.preludePath = "/opt/prelude";
  const LeanProject lp = emit_project(p, analyze_dependencies(p), opt);
  EXPECT_NE(lp.lakefile.find("/opt/prelude"), std::string::npos);
}

TEST(Emit, UserTableShape) {
  const ir::Project p = load_fixture("UserAuth");
  const std::string t = emit_table(*p.find_table("User")).sourceText;
  EXPECT_NE(t.find("structure UserRow where"), std::string::npos);
  EXPECT_NE(t.find("structure UserTable where\n  rows : List UserRow"), std::string::npos);
}

TEST(Emit, OutcomeType) {
  const ir::Project p = load_fixture("BankAccount");
  EXPECT_EQ(outcome_type(*p.find_api("Withdrawal"), {"Account", "Transaction"}),
            "WithdrawalResult × AccountTable × TransactionTable");
}
