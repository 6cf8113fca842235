#include <gtest/gtest.h>

#include "specforge/bundle.hpp"
#include "specforge/corpus.hpp"
#include "specforge/errors.hpp"
#include "specforge/expr_parser.hpp"
#include "specforge/interpreter.hpp"
#include "support.hpp"

using namespace specforge;
namespace fs = std::filesystem;

namespace {

std::string joined(const std::vector<ir::Diagnostic>& ds) {
  std::string s;
  for (const auto& d : ds) s += d.to_string() + "\n";
  return s;
}

fs::path copy_bundle(const std::string& name, const fs::path& dst) {
  fs::copy(fixture_bundle(name), dst, fs::copy_options::recursive);
  return dst;
}

}  // namespace

TEST(Ir, FixtureShapes) {
  const ir::Project ua = load_fixture("UserAuth");
  EXPECT_EQ(ua.services.size(), 1u);
  EXPECT_EQ(ua.tables.size(), 1u);
  EXPECT_EQ(ua.apis.size(), 2u);

  const ir::Project ba = load_fixture("BankAccount");
  EXPECT_EQ(ba.services.size(), 3u);
  EXPECT_EQ(ba.tables.size(), 2u);
  EXPECT_EQ(ba.apis.size(), 5u);
  EXPECT_TRUE(ir::validate_project(ba).empty()) << joined(ir::validate_project(ba));
  ASSERT_NE(ba.find_api("Withdrawal"), nullptr);
  EXPECT_EQ(ba.find_api("Withdrawal")->service, "TransactionService");
  ASSERT_NE(ba.find_table("Transaction"), nullptr);
  const auto* fk = ba.find_table("Transaction")->find_column("userId");
  ASSERT_NE(fk, nullptr);
  ASSERT_TRUE(fk->foreignKey.has_value());
  EXPECT_EQ(fk->foreignKey->table, "Account");
}

TEST(Ir, UnknownFixture) {
  try {
    load_fixture("Email");
    FAIL() << "expected UnknownFixture";
  } catch (const UnknownFixture& e) {
    EXPECT_EQ(e.kind(), "UnknownFixture");
    EXPECT_NE(std::string(e.what()).find("Email"), std::string::npos);
  }
}

TEST(Ir, ParseIsDeterministic) {
  const auto a = ir::to_json(load_fixture("BankAccount")).dump();
  const auto b = ir::to_json(load_fixture("BankAccount")).dump();
  EXPECT_EQ(a, b);
}

TEST(Ir, ApiJsonRoundTrip) {
  const ir::Project ba = load_fixture("BankAccount");
  for (const auto& api : ba.apis) {
    const auto j = ir::to_json(api);
    const ir::ApiDef back = ir::parse_api_text(j.dump(2), api.name);
    EXPECT_EQ(ir::to_json(back), j) << api.name;
  }
}

TEST(Ir, PayloadArityDiagnostic) {
  const ir::Project ba = load_fixture("BankAccount");
  ir::ApiDef api = *ba.find_api("BalanceQuery");
  auto& ifs = std::get<ir::Stmt::If>(api.body[1].node);
  std::get<ir::Stmt::Return>(ifs.thenBranch.back().node).payload.clear();
  const auto ds = ir::type_check_api(ba, api);
  ASSERT_FALSE(ds.empty());
  EXPECT_NE(joined(ds).find("return Success carries 0"), std::string::npos) << joined(ds);
}

TEST(Ir, BoolInArithmeticDiagnostic) {
  const ir::Project ba = load_fixture("BankAccount");
  ir::ApiDef api = *ba.find_api("Withdrawal");
  auto& ifs = std::get<ir::Stmt::If>(api.body[0].node);
  ifs.cond = ir::binary(ir::BinOp::Gt, ir::binary(ir::BinOp::Add, ir::var("amount"), ir::lit(true)), ir::lit(std::int64_t{0}));
  const auto ds = ir::type_check_api(ba, api);
  ASSERT_FALSE(ds.empty());
  EXPECT_NE(joined(ds).find("requires Int operands"), std::string::npos) << joined(ds);
}

TEST(Ir, ValidationErrorFromBundle) {
  sftest::TempDir tmp("ir");
  const fs::path b = copy_bundle("BankAccount", tmp.path() / "b");
  const fs::path f = b / "apis" / "Withdrawal.api.json";
  std::string text = sftest::read_file(f);
  const auto pos = text.find("\"payload\": [\"balance - amount\"]");
  ASSERT_NE(pos, std::string::npos);
  text.replace(pos, std::string("\"payload\": [\"balance - amount\"]").size(), "\"payload\": []");
  sftest::write_file(f, text);
  EXPECT_THROW(ir::parse_project(b), ValidationError);
}

TEST(Ir, ParseErrorCarriesLine) {
  sftest::TempDir tmp("ir");
  const fs::path b = copy_bundle("UserAuth", tmp.path() / "b");
  const fs::path f = b / "apis" / "UserLogin.api.json";
  sftest::write_file(f, "{\n  \"name\": \"UserLogin\",\n  \"params\": [\n    { \"name\": \"phone\", \"colType\": \"Nope\" }\n  ]\n}\n");
  try {
    ir::parse_project(b);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4) << e.what();
  }
}

TEST(Ir, ExprTextPrecedence) {
  const auto e = ir::parse_expr_text("row.userId = userId && amount + 1 > 2 * 3");
  EXPECT_EQ(ir::to_text(*e), "row.userId = userId && amount + 1 > 2 * 3");
  const auto& top = std::get<ir::Expr::Binary>(e->node);
  EXPECT_EQ(top.op, ir::BinOp::And);
  EXPECT_TRUE(ir::expr_equal(*ir::parse_expr_text("a ≥ -3"),
                             *ir::binary(ir::BinOp::Ge, ir::var("a"), ir::lit(std::int64_t{-3}))));
  EXPECT_THROW(ir::parse_expr_text("a +"), ir::ExprSyntaxError);
}

TEST(Ir, BlockTerminates) {
  const ir::Project ba = load_fixture("BankAccount");
  for (const auto& api : ba.apis) EXPECT_TRUE(ir::block_terminates(api.body)) << api.name;
  ir::ApiDef api = *ba.find_api("Withdrawal");
  std::get<ir::Stmt::If>(api.body[0].node).elseBranch.clear();
  EXPECT_FALSE(ir::block_terminates(api.body));
}

TEST(Interpreter, WithdrawalConcrete) {
  const ir::Project ba = load_fixture("BankAccount");
  const Interpreter in(ba);
  States s;
  s["Account"].rows = {{Value(1), Value("ann")}};
  s["Transaction"].rows = {{Value(1), Value(1), Value(10)}};
  const Outcome ok = in.run("Withdrawal", {Value(1), Value(4)}, s);
  EXPECT_EQ(ok.variant, "Success");
  ASSERT_EQ(ok.payload.size(), 1u);
  EXPECT_EQ(ok.payload[0], Value(6));
  ASSERT_EQ(ok.states.at("Transaction").rows.size(), 2u);
  EXPECT_EQ(ok.states.at("Transaction").rows[1], (Row{Value(2), Value(1), Value(-4)}));

  EXPECT_EQ(in.run("Withdrawal", {Value(1), Value(11)}, s).variant, "InsufficientBalance");
  EXPECT_EQ(in.run("Withdrawal", {Value(2), Value(1)}, s).variant, "AccountNotFound");
  EXPECT_EQ(in.run("Withdrawal", {Value(1), Value(0)}, s).variant, "InvalidAmount");
  EXPECT_THROW(in.run("Withdrawal", {Value(1)}, s), EvalError);
}

TEST(Interpreter, OverflowIsEvalError) {
  EXPECT_THROW(checked_add(INT64_MAX, 1), EvalError);
  EXPECT_THROW(checked_neg(INT64_MIN), EvalError);
  EXPECT_EQ(checked_mul(-3, 4), -12);
}
