// One pass/fail line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <atomic>
#include <cstdio>
#include <functional>
#include <iostream>

#include "oracles.hpp"
#include "specforge/corpus.hpp"
#include "specforge/pipeline.hpp"
#include "specforge/prover.hpp"
#include "support.hpp"

using namespace specforge;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  bool ok;
  std::string detail;
};

class ScriptRunner : public LeanRunner {
 public:
  using Fn = std::function<CheckResult(const std::string&)>;
  explicit ScriptRunner(Fn fn) : fn_(std::move(fn)) {}
  std::string id() const override { return "script"; }
  CheckResult check_file(const Workspace& ws, const fs::path& file) override {
    return fn_(sftest::read_file(ws.root / file));
  }

 private:
  Fn fn_;
};

CheckResult fails() { return make_check_result({{Severity::Error, "T.lean", 10, 2, "unsolved goals", std::nullopt}}, ""); }
CheckResult passes() { return make_check_result({}, ""); }

Criterion dependency_graph() {
  using K = EdgeKind;
  const std::set<DepEdge> want = {
      {K::TableTable, "Transaction", "Account"},        {K::ApiTableRead, "BalanceQuery", "Account"},
      {K::ApiTableRead, "BalanceQuery", "Transaction"}, {K::ApiTableRead, "CreateAccount", "Account"},
      {K::ApiTableRead, "Deposit", "Account"},          {K::ApiTableRead, "Deposit", "Transaction"},
      {K::ApiTableRead, "Withdrawal", "Transaction"},   {K::ApiTableWrite, "CloseAccount", "Account"},
      {K::ApiTableWrite, "CreateAccount", "Account"},   {K::ApiTableWrite, "Deposit", "Transaction"},
      {K::ApiTableWrite, "Withdrawal", "Transaction"},  {K::ApiApi, "CloseAccount", "BalanceQuery"},
      {K::ApiApi, "Withdrawal", "BalanceQuery"},
  };
  const DependencyGraph g = analyze_dependencies(load_fixture("BankAccount"));
  const bool ok = g.edges == want && g.topoOrder.front() == "Account" &&
                  std::find(g.topoOrder.begin(), g.topoOrder.end(), "BalanceQuery") <
                      std::find(g.topoOrder.begin(), g.topoOrder.end(), "Withdrawal");
  return {ok, std::to_string(g.edges.size()) + " edges"};
}

Criterion path_enumeration() {
  std::size_t userAuth = 0, mismatched = 0;
  for (const char* name : {"UserAuth", "BankAccount"}) {
    const ir::Project p = load_fixture(name);
    const DependencyGraph g = analyze_dependencies(p);
    for (const auto& api : p.apis) {
      const auto got = sftest::enumerated(p, api, g);
      if (got != sftest::BranchProductOracle(api).paths()) ++mismatched;
      if (std::string(name) == "UserAuth") userAuth += got.size();
    }
  }
  return {userAuth == 7 && mismatched == 0,
          "UserAuth requirements " + std::to_string(userAuth) + ", oracle mismatches " + std::to_string(mismatched)};
}

Criterion emission_goldens() {
  const sftest::Loaded l = sftest::load("BankAccount");
  const std::string table = emit_table(*l.project.find_table("Transaction")).sourceText;
  std::string api;
  for (const auto& m : l.emitted.modules) {
    if (m.name == "BankAccount.Withdrawal") api = m.sourceText;
  }
  const bool t = table == sftest::read_file(sftest::golden_dir() / "Transaction.table.lean");
  const bool a = api == sftest::read_file(sftest::golden_dir() / "Withdrawal.api.lean");
  return {t && a, std::string("Transaction ") + (t ? "match" : "differs") + ", Withdrawal " + (a ? "match" : "differs")};
}

Criterion soundness() {
  std::size_t checked = 0, bad = 0;
  std::string first;
  for (const char* name : {"UserAuth", "BankAccount"}) {
    const auto st = sftest::check_soundness(load_fixture(name), 1000, 7);
    checked += st.checked;
    bad += st.mismatches + st.starved + (st.checked != st.requirements * 1000);
    if (first.empty()) first = st.firstProblem;
  }
  return {bad == 0, std::to_string(checked) + " samples, " + std::to_string(bad) + " problems" +
                        (first.empty() ? "" : ": " + first)};
}

Criterion budget() {
  sftest::TempDir tmp("acc");
  Workspace ws{tmp.path(), "BankAccount", "fp"};
  ExamplePool pool;
  std::atomic<int> calls{0};
  FunctionBackend backend("fail", [&](const ProofRequest&) {
    ++calls;
    return ProofResponse{"simp", {}};
  });
  ScriptRunner runner([](const std::string&) { return fails(); });
  std::vector<TheoremSpec> ts = sftest::load("BankAccount").theorems;
  ts.resize(1);
  ProverContext ctx{backend, runner, ws, pool, Budget{}, 1};
  run_proof_search(ts, ctx);
  return {calls.load() == 45, std::to_string(calls.load()) + " calls for an unprovable theorem"};
}

Criterion dual_loop() {
  sftest::TempDir tmp("acc");
  Workspace ws{tmp.path(), "BankAccount", "fp"};
  ExamplePool pool;
  std::vector<TheoremSpec> ts = sftest::load("BankAccount").theorems;
  ts.resize(2);
  const std::string a = ts[0].id, b = ts[1].id;
  FunctionBackend backend("scripted", [&](const ProofRequest& r) {
    if (r.theoremId == a) return ProofResponse{"good_a", {}};
    for (const auto& e : r.examples) {
      if (e.theoremId == a) return ProofResponse{"good_b", {}};
    }
    return ProofResponse{"bad", {}};
  });
  ScriptRunner runner([](const std::string& c) { return c.find("  good_") != std::string::npos ? passes() : fails(); });
  ProverContext ctx{backend, runner, ws, pool, Budget{}, 1};
  const SearchResult r = run_proof_search(ts, ctx);
  const int round = r.provedInRound.count(b) ? r.provedInRound.at(b) : 0;
  return {round == 2, "second theorem proved in round " + std::to_string(round)};
}

Criterion triage() {
  const std::vector<std::pair<std::string, std::vector<std::string>>> cases = {
      {"UserAuth", {}},
      {"UserAuth", {"UserAuth.UserRegister.path2"}},
      {"UserAuth", {"UserAuth.UserLogin.path2"}},
      {"BankAccount", {}},
      {"BankAccount", {"BankAccount.BalanceQuery.path1"}},
      {"BankAccount", {"BankAccount.Deposit.path1"}},
      {"BankAccount", {"BankAccount.Withdrawal.path1"}},
  };
  int wrong = 0, variant = 0;
  std::string prev;
  for (const auto& [project, bugs] : cases) {
    variant = project == prev ? variant + 1 : 0;
    prev = project;
    sftest::TempDir tmp("acc");
    PipelineConfig c;
    c.outDir = tmp.path();
    c.variant = variant;
    c.deterministic = true;
    const PipelineResult r = run_pipeline(fixture_bundle(project), c);
    std::vector<std::string> got;
    for (const auto& b : r.report.bugs) got.push_back(b.theoremId);
    wrong += got != bugs || r.report.unresolved != 0;
  }
  return {wrong == 0, std::to_string(cases.size()) + " runs, " + std::to_string(wrong) + " misclassified"};
}

Criterion determinism() {
  sftest::TempDir a("acc"), b("acc");
  PipelineConfig c;
  c.deterministic = true;
  c.variant = 2;
  c.cache = false;
  c.outDir = a.path();
  run_pipeline(fixture_bundle("BankAccount"), c);
  c.outDir = b.path();
  run_pipeline(fixture_bundle("BankAccount"), c);
  int differ = 0;
  for (const char* f : {"report.txt", "report.json", "attempts.jsonl"}) {
    differ += sftest::read_file(a.path() / f) != sftest::read_file(b.path() / f);
  }
  return {differ == 0, std::to_string(differ) + " of 3 artifacts differ"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, Criterion (*)()>> criteria = {
      {"dependency graph exact on BankAccount", dependency_graph},
      {"path enumeration matches oracle, UserAuth yields 7", path_enumeration},
      {"emitted Lean matches goldens", emission_goldens},
      {"requirements sound on 1000 samples each", soundness},
      {"proof budget 45 calls per theorem", budget},
      {"dual loop proves dependent theorem in round 2", dual_loop},
      {"end-to-end triage of every variant", triage},
      {"deterministic runs byte-identical", determinism},
  };
  int failed = 0;
  for (const auto& [name, fn] : criteria) {
    Criterion o{false, ""};
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.detail = std::string("threw: ") + e.what();
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS  " : "FAIL  ") << name << "  (" << o.detail << ")\n";
  }
  return failed;
}
