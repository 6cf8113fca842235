#include <gtest/gtest.h>

#include <cstdlib>
#include <random>

#include "specforge/corpus.hpp"
#include "specforge/errors.hpp"
#include "specforge/lean_runner.hpp"
#include "support.hpp"

using namespace specforge;
namespace fs = std::filesystem;

TEST(Diagnostics, HeaderAndContinuation) {
  const std::string out =
      "P/Theorems/T.lean:12:2: error: unsolved goals\n"
      "x : Int\n"
      "⊢ x = x\n"
      "P/Theorems/T.lean:3:8: warning: declaration uses 'sorry'\n";
  const auto ds = parse_diagnostics(out);
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds[0].severity, Severity::Warning);
  EXPECT_EQ(ds[0].line, 3);
  EXPECT_EQ(ds[0].column, 8);
  EXPECT_EQ(ds[1].line, 12);
  EXPECT_EQ(ds[1].message, "unsolved goals\nx : Int\n⊢ x = x");
  ASSERT_TRUE(ds[1].unsolvedGoal.has_value());
  EXPECT_EQ(*ds[1].unsolvedGoal, "x : Int\n⊢ x = x");
  EXPECT_EQ(ds[1].file, "P/Theorems/T.lean");
}

TEST(Diagnostics, WindowsStyleFileWithColons) {
  const auto ds = parse_diagnostics("C:\\w\\T.lean:4:0: error: unknown identifier 'foo'\r\n");
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].file, "C:\\w\\T.lean");
  EXPECT_EQ(ds[0].line, 4);
  EXPECT_EQ(ds[0].message, "unknown identifier 'foo'");
}

TEST(Diagnostics, JsonLinesPreferred) {
  const std::string out =
      "{\"severity\":\"error\",\"fileName\":\"a.lean\",\"pos\":{\"line\":7,\"column\":4},"
      "\"data\":\"unsolved goals\\n⊢ False\"}\n"
      "a.lean:1:0: error: ignored because JSON is present\n";
  const auto ds = parse_diagnostics(out);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds[0].line, 7);
  EXPECT_EQ(ds[0].column, 4);
  EXPECT_EQ(ds[0].unsolvedGoal.value_or(""), "⊢ False");
}

TEST(Diagnostics, FuzzNeverThrows) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "ab:0123456789 \n{}\"errorwaning⊢";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    const int n = static_cast<int>(rng() % 200);
    for (int k = 0; k < n; ++k) s += alphabet[rng() % alphabet.size()];
    if (i % 3 == 0) s = "f.lean:" + std::to_string(rng() % 50) + ":" + s;
    EXPECT_NO_THROW({
      for (const auto& d : parse_diagnostics(s)) {
        EXPECT_GE(d.line, 1);
        EXPECT_GE(d.column, 0);
      }
    });
  }
}

TEST(Diagnostics, CheckResultSuccess) {
  EXPECT_TRUE(make_check_result({{Severity::Warning, "f", 1, 0, "w", std::nullopt}}, "").success);
  EXPECT_FALSE(make_check_result({{Severity::Error, "f", 1, 0, "e", std::nullopt}}, "").success);
  EXPECT_TRUE(make_check_result({}, "").success);
}

TEST(ErrorPrefix, LinesBeforeFirstError) {
  std::string script;
  for (int i = 1; i <= 12; ++i) script += "step" + std::to_string(i) + "\n";
  const std::vector<Diagnostic> ds = {{Severity::Error, "f", 20, 0, "later", std::nullopt},
                                      {Severity::Warning, "f", 2, 0, "w", std::nullopt},
                                      {Severity::Error, "f", 10, 3, "first", std::nullopt}};
  const ErrorPrefix p = first_error_prefix(script, ds);
  std::string want;
  for (int i = 1; i <= 9; ++i) want += "step" + std::to_string(i) + "\n";
  EXPECT_EQ(p.goodPrefix, want);
  EXPECT_EQ(p.firstError.message, "first");

  EXPECT_EQ(first_error_prefix(script, {{Severity::Error, "f", 1, 0, "x", std::nullopt}}).goodPrefix, "");
  EXPECT_THROW(first_error_prefix(script, {{Severity::Warning, "f", 1, 0, "x", std::nullopt}}), NoErrors);
  EXPECT_THROW(first_error_prefix(script, {}), NoErrors);

  // Offset of the script inside the file.
  EXPECT_EQ(first_error_prefix("a\nb\nc\n", {{Severity::Error, "f", 12, 0, "x", std::nullopt}}, 10).goodPrefix,
            "a\nb\n");
}

TEST(Workspace, ScaffoldAndFingerprint) {
  sftest::TempDir tmp("ws");
  const sftest::Loaded l = sftest::load("BankAccount");
  const Workspace ws = scaffold_workspace(l.emitted, tmp.path());
  EXPECT_TRUE(fs::exists(tmp.path() / "lakefile.lean"));
  EXPECT_EQ(sftest::read_file(tmp.path() / "lean-toolchain"), l.emitted.toolchain);
  EXPECT_TRUE(fs::exists(tmp.path() / "BankAccount.lean"));
  EXPECT_TRUE(fs::exists(tmp.path() / "BankAccount" / "Withdrawal.lean"));
  EXPECT_EQ(ws.fingerprint, workspace_fingerprint(l.emitted));
  EXPECT_NE(workspace_fingerprint(sftest::load("BankAccount", 2).emitted), ws.fingerprint);

  LeanProject dup = l.emitted;
  dup.modules.push_back(dup.modules.back());
  EXPECT_THROW(scaffold_workspace(dup, tmp.path() / "dup"), IoError);
}

TEST(Replay, HitMissStrict) {
  sftest::TempDir tmp("replay");
  Workspace ws{tmp.path(), "P", "fp"};
  sftest::write_file(tmp.path() / "a.lean", "theorem a : True := by trivial\n");
  sftest::write_file(tmp.path() / "b.lean", "theorem b : True := by sorry\n");

  ReplayRunner r;
  r.add({replay_key("fp", "theorem a : True := by trivial\n"), "a", "x", true, ""});
  r.add({replay_key("fp", "theorem b : True := by sorry\n"), "b", "y", true,
         "b.lean:1:8: warning: declaration uses 'sorry'\n"});
  EXPECT_EQ(r.size(), 2u);
  EXPECT_TRUE(r.check_file(ws, "a.lean").success);
  const CheckResult b = r.check_file(ws, "b.lean");
  EXPECT_TRUE(b.success);
  ASSERT_EQ(b.diagnostics.size(), 1u);
  EXPECT_EQ(b.diagnostics[0].severity, Severity::Warning);

  sftest::write_file(tmp.path() / "c.lean", "other\n");
  const CheckResult miss = r.check_file(ws, "c.lean");
  EXPECT_FALSE(miss.success);
  EXPECT_EQ(r.misses(), 1u);

  // Same content in a different workspace is a different key.
  Workspace other{tmp.path(), "P", "fp2"};
  EXPECT_FALSE(r.check_file(other, "a.lean").success);

  ReplayRunner strict(ReplayRunner::MissPolicy::Strict);
  EXPECT_THROW(strict.check_file(ws, "c.lean"), ReplayMiss);
}

TEST(Replay, FixtureRoundTrip) {
  sftest::TempDir tmp("fixture");
  ToolchainFixture f{"unit", false, "P", "fp", {{"k1", "t", "sorry", true, "raw\n"}}};
  save_toolchain_fixture(f, tmp.path() / "P.json");
  const ToolchainFixture g = load_toolchain_fixture(tmp.path() / "P.json");
  EXPECT_EQ(g.origin, "unit");
  EXPECT_FALSE(g.provisional);
  ASSERT_EQ(g.entries.size(), 1u);
  EXPECT_EQ(g.entries[0].rawOutput, "raw\n");
  ReplayRunner r;
  r.load_dir(tmp.path());
  EXPECT_EQ(r.size(), 1u);
  EXPECT_THROW(r.load_dir(tmp.path() / "missing"), IoError);
}

TEST(Process, EchoAndTimeout) {
  const ProcessResult ok = run_process({"/bin/sh", "-c", "echo out; echo err 1>&2; exit 3"}, ".", std::chrono::seconds(10));
  EXPECT_EQ(ok.exitCode, 3);
  EXPECT_FALSE(ok.timedOut);
  EXPECT_NE(ok.output.find("out"), std::string::npos);
  EXPECT_NE(ok.output.find("err"), std::string::npos);

  const auto t0 = std::chrono::steady_clock::now();
  const ProcessResult slow = run_process({"/bin/sh", "-c", "sleep 30"}, ".", std::chrono::seconds(1));
  EXPECT_TRUE(slow.timedOut);
  EXPECT_LT(std::chrono::steady_clock::now() - t0, std::chrono::seconds(10));
}

TEST(Lake, FakeToolchain) {
  sftest::TempDir tmp("lake");
  const fs::path lake = tmp.path() / "fake-lake";
  sftest::write_file(lake,
                     "#!/bin/sh\n"
                     "if [ \"$1\" = build ]; then echo built >> build.log; exit 0; fi\n"
                     "f=\"$4\"\n"
                     "if grep -q sorry \"$f\"; then\n"
                     "  printf '%s\\n' '{\"severity\":\"warning\",\"fileName\":\"'$f'\",\"pos\":{\"line\":1,\"column\":0},\"data\":\"declaration uses '\\''sorry'\\''\"}'\n"
                     "fi\n"
                     "if grep -q bad \"$f\"; then\n"
                     "  printf '%s\\n' '{\"severity\":\"error\",\"fileName\":\"'$f'\",\"pos\":{\"line\":2,\"column\":2},\"data\":\"unsolved goals\\n⊢ False\"}'\n"
                     "  exit 1\n"
                     "fi\n"
                     "exit 0\n");
  fs::permissions(lake, fs::perms::owner_all);
  ::setenv("SPECFORGE_LAKE", lake.c_str(), 1);

  ASSERT_TRUE(LakeRunner::find_lake().has_value());
  LakeRunner runner(std::chrono::seconds(10));
  const sftest::Loaded l = sftest::load("UserAuth");
  const Workspace ws = runner.scaffold(l.emitted, tmp.path() / "ws");
  sftest::write_file(ws.root / "ok.lean", "theorem t : True := by trivial\n");
  sftest::write_file(ws.root / "s.lean", "theorem t : True := by sorry\n");
  sftest::write_file(ws.root / "e.lean", "theorem t : False := by\n  bad\n");
  EXPECT_TRUE(runner.check_file(ws, "ok.lean").success);
  const CheckResult s = runner.check_file(ws, "s.lean");
  EXPECT_TRUE(s.success);
  ASSERT_EQ(s.diagnostics.size(), 1u);
  const CheckResult e = runner.check_file(ws, "e.lean");
  EXPECT_FALSE(e.success);
  ASSERT_EQ(e.diagnostics.size(), 1u);
  EXPECT_EQ(e.diagnostics[0].line, 2);
  EXPECT_EQ(e.diagnostics[0].unsolvedGoal.value_or(""), "⊢ False");
  // One build per workspace.
  EXPECT_EQ(sftest::read_file(ws.root / "build.log"), "built\n");

  ::setenv("SPECFORGE_LAKE", (tmp.path() / "nope").c_str(), 1);
  ::setenv("PATH", "/nonexistent", 1);
  EXPECT_FALSE(LakeRunner::find_lake().has_value());
  EXPECT_THROW(LakeRunner().scaffold(l.emitted, tmp.path() / "ws2"), ToolchainMissing);
  ::unsetenv("SPECFORGE_LAKE");
}
