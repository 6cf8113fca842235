#include <gtest/gtest.h>

#include <fstream>
#include <map>
#include <set>

#include "json.hpp"
#include "specforge/corpus.hpp"
#include "specforge/fixturegen.hpp"
#include "specforge/pipeline.hpp"
#include "support.hpp"

using namespace specforge;
namespace fs = std::filesystem;

TEST(Prelude, PackageMatchesEmittedRequire) {
  const fs::path dir = SPECFORGE_PRELUDE_DIR;
  ASSERT_TRUE(fs::exists(dir / "lakefile.lean"));
  EXPECT_EQ(sftest::read_file(dir / "lean-toolchain"), std::string(kLeanToolchain) + "\n");
  const std::string lakefile = sftest::read_file(dir / "lakefile.lean");
  EXPECT_NE(lakefile.find(std::string("package ") + kPreludePackage), std::string::npos);
  EXPECT_NE(lakefile.find(std::string("lean_lib ") + kPreludePackage), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / (std::string(kPreludePackage) + ".lean")));
  EXPECT_EQ(sftest::read_file(dir / (std::string(kPreludePackage) + ".lean")).find("sorry"), std::string::npos);
}

TEST(Prelude, PipelineWorkspaceRequiresThePrelude) {
  sftest::TempDir tmp("prelude");
  PipelineConfig c;
  c.outDir = tmp.path();
  const PipelineResult r = run_pipeline(fixture_bundle("UserAuth"), c, Stage::Emit);
  const std::string lakefile = sftest::read_file(r.workspace / "lakefile.lean");
  const std::string want = std::string("require ") + kPreludePackage + " from \"" + SPECFORGE_PRELUDE_DIR + "\"";
  EXPECT_NE(lakefile.find(want), std::string::npos) << lakefile;
  EXPECT_EQ(sftest::read_file(r.workspace / "lean-toolchain"), sftest::read_file(fs::path(SPECFORGE_PRELUDE_DIR) / "lean-toolchain"));
  EXPECT_NE(sftest::read_file(r.workspace / "UserAuth" / "Prelude.lean").find(std::string("import ") + kPreludePackage),
            std::string::npos);
}

// Every corpus proof is hash-linked to a toolchain entry for the same
// theorem file.
TEST(Prelude, CorpusProofsAreLinkedToToolchainEntries) {
  for (const std::string project : {"UserAuth", "BankAccount"}) {
    std::vector<int> ids = {0};
    for (const auto& v : load_variants(project)) ids.push_back(v.variantId);
    for (int id : ids) {
      const sftest::Loaded l = sftest::load(project, id);
      const ToolchainFixture fx = load_toolchain_fixture(toolchain_fixture_path(fixtures_dir(), project, id));
      EXPECT_EQ(fx.fingerprint, workspace_fingerprint(l.emitted));
      std::map<std::string, bool> recorded;
      for (const auto& e : fx.entries) recorded[e.key] = e.success;
      const std::set<std::string> bugs = {"UserAuth.v1:UserAuth.UserRegister.path2", "UserAuth.v2:UserAuth.UserLogin.path2",
                                          "BankAccount.v1:BankAccount.BalanceQuery.path1",
                                          "BankAccount.v2:BankAccount.Deposit.path1",
                                          "BankAccount.v3:BankAccount.Withdrawal.path1"};
      std::map<std::string, TheoremSpec> byId;
      for (const auto& t : l.theorems) {
        byId[t.id] = t;
        byId[t.id + ".neg"] = negate_theorem(t);
      }
      std::ifstream in(replay_corpus_path(fixtures_dir(), project, id));
      std::string line;
      int n = 0;
      while (std::getline(in, line)) {
        const auto j = nlohmann::json::parse(line);
        const TheoremSpec& t = byId.at(j.at("key").get<std::string>());
        const std::string proof = j.at("proof").get<std::string>();
        EXPECT_FALSE(script_admits(proof)) << t.id;
        const auto hit = recorded.find(replay_key(fx.fingerprint, theorem_file(t, proof)));
        ASSERT_NE(hit, recorded.end()) << t.id;
        // The buggy theorem's recorded proof is a rejected one.
        EXPECT_EQ(hit->second, !bugs.count(fixture_stem(project, id) + ":" + t.id)) << t.id;
        ++n;
      }
      EXPECT_GT(n, 0) << fixture_stem(project, id);
    }
  }
}
