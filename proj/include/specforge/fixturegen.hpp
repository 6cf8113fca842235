#pragma once

// Provisional toolchain fixtures for the replay runner and the matching
// replay prover corpus, decided by the bounded semantic oracle. Every
// entry carries origin "bounded-semantic-oracle" until re-frozen from a
// real toolchain run.

#include <filesystem>
#include <string>
#include <vector>

#include "specforge/lean_runner.hpp"
#include "specforge/oracle.hpp"
#include "specforge/theoremgen.hpp"

namespace specforge {

inline constexpr const char* kOracleOrigin = "bounded-semantic-oracle";

struct CorpusProof {
  std::string key;
  std::string proof;
};

struct GeneratedFixtures {
  ToolchainFixture toolchain;
  std::vector<CorpusProof> corpus;
  std::vector<std::string> falsified;  // theorem ids with a counterexample
};

/// Ladder rung recorded as the proof of a true theorem.
int canonical_rung(const TheoremSpec& theorem);

/// `variant` 0 is the correct project.
GeneratedFixtures generate_fixtures(const std::string& project, int variant, const BoundedOptions& options = {});

/// `BankAccount`, `BankAccount.v2`.
std::string fixture_stem(const std::string& project, int variant);
std::filesystem::path toolchain_fixture_path(const std::filesystem::path& fixtures, const std::string& project,
                                             int variant);
std::filesystem::path replay_corpus_path(const std::filesystem::path& fixtures, const std::string& project,
                                         int variant);

void save_corpus(const std::vector<CorpusProof>& corpus, const std::filesystem::path& file);

}  // namespace specforge
