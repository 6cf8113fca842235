#pragma once

// parse -> deps -> emit -> gen-theorems -> prove -> negate -> classify,
// with proof-stage results cached on disk under a content hash of the
// bundle, configuration, version and variant.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "specforge/depgraph.hpp"
#include "specforge/ir.hpp"
#include "specforge/lean_emit.hpp"
#include "specforge/lean_runner.hpp"
#include "specforge/prover.hpp"
#include "specforge/report.hpp"
#include "specforge/theoremgen.hpp"

namespace specforge {

enum class Stage { Parse, Deps, Emit, GenTheorems, Prove, Negate, Classify };

const char* to_string(Stage s);
Stage stage_from_string(const std::string& s);

struct PipelineConfig {
  Budget budget;
  LlmConfig llm;
  Prices prices;
  std::string backend = "replay";  // replay | tactic | llm
  std::string runner = "replay";   // replay | lake
  int workers = 1;
  bool deterministic = false;
  std::uint64_t seed = 7;
  int variant = 0;
  std::size_t pathCap = 256;
  int checkTimeoutSeconds = 60;
  std::filesystem::path fixturesDir;   // empty: the shipped fixtures
  std::filesystem::path replayCorpus;  // empty: replay/<stem>.jsonl under fixturesDir
  std::string preludePath;             // empty: the source tree's lean-prelude
  std::filesystem::path outDir = "specforge-out";
  bool cache = true;
};

/// Recognised keys: endpoint, model, temperature, maxTokens, attempts,
/// refinements, rounds, batch, fewshot, workers, seed, backend, runner,
/// variant, pathCap, timeout, fixtures, replayCorpus, prelude, out, cache,
/// prices {prompt, completion, currency}. Throws ConfigError on unknown
/// keys or wrong types.
void apply_config(PipelineConfig& config, const nlohmann::json& j);
PipelineConfig load_config(const std::filesystem::path& file);

/// Canonical JSON of every setting that can change results.
nlohmann::json result_affecting(const PipelineConfig& config);

std::filesystem::path effective_fixtures_dir(const PipelineConfig& config);

std::unique_ptr<ProverBackend> make_backend(const PipelineConfig& config, const std::string& project);
std::unique_ptr<LeanRunner> make_runner(const PipelineConfig& config);

/// A bundle directory, or the name of a shipped fixture.
std::filesystem::path resolve_bundle(const std::string& bundle);

struct StageRecord {
  Stage stage;
  bool cached = false;
};

struct PipelineResult {
  ir::Project spec;  // as parsed
  ir::Project impl;  // with the variant applied
  DependencyGraph graph;
  LeanProject emitted;
  std::vector<TheoremSpec> theorems;  // negations appended after the negate stage
  std::vector<ProofAttempt> log;
  VerificationReport report;
  std::vector<StageRecord> stages;
  std::string cacheKey;
  std::filesystem::path workspace;
};

/// Runs every stage up to and including `until`, writing stage artifacts
/// to config.outDir. Errors are rethrown as StageError with the stage name.
PipelineResult run_pipeline(const std::filesystem::path& bundle, const PipelineConfig& config,
                            Stage until = Stage::Classify);

nlohmann::json deps_json(const DependencyGraph& graph);
nlohmann::json theorems_json(const std::vector<TheoremSpec>& theorems);

/// Inverse of attempt_json_line, up to diagnostic file names and goals.
ProofAttempt attempt_from_json(const nlohmann::json& j);

}  // namespace specforge
