#pragma once

// Proof search: per-theorem compiler-guided refinement inside a global
// retry loop, tiered few-shot retrieval, and negation-driven
// counterexample search.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "specforge/lean_runner.hpp"
#include "specforge/theoremgen.hpp"

namespace specforge {

struct Budget {
  int attempts = 5;
  int refinements = 8;
  int rounds = 3;
  int batchSize = 8;
  int fewShotK = 3;

  int calls_per_theorem() const { return attempts * (1 + refinements); }
};

/// Throws ConfigError on negative fields or batchSize == 0.
void validate(const Budget& budget);

struct ProofExample {
  std::string theoremId;
  std::string scope;    // API for path theorems, table for table theorems
  std::string service;
  std::string project;
  bool negation = false;
  std::string statement;
  std::string proof;
  std::uint64_t seq = 0;  // insertion order
};

/// Append-only, safe for concurrent add and snapshot.
class ExamplePool {
 public:
  void add(ProofExample example);
  std::vector<ProofExample> snapshot() const;
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::vector<ProofExample> entries_;
};

ProofExample example_for(const TheoremSpec& theorem, const std::string& proof);

/// Tiers: same scope, same service, same project; most recent first within
/// a tier. Only examples of the same polarity (negation or not) and never
/// the theorem itself.
std::vector<ProofExample> select_examples(const TheoremSpec& theorem, const std::vector<ProofExample>& pool,
                                          int k);

struct RefinementContext {
  std::string priorScript;
  std::vector<Diagnostic> diagnostics;
  std::string goodPrefix;
  Diagnostic firstError;
  int errorLine = 1;  // first error, counted from the first script line
  std::optional<std::string> unsolvedGoal;
};

struct ProofRequest {
  std::string theoremId;
  std::string leanName;
  std::string sourceText;  // theorem file with `sorry`
  std::string statement;
  std::vector<std::string> unfoldDefs;
  std::vector<ProofExample> examples;
  int attemptIndex = 1;     // 1..A
  int refinementIndex = 0;  // 0..R
  std::optional<RefinementContext> refinement;

  /// Content hash: theorem text, examples and refinement context. Indices
  /// are not part of it.
  std::string hash() const;
};

struct TokenUsage {
  std::int64_t prompt = 0;
  std::int64_t completion = 0;
};

struct ProofResponse {
  std::string script;
  TokenUsage usage;
};

class ProverBackend {
 public:
  virtual ~ProverBackend() = default;
  virtual std::string id() const = 0;
  /// Throws BackendUnavailable when no candidate can be produced.
  virtual ProofResponse propose(const ProofRequest& request) = 0;
};

/// Scripts of the fixed escalation ladder, 1-based.
inline constexpr int kLadderRungs = 5;
std::string ladder_script(int rung, const std::vector<std::string>& unfoldDefs);

/// Rung = min(attemptIndex + refinementIndex, 5).
class TacticLadderBackend : public ProverBackend {
 public:
  std::string id() const override { return "tactic"; }
  ProofResponse propose(const ProofRequest& request) override;
};

/// Frozen proofs keyed by request hash, `id#a.r`, `id#a` or `id`, looked
/// up in that order.
class ReplayBackend : public ProverBackend {
 public:
  ReplayBackend() = default;
  /// Loads every `*.jsonl` corpus file in `dir` (lines of {key, proof}).
  void load_dir(const std::filesystem::path& dir);
  void load_file(const std::filesystem::path& file);
  void add(const std::string& key, const std::string& proof);
  std::size_t size() const { return proofs_.size(); }

  std::string id() const override { return "replay"; }
  ProofResponse propose(const ProofRequest& request) override;

 private:
  std::map<std::string, std::string> proofs_;
};

class FunctionBackend : public ProverBackend {
 public:
  using Fn = std::function<ProofResponse(const ProofRequest&)>;
  FunctionBackend(std::string id, Fn fn) : id_(std::move(id)), fn_(std::move(fn)) {}
  std::string id() const override { return id_; }
  ProofResponse propose(const ProofRequest& request) override { return fn_(request); }

 private:
  std::string id_;
  Fn fn_;
};

struct LlmConfig {
  std::string endpoint = "http://127.0.0.1:8000/v1";  // chat/completions is appended
  std::string model = "deepseek-r1";
  double temperature = 0.2;
  int maxTokens = 4096;
  int timeoutSeconds = 120;
  std::string apiKeyEnv = "SPECFORGE_API_KEY";
  std::string systemPrompt;  // empty means the built-in template
  std::optional<std::uint64_t> seed;
};

const std::string& default_system_prompt();

/// The user turn for a request: theorem file, plus the refinement context
/// when present.
std::string render_user_prompt(const ProofRequest& request);

/// Last fenced code block of a reply, reduced to its tactic block. Throws
/// BackendUnavailable when the reply has no fenced block.
std::string extract_proof(const std::string& reply);

/// OpenAI-style chat completions over HTTP(S).
class LlmBackend : public ProverBackend {
 public:
  explicit LlmBackend(LlmConfig config);
  std::string id() const override { return "llm:" + config_.model; }
  ProofResponse propose(const ProofRequest& request) override;

  /// The JSON request body sent for `request`.
  std::string request_body(const ProofRequest& request) const;

 private:
  LlmConfig config_;
};

enum class AttemptOutcome { Success, Fail, BackendError };

const char* to_string(AttemptOutcome o);

struct ProofAttempt {
  std::string theoremId;
  int round = 1;
  int attemptIndex = 1;
  int refinementIndex = 0;
  std::string backendId;
  std::string proofScript;
  std::vector<Diagnostic> diagnostics;
  AttemptOutcome outcome = AttemptOutcome::Fail;
  std::string error;
  TokenUsage usage;
};

/// One JSON object per attempt, keys in fixed order.
std::string attempt_json_line(const ProofAttempt& attempt);

struct ProverContext {
  ProverBackend& backend;
  LeanRunner& runner;
  const Workspace& workspace;
  ExamplePool& pool;
  Budget budget;
  int workers = 1;
};

/// Scratch file of a theorem, relative to the workspace root.
std::filesystem::path scratch_path(const TheoremSpec& theorem);

/// Writes the theorem with `script` to its scratch file and checks it.
/// Success requires zero Error diagnostics and no `sorry` in the script.
CheckResult check_proof(const TheoremSpec& theorem, const std::string& script, LeanRunner& runner,
                        const Workspace& workspace);

bool script_admits(const std::string& script);

struct ProveOutcome {
  bool proved = false;
  int attemptsUsed = 0;
  std::vector<ProofAttempt> log;
};

/// Runs `attempts` attempts starting at `firstAttempt`, each one initial
/// call plus up to R refinements. On success the theorem becomes Proved
/// and its proof enters the pool. `examples` is the few-shot snapshot;
/// when null the pool is read at call time.
ProveOutcome prove_theorem(TheoremSpec& theorem, ProverContext& ctx, int attempts = -1, int firstAttempt = 1,
                           int round = 1, const std::vector<ProofExample>* examples = nullptr);

struct SearchResult {
  int rounds = 0;
  std::size_t calls = 0;
  std::vector<ProofAttempt> log;
  std::map<std::string, int> provedInRound;
};

/// Global loop over the Unproved theorems in `theorems` (order kept).
SearchResult run_proof_search(std::vector<TheoremSpec*> theorems, ProverContext& ctx);
SearchResult run_proof_search(std::vector<TheoremSpec>& theorems, ProverContext& ctx);

/// For every Unproved non-negation theorem: negate, search for a proof of
/// the negation, then mark the original BugFound or Unresolved. Negations
/// are appended to `theorems`.
SearchResult search_counterexamples(std::vector<TheoremSpec>& theorems, ProverContext& ctx);

}  // namespace specforge
