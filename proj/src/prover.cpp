#include "specforge/prover.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "specforge/errors.hpp"
#include "specforge/hash.hpp"

namespace specforge {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

void validate(const Budget& b) {
  if (b.attempts < 0 || b.refinements < 0 || b.rounds < 0 || b.batchSize < 0 || b.fewShotK < 0) {
    throw ConfigError("budget fields must be non-negative");
  }
  if (b.batchSize == 0) throw ConfigError("batch size must be positive");
}

// ---------------------------------------------------------------------------
// Example pool

void ExamplePool::add(ProofExample example) {
  std::lock_guard lock(mu_);
  example.seq = entries_.size();
  entries_.push_back(std::move(example));
}

std::vector<ProofExample> ExamplePool::snapshot() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::size_t ExamplePool::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

namespace {
std::string scope_of(const TheoremSpec& t) { return t.table.empty() ? t.api : t.table; }
}  // namespace

ProofExample example_for(const TheoremSpec& theorem, const std::string& proof) {
  ProofExample e;
  e.theoremId = theorem.id;
  e.scope = scope_of(theorem);
  e.service = theorem.service;
  e.project = theorem.project;
  e.negation = theorem.kind == TheoremKind::Negation;
  e.statement = theorem.statement;
  e.proof = proof;
  return e;
}

std::vector<ProofExample> select_examples(const TheoremSpec& theorem, const std::vector<ProofExample>& pool,
                                          int k) {
  const bool negation = theorem.kind == TheoremKind::Negation;
  const std::string scope = scope_of(theorem);
  std::vector<const ProofExample*> tiers[3];
  for (const auto& e : pool) {
    if (e.theoremId == theorem.id || e.negation != negation || e.project != theorem.project) continue;
    int tier = e.scope == scope ? 0 : e.service == theorem.service ? 1 : 2;
    tiers[tier].push_back(&e);
  }
  std::vector<ProofExample> out;
  for (auto& tier : tiers) {
    std::stable_sort(tier.begin(), tier.end(), [](auto* a, auto* b) { return a->seq > b->seq; });
    for (const auto* e : tier) {
      if (static_cast<int>(out.size()) >= k) return out;
      out.push_back(*e);
    }
  }
  return out;
}

std::string ProofRequest::hash() const {
  Sha256Builder h;
  h.add("proof-request").add(sourceText);
  for (const auto& e : examples) h.add(e.theoremId).add(e.proof);
  if (refinement) {
    h.add("refine").add(refinement->priorScript).add(refinement->goodPrefix);
    h.add(std::to_string(refinement->errorLine)).add(refinement->firstError.message);
    h.add(refinement->unsolvedGoal.value_or(""));
  }
  return h.hex();
}

const char* to_string(AttemptOutcome o) {
  switch (o) {
    case AttemptOutcome::Success: return "Success";
    case AttemptOutcome::Fail: return "Fail";
    case AttemptOutcome::BackendError: return "BackendError";
  }
  return "?";
}

std::string attempt_json_line(const ProofAttempt& a) {
  ojson j;
  j["theoremId"] = a.theoremId;
  j["round"] = a.round;
  j["attempt"] = a.attemptIndex;
  j["refinement"] = a.refinementIndex;
  j["backend"] = a.backendId;
  j["outcome"] = to_string(a.outcome);
  j["script"] = a.proofScript;
  ojson diags = ojson::array();
  for (const auto& d : a.diagnostics) {
    diags.push_back({{"severity", to_string(d.severity)}, {"line", d.line}, {"column", d.column}, {"message", d.message}});
  }
  j["diagnostics"] = diags;
  if (!a.error.empty()) j["error"] = a.error;
  j["usage"] = {{"prompt", a.usage.prompt}, {"completion", a.usage.completion}};
  return j.dump();
}

// ---------------------------------------------------------------------------
// Checking

fs::path scratch_path(const TheoremSpec& theorem) {
  return fs::path(".specforge") / "scratch" / (theorem.leanName + ".lean");
}

bool script_admits(const std::string& script) {
  for (const char* word : {"sorry", "admit"}) {
    const std::string w = word;
    for (auto pos = script.find(w); pos != std::string::npos; pos = script.find(w, pos + 1)) {
      auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\''; };
      bool before = pos == 0 || !ident(script[pos - 1]);
      bool after = pos + w.size() >= script.size() || !ident(script[pos + w.size()]);
      if (before && after) return true;
    }
  }
  return false;
}

CheckResult check_proof(const TheoremSpec& theorem, const std::string& script, LeanRunner& runner,
                        const Workspace& workspace) {
  const fs::path rel = scratch_path(theorem);
  const fs::path full = workspace.root / rel;
  std::error_code ec;
  fs::create_directories(full.parent_path(), ec);
  {
    std::ofstream out(full, std::ios::binary);
    if (!out) throw IoError("cannot write " + full.string());
    out << theorem_file(theorem, script);
  }
  return runner.check_file(workspace, rel);
}

// ---------------------------------------------------------------------------
// Per-theorem loop

namespace {

RefinementContext refinement_for(const TheoremSpec& t, const std::string& script, const CheckResult& cr) {
  RefinementContext rc;
  rc.priorScript = script;
  rc.diagnostics = cr.diagnostics;
  try {
    ErrorPrefix ep = first_error_prefix(script, cr.diagnostics, t.proofLineOffset);
    rc.goodPrefix = ep.goodPrefix;
    rc.firstError = ep.firstError;
    rc.errorLine = std::max(1, ep.firstError.line - t.proofLineOffset + 1);
    rc.unsolvedGoal = ep.unsolvedGoal;
  } catch (const NoErrors&) {
    // Compiles but admits: resume from the line that admits.
    std::istringstream in(script);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (script_admits(line)) break;
      rc.goodPrefix += line + "\n";
    }
    rc.errorLine = n;
    rc.firstError.severity = Severity::Error;
    rc.firstError.line = t.proofLineOffset + n - 1;
    rc.firstError.message = "proof is incomplete: it uses sorry";
  }
  return rc;
}

}  // namespace

ProveOutcome prove_theorem(TheoremSpec& theorem, ProverContext& ctx, int attempts, int firstAttempt, int round,
                           const std::vector<ProofExample>* examples) {
  ProveOutcome out;
  const Budget& b = ctx.budget;
  if (attempts < 0) attempts = b.attempts - (firstAttempt - 1);
  attempts = std::clamp(attempts, 0, std::max(0, b.attempts - (firstAttempt - 1)));
  if (attempts == 0) return out;

  ProofRequest base;
  base.theoremId = theorem.id;
  base.leanName = theorem.leanName;
  base.sourceText = theorem.sourceText;
  base.statement = theorem.statement;
  base.unfoldDefs = theorem.unfoldDefs;
  base.examples = select_examples(theorem, examples ? *examples : ctx.pool.snapshot(), b.fewShotK);

  for (int a = firstAttempt; a < firstAttempt + attempts; ++a) {
    ++out.attemptsUsed;
    ProofRequest req = base;
    req.attemptIndex = a;
    for (int r = 0; r <= b.refinements; ++r) {
      req.refinementIndex = r;
      ProofAttempt pa;
      pa.theoremId = theorem.id;
      pa.round = round;
      pa.attemptIndex = a;
      pa.refinementIndex = r;
      pa.backendId = ctx.backend.id();
      ProofResponse resp;
      try {
        resp = ctx.backend.propose(req);
      } catch (const BackendUnavailable& e) {
        pa.outcome = AttemptOutcome::BackendError;
        pa.error = e.what();
        out.log.push_back(std::move(pa));
        break;
      }
      pa.proofScript = resp.script;
      pa.usage = resp.usage;
      CheckResult cr = check_proof(theorem, resp.script, ctx.runner, ctx.workspace);
      pa.diagnostics = cr.diagnostics;
      if (cr.success && !script_admits(resp.script)) {
        pa.outcome = AttemptOutcome::Success;
        out.log.push_back(std::move(pa));
        theorem.status = TheoremStatus::Proved;
        theorem.proof = resp.script;
        ctx.pool.add(example_for(theorem, resp.script));
        out.proved = true;
        return out;
      }
      pa.outcome = AttemptOutcome::Fail;
      out.log.push_back(std::move(pa));
      if (r < b.refinements) req.refinement = refinement_for(theorem, resp.script, cr);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Global loop

SearchResult run_proof_search(std::vector<TheoremSpec*> theorems, ProverContext& ctx) {
  validate(ctx.budget);
  const Budget& b = ctx.budget;
  SearchResult result;
  std::map<std::string, int> used;
  bool flush = false;
  for (int round = 1; round <= b.rounds; ++round) {
    std::vector<TheoremSpec*> active;
    for (auto* t : theorems) {
      if (t->status == TheoremStatus::Unproved && used[t->id] < b.attempts) active.push_back(t);
    }
    if (active.empty()) break;
    result.rounds = round;
    const bool final = flush || round == b.rounds;
    bool progress = false;
    for (std::size_t start = 0; start < active.size(); start += b.batchSize) {
      const std::size_t end = std::min(active.size(), start + static_cast<std::size_t>(b.batchSize));
      const std::vector<ProofExample> snapshot = ctx.pool.snapshot();
      std::vector<ProveOutcome> outcomes(end - start);
      auto work = [&](std::size_t i) {
        TheoremSpec& t = *active[start + i];
        const int remaining = b.attempts - used[t.id];
        const int alloc = final ? remaining : (remaining + (b.rounds - round)) / (b.rounds - round + 1);
        outcomes[i] = prove_theorem(t, ctx, alloc, used[t.id] + 1, round, &snapshot);
      };
      const std::size_t workers = std::clamp<std::size_t>(ctx.workers, 1, end - start);
      if (workers == 1) {
        for (std::size_t i = 0; i < end - start; ++i) work(i);
      } else {
        // used[] is read-only inside the batch; every id is already present.
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        std::exception_ptr failure;
        std::mutex failureMu;
        for (std::size_t w = 0; w < workers; ++w) {
          pool.emplace_back([&] {
            for (std::size_t i = next++; i < end - start; i = next++) {
              try {
                work(i);
              } catch (...) {
                std::lock_guard lock(failureMu);
                if (!failure) failure = std::current_exception();
              }
            }
          });
        }
        for (auto& th : pool) th.join();
        if (failure) std::rethrow_exception(failure);
      }
      for (std::size_t i = 0; i < outcomes.size(); ++i) {
        TheoremSpec& t = *active[start + i];
        used[t.id] += outcomes[i].attemptsUsed;
        result.calls += outcomes[i].log.size();
        for (auto& a : outcomes[i].log) result.log.push_back(std::move(a));
        if (outcomes[i].proved) {
          progress = true;
          result.provedInRound[t.id] = round;
        }
      }
    }
    if (!progress) {
      if (final) break;
      flush = true;
    }
  }
  return result;
}

SearchResult run_proof_search(std::vector<TheoremSpec>& theorems, ProverContext& ctx) {
  std::vector<TheoremSpec*> ptrs;
  for (auto& t : theorems) ptrs.push_back(&t);
  return run_proof_search(std::move(ptrs), ctx);
}

SearchResult search_counterexamples(std::vector<TheoremSpec>& theorems, ProverContext& ctx) {
  std::vector<TheoremSpec> negations;
  std::vector<std::size_t> originals;
  for (std::size_t i = 0; i < theorems.size(); ++i) {
    TheoremSpec& t = theorems[i];
    if (t.kind == TheoremKind::Negation || t.status != TheoremStatus::Unproved) continue;
    if (!t.conclusion) {
      t.status = TheoremStatus::Unresolved;
      continue;
    }
    negations.push_back(negate_theorem(t));
    originals.push_back(i);
  }
  SearchResult result = run_proof_search(negations, ctx);
  for (std::size_t i = 0; i < negations.size(); ++i) {
    TheoremSpec& t = theorems[originals[i]];
    t.status = negations[i].status == TheoremStatus::Proved ? TheoremStatus::BugFound : TheoremStatus::Unresolved;
  }
  for (auto& n : negations) theorems.push_back(std::move(n));
  return result;
}

}  // namespace specforge
