#pragma once

// Bounded semantic checking of theorems against the reference interpreter:
// literal-aware random assignments, callee binders bound by matching, and
// counterexample witnesses rendered as Lean proofs.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "specforge/interpreter.hpp"
#include "specforge/term.hpp"
#include "specforge/theoremgen.hpp"

namespace specforge {

struct Domains {
  std::vector<std::int64_t> ints;
  std::vector<std::string> strs;
  int maxRows = 3;
};

/// Base values {-1, 0, 1, 2} and {"", "a", "b"}, plus every literal `l` in
/// the given APIs and their callees (ints as l-1, l, l+1).
Domains literal_domains(const ir::Project& project, const std::vector<std::string>& apis);

class AssignmentSampler {
 public:
  AssignmentSampler(const ir::Project& project, Domains domains, std::uint64_t seed);

  Value value(ir::ColType type);
  TableState state(const ir::TableSchema& schema, const std::vector<Value>& pool);

  /// Samples every Param and State binder; callee binders are left unbound.
  CEnv sample(const std::vector<Binder>& binders);

 private:
  const ir::Project& project_;
  Domains domains_;
  std::mt19937_64 rng_;
};

/// Evaluates `hyps` in order. Equations between a Call and a pattern with
/// unbound variables bind those variables by matching. False as soon as a
/// hypothesis fails.
bool hypotheses_hold(const TermEvaluator& eval, const std::vector<TermPtr>& hyps, CEnv& env);

struct BoundedOptions {
  std::size_t samples = 4000;
  std::uint64_t seed = 7;
};

struct BoundedVerdict {
  bool checkable = true;
  bool holds = true;             // no counterexample among the samples
  std::size_t samples = 0;
  std::size_t satisfying = 0;    // samples meeting the hypotheses
  std::size_t evalErrors = 0;    // samples skipped on evaluation errors (overflow)
  std::optional<CEnv> counterexample;  // smallest one found
};

/// Checks `hyps -> conclusion` of a non-negation theorem on `impl`.
/// Not checkable when no sample meets the hypotheses.
BoundedVerdict bounded_check(const Interpreter& impl, const TheoremSpec& theorem, const BoundedOptions& options = {});

/// `exact ⟨w1, ..., by decide⟩` for a negation, from a counterexample of
/// the original theorem.
std::string witness_proof(const TheoremSpec& negation, const CEnv& witness, const ir::Project& project);

}  // namespace specforge
