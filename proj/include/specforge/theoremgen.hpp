#pragma once

// Requirements are the control paths of an API, computed by symbolic
// execution over Terms. Each becomes an input/output theorem; table
// properties summarize how interacting APIs change a table's row count.

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "specforge/depgraph.hpp"
#include "specforge/lean_emit.hpp"
#include "specforge/term.hpp"

namespace specforge {

struct Binder {
  enum class Origin { Param, State, CalleePayload, CalleeState };
  std::string name;
  TermType type;
  Origin origin = Origin::Param;
  bool operator==(const Binder&) const = default;
};

struct Premise {
  enum class Kind { Branch, CalleeVariant };
  Kind kind = Kind::Branch;

  // Branch: `cond` took the `holds` side.
  TermPtr cond;
  bool holds = true;

  // CalleeVariant: `call` returned `variant` with `pattern` as the whole result.
  std::string callee;
  std::string variant;
  TermPtr call;
  TermPtr pattern;

  std::string irText;  // e.g. `amount > 0`, `not (balance >= amount)`, `BalanceQuery(userId) = Success(balance)`

  /// The Bool-typed proposition this premise asserts.
  TermPtr proposition() const;
};

struct TableWriteEffect {
  std::string table;
  ir::WriteOp::Kind kind;
  TermPtr predicate;  // Update/Delete
  bool operator==(const TableWriteEffect&) const = default;
};

struct RequirementOutcome {
  std::string variant;
  bool success = false;
  std::vector<TermPtr> payload;
  std::vector<std::string> tables;     // dependent tables, topoOrder
  std::vector<TermPtr> finalStates;    // one per table
  std::vector<TableWriteEffect> writes;
  bool calleeWrites = false;           // some callee on this path writes a table
};

struct Requirement {
  std::string project;
  std::string api;
  int pathId = 1;
  std::vector<Premise> premises;
  std::vector<Binder> calleeBinders;   // binders introduced by callee results
  RequirementOutcome outcome;
  std::string prose;
};

struct EnumerateOptions {
  std::size_t pathCap = 256;
};

/// One Requirement per feasible leaf of the branch tree. Pruning is purely
/// syntactic: a condition already decided on the path, or a structurally
/// equal callee call already matched, only follows the consistent side.
/// Throws PathExplosion beyond the cap.
std::vector<Requirement> enumerate_paths(const ir::Project& project, const ir::ApiDef& api,
                                         const DependencyGraph& graph, const EnumerateOptions& options = {});

// ---------------------------------------------------------------------------
// Theorems

enum class TheoremKind { ApiPath, TableProp, Negation };
enum class TheoremStatus { Unproved, Proved, BugFound, Unresolved };

const char* to_string(TheoremKind kind);
const char* to_string(TheoremStatus status);
std::optional<TheoremStatus> theorem_status_from_string(const std::string& text);

struct TheoremSpec {
  std::string id;
  TheoremKind kind = TheoremKind::ApiPath;
  std::string project;
  std::string api;
  std::string table;      // TableProp (and its negation)
  std::string service;    // owning service of the API
  std::string leanName;
  std::vector<Binder> binders;
  std::vector<TermPtr> hypotheses;
  std::vector<std::string> hypothesisNames;
  TermPtr conclusion;
  std::string conclusionText;  // Custom table properties carry Lean text instead of a Term
  std::string prose;
  std::string statement;  // `theorem <name> ... :=`
  std::string moduleName;
  std::string path;
  std::vector<std::string> imports;
  std::string sourceText;     // with `sorry`
  int proofLineOffset = 0;    // 1-based line of the first proof line in sourceText
  std::string negationOf;     // Negation only
  std::vector<std::string> unfoldDefs;  // definitions a proof may need to unfold
  TheoremStatus status = TheoremStatus::Unproved;
  std::string proof;
};

/// Renders the theorem file with `proofScript` as the tactic block body.
std::string theorem_file(const TheoremSpec& spec, const std::string& proofScript);

/// Initial proof state as the toolchain prints it: hypotheses, then `⊢ goal`.
std::string goal_text(const TheoremSpec& spec);

/// `BankAccount.Withdrawal.path1` -> `Withdrawal_path1`.
std::string theorem_lean_name(const std::string& id);

TheoremSpec formalize_api_theorem(const Requirement& req, const ir::Project& project, const DependencyGraph& graph,
                                  const LeanProject& emitted);

struct TableProperty {
  enum class Kind { PreservedAlways, CountDeltaOnSuccess, Custom };
  enum class Source { RuleBased, Summarizer };
  std::string table;
  std::string statement;
  Kind kind = Kind::PreservedAlways;
  int delta = 0;                 // CountDeltaOnSuccess: +1 or -1
  std::vector<std::string> apis; // sorted
  Source source = Source::RuleBased;
  std::string customProp;        // Custom: Lean proposition text over the API binders
};

const char* to_string(TableProperty::Kind kind);

/// Optional LLM summarizer. Its properties are unvalidated hypotheses.
class Summarizer {
 public:
  virtual ~Summarizer() = default;
  virtual std::vector<TableProperty> summarize(const ir::TableSchema& table,
                                               const std::vector<const ir::ApiDef*>& apis) = 0;
};

/// Rule-based properties for `table` over the APIs with a direct edge to it,
/// grouped by kind (+1, -1, preserved), plus whatever `summarizer` adds.
std::vector<TableProperty> summarize_table_properties(const ir::Project& project, const ir::TableSchema& table,
                                                      const DependencyGraph& graph, Summarizer* summarizer = nullptr);

/// `propIndex` is the 1-based position of `prop` among the table's properties.
TheoremSpec formalize_table_theorem(const TableProperty& prop, int propIndex, const ir::ApiDef& api,
                                    const ir::Project& project, const DependencyGraph& graph,
                                    const LeanProject& emitted);

/// `∀ x, H1 → … → Hn → C` becomes `∃ x, H1 ∧ … ∧ Hn ∧ ¬C`. Throws AlreadyNegated.
TheoremSpec negate_theorem(const TheoremSpec& t);

/// All API path theorems (APIs in topoOrder) then all table theorems (tables
/// in topoOrder). Theorems come from `spec`; `emitted` must carry the same
/// API signatures.
std::vector<TheoremSpec> generate_theorems(const ir::Project& project, const DependencyGraph& graph,
                                           const LeanProject& emitted, const EnumerateOptions& options = {});

/// Lean literal for a concrete value used as an existential witness.
std::string lean_literal(const CValue& value, const TermType& type, const ir::Project& project);

}  // namespace specforge
