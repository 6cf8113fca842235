#pragma once

// Triage of theorem outcomes, tallies, bug list, cost and stage warnings,
// rendered as aligned text or JSON.

#include <optional>
#include <string>
#include <vector>

#include "specforge/prover.hpp"
#include "specforge/theoremgen.hpp"

namespace specforge {

enum class Triage { Verified, BugFound, Unresolved };

const char* to_string(Triage t);

struct TheoremResult {
  std::string id;
  TheoremKind kind = TheoremKind::ApiPath;
  std::string api;
  std::string table;
  Triage triage = Triage::Unresolved;
  std::string proof;
  std::string negationId;  // BugFound only
  std::string witness;     // BugFound only
};

struct Tally {
  std::string name;
  int proved = 0;
  int unproved = 0;

  int total() const { return proved + unproved; }
  /// Percent proved, none for an empty tally.
  std::optional<double> percent() const;
};

struct BugEntry {
  std::string theoremId;
  std::string negationId;
  std::string api;
  std::string witness;
  std::string prose;
};

struct Prices {
  double promptPerMillion = 0;
  double completionPerMillion = 0;
  std::string currency = "USD";
};

struct CostLedger {
  std::vector<TokenUsage> calls;
  Prices prices;
  std::int64_t promptTokens = 0;
  std::int64_t completionTokens = 0;
  double total = 0;
  int apiCount = 0;
  std::optional<double> perApi;
};

CostLedger make_cost_ledger(const std::vector<ProofAttempt>& log, const Prices& prices, int apiCount);

struct StageWarning {
  std::string stage;
  std::string subject;
  std::string message;
};

struct VerificationReport {
  std::string project;
  int variant = 0;
  std::vector<TheoremResult> theorems;  // non-negation theorems, input order
  Tally apiProof{"API"};
  Tally tableProof{"Table"};
  std::vector<Tally> perApi;
  std::vector<Tally> perTable;
  std::vector<BugEntry> bugs;
  CostLedger cost;
  std::vector<StageWarning> warnings;
  int verified = 0;
  int bugsFound = 0;
  int unresolved = 0;
};

/// Proved -> Verified, proved negation -> BugFound, otherwise Unresolved.
/// Throws InconsistentState when a theorem and its negation are both
/// proved, and when a BugFound theorem has no proved negation.
VerificationReport classify(const std::string& project, const std::vector<TheoremSpec>& theorems);

enum class ReportFormat { Text, Json };

/// Byte-deterministic.
std::string render(const VerificationReport& report, ReportFormat format);

std::string format_percent(const std::optional<double>& p);

}  // namespace specforge
