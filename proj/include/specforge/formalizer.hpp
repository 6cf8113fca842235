#pragma once

// Raw-source ingestion is pluggable: a SourceFormalizer turns source text
// into IR, and formalize_source re-prompts it until the IR type-checks.

#include <map>
#include <string>
#include <vector>

#include "specforge/ir.hpp"

namespace specforge {

struct FormalizeRequest {
  std::string sourceText;
  const ir::Project* context = nullptr;  // tables and already formalized APIs
  int round = 0;                          // 0 = first try
  std::vector<ir::Diagnostic> previousDiagnostics;
};

class SourceFormalizer {
 public:
  virtual ~SourceFormalizer() = default;
  virtual std::string id() const = 0;
  /// Returns IR text (JSON or YAML ApiDef). Throws BackendUnavailable.
  virtual std::string formalize(const FormalizeRequest& request) = 0;
};

/// Canned IR keyed by the exact source text.
class ReplayFormalizer : public SourceFormalizer {
 public:
  void add(const std::string& sourceText, const std::string& irText) { canned_[sourceText] = irText; }
  std::string id() const override { return "replay"; }
  std::string formalize(const FormalizeRequest& request) override;

 private:
  std::map<std::string, std::string> canned_;
};

/// Parses and type-checks each reply against `context`; retries up to
/// `retries` more times, feeding back the diagnostics. Throws
/// FormalizationFailed (empty source, or retries exhausted).
ir::ApiDef formalize_source(const std::string& sourceText, const ir::Project& context, SourceFormalizer& backend,
                            int retries = 3);

}  // namespace specforge
