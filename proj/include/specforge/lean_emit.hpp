#pragma once

// Lean 4 emission. Tables become row/table structures, APIs become pure
// functions over explicit table states returning an inductive result type
// paired with every dependent table.

#include <string>
#include <vector>

#include "specforge/depgraph.hpp"
#include "specforge/ir.hpp"

namespace specforge {

struct FormalModule {
  enum class Kind { TablesDef, ApiDef, TheoremFile, Prelude };

  std::string name;        // Lean module name, e.g. `BankAccount.Withdrawal`
  Kind kind = Kind::ApiDef;
  std::string path;        // relative to the workspace root, e.g. `BankAccount/Withdrawal.lean`
  std::string sourceText;
  std::vector<std::string> imports;
};

const char* to_string(FormalModule::Kind kind);

/// Everything needed to lay out a workspace on disk.
struct LeanProject {
  std::string name;
  std::vector<FormalModule> modules;  // prelude, tables, APIs in topoOrder
  std::string lakefile;
  std::string toolchain;              // contents of `lean-toolchain`
  std::string rootModule;             // contents of `<P>.lean`
};

inline constexpr const char* kLeanToolchain = "leanprover/lean4:v4.9.0";
inline constexpr const char* kPreludePackage = "SpecforgePrelude";

struct EmitOptions {
  std::string preludePath = "../lean-prelude";
};

/// `-- Generated by specforge <version>. Content hash: <sha256 of body>` plus body.
std::string with_banner(const std::string& body);

/// Row and table structure declarations for one table. `name` is the table
/// name; path and imports are empty (the declarations live in `<P>/Tables.lean`).
FormalModule emit_table(const ir::TableSchema& schema);

/// `<P>/Tables.lean`: banner, prelude import, every table in topoOrder.
FormalModule emit_tables(const ir::Project& project, const DependencyGraph& graph);

/// One API module. Requires the tables module and every callee module in
/// `emitted`; throws EmitError otherwise.
FormalModule emit_api(const ir::Project& project, const ir::ApiDef& api, const DependencyGraph& graph,
                      const std::vector<FormalModule>& emitted);

LeanProject emit_project(const ir::Project& project, const DependencyGraph& graph,
                         const EmitOptions& options = {});

std::string tables_module_name(const std::string& project);
std::string api_module_name(const std::string& project, const std::string& api);
std::string module_path(const std::string& moduleName);

/// Lean signature pieces shared with theoremgen: the result tuple type of an
/// API, e.g. `WithdrawalResult × AccountTable × TransactionTable`.
std::string outcome_type(const ir::ApiDef& api, const std::vector<std::string>& tables);

}  // namespace specforge
