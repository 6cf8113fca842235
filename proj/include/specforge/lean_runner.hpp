#pragma once

// Toolchain access. The prover only sees LeanRunner; LakeRunner drives the
// real toolchain, ReplayRunner answers from frozen results keyed by content.

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <set>
#include <string>
#include <vector>

#include "specforge/lean_emit.hpp"

namespace specforge {

enum class Severity { Error, Warning, Info };

const char* to_string(Severity s);

struct Diagnostic {
  Severity severity = Severity::Error;
  std::string file;
  int line = 1;
  int column = 0;
  std::string message;
  std::optional<std::string> unsolvedGoal;

  bool operator==(const Diagnostic&) const = default;
};

struct CheckResult {
  bool success = false;
  std::vector<Diagnostic> diagnostics;
  std::chrono::milliseconds elapsed{0};
  std::string rawOutput;
};

inline constexpr const char* kUnsolvedGoalsMarker = "unsolved goals";

/// Parses toolchain output. JSON-lines messages (`lean --json`) are used
/// when present, else `file:line:col: severity: message` headers with
/// continuation lines. Never throws; unparseable text is ignored.
std::vector<Diagnostic> parse_diagnostics(const std::string& output);

/// success == no Error diagnostics.
CheckResult make_check_result(std::vector<Diagnostic> diagnostics, std::string rawOutput,
                              std::chrono::milliseconds elapsed = {});

struct ErrorPrefix {
  std::string goodPrefix;
  Diagnostic firstError;
  std::optional<std::string> unsolvedGoal;
};

/// `scriptFirstLine` is the file line holding the first script line.
/// goodPrefix = script lines strictly before the first Error. Throws NoErrors.
ErrorPrefix first_error_prefix(const std::string& script, const std::vector<Diagnostic>& diagnostics,
                               int scriptFirstLine = 1);

struct Workspace {
  std::filesystem::path root;
  std::string project;
  std::string fingerprint;  // hash of every emitted module, name and text
};

/// Fingerprint of an emitted project; also the replay namespace.
std::string workspace_fingerprint(const LeanProject& project);

/// Writes manifest, toolchain pin, root module and every module under
/// `dir`. Throws IoError on duplicate module names or write failure.
Workspace scaffold_workspace(const LeanProject& project, const std::filesystem::path& dir);

class LeanRunner {
 public:
  virtual ~LeanRunner() = default;
  virtual std::string id() const = 0;
  virtual Workspace scaffold(const LeanProject& project, const std::filesystem::path& dir) {
    return scaffold_workspace(project, dir);
  }
  /// `file` is relative to the workspace root and must already exist.
  virtual CheckResult check_file(const Workspace& workspace, const std::filesystem::path& file) = 0;
};

/// Replay key of a file checked in `workspace`.
std::string replay_key(const std::string& fingerprint, const std::string& fileContent);

struct ReplayEntry {
  std::string key;
  std::string theoremId;
  std::string label;
  bool success = false;
  std::string rawOutput;
};

struct ToolchainFixture {
  std::string origin;
  bool provisional = true;
  std::string project;
  std::string fingerprint;
  std::vector<ReplayEntry> entries;
};

ToolchainFixture load_toolchain_fixture(const std::filesystem::path& file);
void save_toolchain_fixture(const ToolchainFixture& fixture, const std::filesystem::path& file);

class ReplayRunner : public LeanRunner {
 public:
  enum class MissPolicy { Strict, FailClosed };

  explicit ReplayRunner(MissPolicy policy = MissPolicy::FailClosed);

  /// Loads every `*.json` fixture in `dir`.
  void load_dir(const std::filesystem::path& dir);
  void add(const ReplayEntry& entry);
  std::size_t size() const;
  std::size_t misses() const;

  std::string id() const override { return "replay"; }
  CheckResult check_file(const Workspace& workspace, const std::filesystem::path& file) override;

 private:
  MissPolicy policy_;
  mutable std::mutex mu_;
  std::map<std::string, ReplayEntry> entries_;
  std::size_t misses_ = 0;
};

/// Real toolchain: `lake env lean --json <file>` inside the workspace after
/// one `lake build`. Binary from SPECFORGE_LAKE, else `lake` on PATH.
class LakeRunner : public LeanRunner {
 public:
  explicit LakeRunner(std::chrono::seconds timeout = std::chrono::seconds(60), std::size_t maxJobs = 2);

  static std::optional<std::filesystem::path> find_lake();

  std::string id() const override { return "lake"; }
  Workspace scaffold(const LeanProject& project, const std::filesystem::path& dir) override;
  CheckResult check_file(const Workspace& workspace, const std::filesystem::path& file) override;

 private:
  std::chrono::seconds timeout_;
  std::unique_ptr<std::counting_semaphore<>> jobs_;
  std::mutex mu_;
  std::set<std::filesystem::path> built_;
};

struct ProcessResult {
  int exitCode = -1;
  bool timedOut = false;
  std::string output;  // stdout and stderr interleaved
};

/// Runs `argv` in `cwd`, killing it after `timeout`.
ProcessResult run_process(const std::vector<std::string>& argv, const std::filesystem::path& cwd,
                          std::chrono::seconds timeout);

}  // namespace specforge
