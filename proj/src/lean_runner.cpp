#include "specforge/lean_runner.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specforge/errors.hpp"
#include "specforge/hash.hpp"

namespace specforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* to_string(Severity s) {
  switch (s) {
    case Severity::Error: return "error";
    case Severity::Warning: return "warning";
    case Severity::Info: return "info";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Diagnostics

namespace {

std::optional<Severity> severity_from(std::string_view word) {
  if (word == "error") return Severity::Error;
  if (word == "warning") return Severity::Warning;
  if (word == "info" || word == "information") return Severity::Info;
  return std::nullopt;
}

std::optional<std::string> goal_of(const std::string& message) {
  auto pos = message.find(kUnsolvedGoalsMarker);
  if (pos == std::string::npos) return std::nullopt;
  auto nl = message.find('\n', pos);
  if (nl == std::string::npos) return std::string();
  return message.substr(nl + 1);
}

bool parse_int(std::string_view s, std::size_t& i, int& out) {
  std::size_t start = i;
  long long v = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    if (v < 100000000) v = v * 10 + (s[i] - '0');
    ++i;
  }
  if (i == start) return false;
  out = static_cast<int>(v);
  return true;
}

/// `file:line:col: severity: message`; the file part may itself contain colons.
std::optional<Diagnostic> parse_header(std::string_view line) {
  for (std::size_t c = 1; c < line.size(); ++c) {
    if (line[c] != ':') continue;
    std::size_t i = c + 1;
    int ln = 0, col = 0;
    if (!parse_int(line, i, ln) || i >= line.size() || line[i] != ':') continue;
    ++i;
    if (!parse_int(line, i, col) || i + 1 >= line.size() || line[i] != ':' || line[i + 1] != ' ') continue;
    i += 2;
    std::size_t w = i;
    while (w < line.size() && std::isalpha(static_cast<unsigned char>(line[w]))) ++w;
    auto sev = severity_from(line.substr(i, w - i));
    if (!sev) continue;
    if (w < line.size() && line[w] == ':') ++w;
    if (w < line.size() && line[w] == ' ') ++w;
    Diagnostic d;
    d.severity = *sev;
    d.file = std::string(line.substr(0, c));
    d.line = std::max(1, ln);
    d.column = std::max(0, col);
    d.message = std::string(line.substr(w));
    return d;
  }
  return std::nullopt;
}

std::optional<Diagnostic> parse_json_message(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("severity")) return std::nullopt;
  Diagnostic d;
  if (!j["severity"].is_string()) return std::nullopt;
  auto sev = severity_from(j["severity"].get<std::string>());
  if (!sev) return std::nullopt;
  d.severity = *sev;
  if (j.contains("fileName") && j["fileName"].is_string()) d.file = j["fileName"].get<std::string>();
  if (j.contains("pos") && j["pos"].is_object()) {
    const auto& pos = j["pos"];
    if (pos.contains("line") && pos["line"].is_number_integer()) d.line = std::max(1, pos["line"].get<int>());
    if (pos.contains("column") && pos["column"].is_number_integer()) d.column = std::max(0, pos["column"].get<int>());
  }
  if (j.contains("data") && j["data"].is_string()) d.message = j["data"].get<std::string>();
  return d;
}

void sort_diagnostics(std::vector<Diagnostic>& ds) {
  std::stable_sort(ds.begin(), ds.end(), [](const Diagnostic& a, const Diagnostic& b) {
    if (a.file != b.file) return a.file < b.file;
    if (a.line != b.line) return a.line < b.line;
    return a.column < b.column;
  });
}

}  // namespace

std::vector<Diagnostic> parse_diagnostics(const std::string& output) {
  std::vector<Diagnostic> fromJson;
  std::vector<Diagnostic> fromText;
  std::istringstream in(output);
  std::string line;
  Diagnostic* current = nullptr;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '{') {
      if (auto d = parse_json_message(line)) {
        fromJson.push_back(*d);
        current = nullptr;
        continue;
      }
    }
    if (auto d = parse_header(line)) {
      fromText.push_back(*d);
      current = &fromText.back();
    } else if (current) {
      current->message += "\n" + line;
    }
  }
  std::vector<Diagnostic> out = fromJson.empty() ? std::move(fromText) : std::move(fromJson);
  for (auto& d : out) {
    while (!d.message.empty() && d.message.back() == '\n') d.message.pop_back();
    d.unsolvedGoal = goal_of(d.message);
  }
  sort_diagnostics(out);
  return out;
}

CheckResult make_check_result(std::vector<Diagnostic> diagnostics, std::string rawOutput,
                              std::chrono::milliseconds elapsed) {
  CheckResult r;
  sort_diagnostics(diagnostics);
  r.success = std::none_of(diagnostics.begin(), diagnostics.end(),
                           [](const Diagnostic& d) { return d.severity == Severity::Error; });
  r.diagnostics = std::move(diagnostics);
  r.rawOutput = std::move(rawOutput);
  r.elapsed = elapsed;
  return r;
}

ErrorPrefix first_error_prefix(const std::string& script, const std::vector<Diagnostic>& diagnostics,
                               int scriptFirstLine) {
  const Diagnostic* first = nullptr;
  for (const auto& d : diagnostics) {
    if (d.severity != Severity::Error) continue;
    if (!first || d.line < first->line || (d.line == first->line && d.column < first->column)) first = &d;
  }
  if (!first) throw NoErrors("no error diagnostics; the proof is complete");
  const int keep = first->line - scriptFirstLine;
  std::string prefix;
  std::istringstream in(script);
  std::string line;
  for (int i = 0; i < keep && std::getline(in, line); ++i) prefix += line + "\n";
  return {prefix, *first, first->unsolvedGoal};
}

// ---------------------------------------------------------------------------
// Workspaces

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

std::string workspace_fingerprint(const LeanProject& project) {
  Sha256Builder h;
  h.add(project.name);
  for (const auto& m : project.modules) {
    h.add(m.name);
    h.add(m.sourceText);
  }
  return h.hex();
}

Workspace scaffold_workspace(const LeanProject& project, const fs::path& dir) {
  std::set<std::string> seen;
  for (const auto& m : project.modules) {
    if (!seen.insert(m.name).second) throw IoError("duplicate module " + m.name);
  }
  write_file(dir / "lakefile.lean", project.lakefile);
  write_file(dir / "lean-toolchain", project.toolchain);
  write_file(dir / (project.name + ".lean"), project.rootModule);
  for (const auto& m : project.modules) write_file(dir / m.path, m.sourceText);
  return {dir, project.name, workspace_fingerprint(project)};
}

std::string replay_key(const std::string& fingerprint, const std::string& fileContent) {
  return Sha256Builder().add(fingerprint).add(fileContent).hex();
}

// ---------------------------------------------------------------------------
// Replay

ToolchainFixture load_toolchain_fixture(const fs::path& file) {
  json j = json::parse(read_file(file), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw IoError("malformed toolchain fixture " + file.string());
  ToolchainFixture f;
  f.origin = j.value("origin", "");
  f.provisional = j.value("provisional", true);
  f.project = j.value("project", "");
  f.fingerprint = j.value("fingerprint", "");
  for (const auto& e : j.value("entries", json::array())) {
    f.entries.push_back({e.value("key", ""), e.value("theoremId", ""), e.value("label", ""),
                         e.value("success", false), e.value("rawOutput", "")});
  }
  return f;
}

void save_toolchain_fixture(const ToolchainFixture& f, const fs::path& file) {
  json entries = json::array();
  for (const auto& e : f.entries) {
    entries.push_back({{"key", e.key},
                       {"theoremId", e.theoremId},
                       {"label", e.label},
                       {"success", e.success},
                       {"rawOutput", e.rawOutput}});
  }
  json j = {{"origin", f.origin},
            {"provisional", f.provisional},
            {"project", f.project},
            {"fingerprint", f.fingerprint},
            {"entries", entries}};
  write_file(file, j.dump(1) + "\n");
}

ReplayRunner::ReplayRunner(MissPolicy policy) : policy_(policy) {}

void ReplayRunner::load_dir(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("toolchain fixture directory missing: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    for (const auto& e : load_toolchain_fixture(f).entries) add(e);
  }
}

void ReplayRunner::add(const ReplayEntry& entry) {
  std::lock_guard lock(mu_);
  entries_[entry.key] = entry;
}

std::size_t ReplayRunner::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::size_t ReplayRunner::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

CheckResult ReplayRunner::check_file(const Workspace& workspace, const fs::path& file) {
  const std::string content = read_file(workspace.root / file);
  const std::string key = replay_key(workspace.fingerprint, content);
  std::optional<ReplayEntry> hit;
  {
    std::lock_guard lock(mu_);
    auto it = entries_.find(key);
    if (it != entries_.end()) {
      hit = it->second;
    } else {
      ++misses_;
    }
  }
  if (hit) {
    CheckResult r = make_check_result(parse_diagnostics(hit->rawOutput), hit->rawOutput);
    r.success = r.success && hit->success;
    return r;
  }
  if (policy_ == MissPolicy::Strict) throw ReplayMiss("no recorded toolchain result for " + file.string());
  Diagnostic d{Severity::Error, file.string(), 1, 0, "replay miss: no recorded toolchain result for this content",
               std::nullopt};
  return make_check_result({d}, file.string() + ":1:0: error: " + d.message + "\n");
}

// ---------------------------------------------------------------------------
// Real toolchain

ProcessResult run_process(const std::vector<std::string>& argv, const fs::path& cwd, std::chrono::seconds timeout) {
  ProcessResult result;
  int fds[2];
  if (pipe(fds) != 0) throw IoError("pipe failed");
  pid_t pid = fork();
  if (pid < 0) {
    close(fds[0]);
    close(fds[1]);
    throw IoError("fork failed");
  }
  if (pid == 0) {
    dup2(fds[1], STDOUT_FILENO);
    dup2(fds[1], STDERR_FILENO);
    close(fds[0]);
    close(fds[1]);
    if (chdir(cwd.c_str()) != 0) _exit(127);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    execvp(args[0], args.data());
    _exit(127);
  }
  close(fds[1]);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char buf[4096];
  for (;;) {
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) {
      result.timedOut = true;
      kill(pid, SIGKILL);
      break;
    }
    pollfd p{fds[0], POLLIN, 0};
    int rc = poll(&p, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
    if (rc < 0) break;
    if (rc == 0) continue;
    ssize_t n = read(fds[0], buf, sizeof buf);
    if (n <= 0) break;
    result.output.append(buf, static_cast<std::size_t>(n));
  }
  close(fds[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  if (!result.timedOut && WIFEXITED(status)) result.exitCode = WEXITSTATUS(status);
  return result;
}

LakeRunner::LakeRunner(std::chrono::seconds timeout, std::size_t maxJobs)
    : timeout_(timeout),
      jobs_(std::make_unique<std::counting_semaphore<>>(static_cast<std::ptrdiff_t>(std::max<std::size_t>(1, maxJobs)))) {}

std::optional<fs::path> LakeRunner::find_lake() {
  std::error_code ec;
  if (const char* env = std::getenv("SPECFORGE_LAKE"); env && *env) {
    if (fs::exists(env, ec)) return fs::path(env);
    return std::nullopt;
  }
  const char* path = std::getenv("PATH");
  if (!path) return std::nullopt;
  std::istringstream in(path);
  std::string dir;
  while (std::getline(in, dir, ':')) {
    fs::path candidate = fs::path(dir) / "lake";
    if (fs::exists(candidate, ec) && access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return std::nullopt;
}

Workspace LakeRunner::scaffold(const LeanProject& project, const fs::path& dir) {
  if (!find_lake()) throw ToolchainMissing("lake not found; set SPECFORGE_LAKE");
  return scaffold_workspace(project, dir);
}

CheckResult LakeRunner::check_file(const Workspace& workspace, const fs::path& file) {
  auto lake = find_lake();
  if (!lake) throw ToolchainMissing("lake not found; set SPECFORGE_LAKE");
  jobs_->acquire();
  struct Release {
    std::counting_semaphore<>& s;
    ~Release() { s.release(); }
  } release{*jobs_};

  const auto start = std::chrono::steady_clock::now();
  {
    std::lock_guard lock(mu_);
    if (!built_.count(workspace.root)) {
      ProcessResult b = run_process({lake->string(), "build"}, workspace.root, timeout_ * 10);
      if (b.exitCode != 0) {
        Diagnostic d{Severity::Error, "lakefile.lean", 1, 0,
                     b.timedOut ? "timeout" : "workspace build failed:\n" + b.output, std::nullopt};
        return make_check_result({d}, b.output);
      }
      built_.insert(workspace.root);
    }
  }
  ProcessResult r = run_process({lake->string(), "env", "lean", "--json", file.string()}, workspace.root, timeout_);
  auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  std::vector<Diagnostic> ds = parse_diagnostics(r.output);
  if (r.timedOut) ds.push_back({Severity::Error, file.string(), 1, 0, "timeout", std::nullopt});
  bool anyError = std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::Error; });
  if (!r.timedOut && r.exitCode != 0 && !anyError) {
    ds.push_back({Severity::Error, file.string(), 1, 0, "toolchain exited with code " + std::to_string(r.exitCode),
                  std::nullopt});
  }
  return make_check_result(std::move(ds), r.output, elapsed);
}

}  // namespace specforge
