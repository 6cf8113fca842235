#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specforge/corpus.hpp"
#include "specforge/depgraph.hpp"
#include "specforge/lean_emit.hpp"
#include "specforge/theoremgen.hpp"

namespace sftest {

namespace fs = std::filesystem;

inline std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  out << text;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("specforge-" + tag + "-" + std::to_string(rd()));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

struct Loaded {
  specforge::ir::Project project;
  specforge::DependencyGraph graph;
  specforge::LeanProject emitted;
  std::vector<specforge::TheoremSpec> theorems;
};

inline Loaded load(const std::string& name, int variant = 0) {
  using namespace specforge;
  Loaded l;
  l.project = load_fixture(name);
  l.graph = analyze_dependencies(l.project);
  const ir::Project impl = variant ? apply_variant(l.project, variant) : l.project;
  l.emitted = emit_project(impl, analyze_dependencies(impl));
  l.theorems = generate_theorems(l.project, l.graph, l.emitted);
  return l;
}

inline const specforge::TheoremSpec& by_id(const std::vector<specforge::TheoremSpec>& ts, const std::string& id) {
  for (const auto& t : ts) {
    if (t.id == id) return t;
  }
  throw std::runtime_error("no theorem " + id);
}

inline fs::path golden_dir() { return fs::path(SPECFORGE_TEST_DIR) / "golden"; }

}  // namespace sftest
