#include "specforge/corpus.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "specforge/bundle.hpp"
#include "specforge/depgraph.hpp"
#include "specforge/errors.hpp"

namespace fs = std::filesystem;

namespace specforge {

fs::path fixtures_dir() {
  if (const char* env = std::getenv("SPECFORGE_FIXTURES_DIR"); env && *env) return fs::path(env);
#ifdef SPECFORGE_FIXTURES_DIR
  return fs::path(SPECFORGE_FIXTURES_DIR);
#else
  return fs::path("fixtures");
#endif
}

namespace {

const std::vector<std::string>& fixture_names() {
  static const std::vector<std::string> names = {"BankAccount", "UserAuth"};
  return names;
}

}  // namespace

fs::path fixture_bundle(const std::string& name) {
  const auto& names = fixture_names();
  if (std::find(names.begin(), names.end(), name) == names.end()) {
    std::string note = (name == "Email" || name == "TaxiApp")
                           ? " (the Email and TaxiApp projects are not shipped)"
                           : "";
    throw UnknownFixture("unknown fixture project '" + name + "'" + note + "; known: BankAccount, UserAuth");
  }
  return fixtures_dir() / "projects" / name;
}

ir::Project load_fixture(const std::string& name) { return ir::parse_project(fixture_bundle(name)); }

Variant load_variant_file(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open variant file " + file.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.filename().string(), 0, e.what());
  }
  Variant v;
  try {
    v.project = doc.at("project").get<std::string>();
    v.variantId = doc.at("variantId").get<int>();
    v.description = doc.value("description", "");
    for (const auto& p : doc.at("patch")) {
      std::string api = p.at("api").get<std::string>();
      v.patch.emplace_back(api, ir::parse_block_text(p.at("body").dump(), file.filename().string()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(file.filename().string(), 0, e.what());
  }
  return v;
}

std::vector<Variant> load_variants(const std::string& project) {
  std::vector<Variant> out;
  fs::path dir = fixtures_dir() / "variants";
  if (!fs::is_directory(dir)) return out;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    Variant v = load_variant_file(f);
    if (v.project == project) out.push_back(std::move(v));
  }
  std::sort(out.begin(), out.end(), [](const Variant& a, const Variant& b) { return a.variantId < b.variantId; });
  return out;
}

ir::Project apply_variant(const ir::Project& project, int variantId) {
  for (const auto& v : load_variants(project.name)) {
    if (v.variantId == variantId) return apply_variant(project, v);
  }
  throw UnknownVariant("project " + project.name + " has no variant " + std::to_string(variantId));
}

ir::Project apply_variant(const ir::Project& project, const Variant& variant) {
  if (variant.project != project.name) {
    throw UnknownVariant("variant " + std::to_string(variant.variantId) + " belongs to project " +
                         variant.project + ", not " + project.name);
  }
  ir::Project patched = project;
  for (const auto& [api, body] : variant.patch) {
    auto it = std::find_if(patched.apis.begin(), patched.apis.end(),
                           [&](const ir::ApiDef& a) { return a.name == api; });
    if (it == patched.apis.end()) {
      throw ValidationError("variant " + std::to_string(variant.variantId) + " patches unknown API '" + api + "'");
    }
    it->body = body;
  }
  ir::ensure_valid(patched);
  DependencyGraph before = analyze_dependencies(project);
  DependencyGraph after = analyze_dependencies(patched);
  for (const auto& a : project.apis) {
    if (dependent_tables(before, a.name) != dependent_tables(after, a.name)) {
      throw ValidationError("variant " + std::to_string(variant.variantId) + " changes the table signature of " +
                            a.name);
    }
  }
  return patched;
}

}  // namespace specforge
