#include "specforge/fixturegen.hpp"

#include <algorithm>
#include <fstream>

#include "json.hpp"
#include "specforge/corpus.hpp"
#include "specforge/depgraph.hpp"
#include "specforge/errors.hpp"
#include "specforge/prover.hpp"

namespace specforge {

namespace fs = std::filesystem;

int canonical_rung(const TheoremSpec& t) {
  return t.kind == TheoremKind::TableProp && t.hypotheses.empty() ? 2 : kLadderRungs;
}

namespace {

int statement_line(const TheoremSpec& t) {
  return t.proofLineOffset - 1 - static_cast<int>(std::count(t.statement.begin(), t.statement.end(), '\n'));
}

std::string unsolved(const TheoremSpec& t) {
  return scratch_path(t).string() + ":" + std::to_string(t.proofLineOffset) + ":2: error: " + kUnsolvedGoalsMarker +
         "\n" + goal_text(t) + "\n";
}

std::string sorry_warning(const TheoremSpec& t) {
  return scratch_path(t).string() + ":" + std::to_string(statement_line(t)) + ":8: warning: declaration uses 'sorry'\n";
}

}  // namespace

GeneratedFixtures generate_fixtures(const std::string& projectName, int variant, const BoundedOptions& options) {
  const ir::Project spec = load_fixture(projectName);
  const ir::Project impl = variant == 0 ? spec : apply_variant(spec, variant);
  const DependencyGraph specGraph = analyze_dependencies(spec);
  const DependencyGraph implGraph = analyze_dependencies(impl);
  const LeanProject emitted = emit_project(impl, implGraph);
  const std::string fingerprint = workspace_fingerprint(emitted);
  std::vector<TheoremSpec> theorems = generate_theorems(spec, specGraph, emitted);
  const Interpreter interpreter(impl);

  GeneratedFixtures out;
  out.toolchain.origin = kOracleOrigin;
  out.toolchain.provisional = true;
  out.toolchain.project = fixture_stem(projectName, variant);
  out.toolchain.fingerprint = fingerprint;
  auto record = [&](const TheoremSpec& t, const std::string& label, const std::string& script, bool success,
                    const std::string& raw) {
    out.toolchain.entries.push_back({replay_key(fingerprint, theorem_file(t, script)), t.id, label, success, raw});
  };

  for (const auto& t : theorems) {
    const BoundedVerdict verdict = bounded_check(interpreter, t, options);
    const bool holds = !verdict.counterexample.has_value();
    const int canonical = canonical_rung(t);
    record(t, "sorry", "sorry", true, sorry_warning(t));
    for (int rung = 1; rung <= kLadderRungs; ++rung) {
      const bool ok = holds && rung == canonical;
      record(t, "ladder." + std::to_string(rung), ladder_script(rung, t.unfoldDefs), ok, ok ? "" : unsolved(t));
    }
    out.corpus.push_back({t.id, ladder_script(canonical, t.unfoldDefs)});
    if (holds || !t.conclusion) continue;

    out.falsified.push_back(t.id);
    const TheoremSpec n = negate_theorem(t);
    const std::string witness = witness_proof(n, *verdict.counterexample, spec);
    record(n, "sorry", "sorry", true, sorry_warning(n));
    for (int rung = 1; rung <= kLadderRungs; ++rung) {
      record(n, "ladder." + std::to_string(rung), ladder_script(rung, n.unfoldDefs), false, unsolved(n));
    }
    record(n, "witness", witness, true, "");
    out.corpus.push_back({n.id, witness});
  }
  return out;
}

std::string fixture_stem(const std::string& project, int variant) {
  return variant == 0 ? project : project + ".v" + std::to_string(variant);
}

fs::path toolchain_fixture_path(const fs::path& fixtures, const std::string& project, int variant) {
  return fixtures / "toolchain" / (fixture_stem(project, variant) + ".json");
}

fs::path replay_corpus_path(const fs::path& fixtures, const std::string& project, int variant) {
  return fixtures / "replay" / (fixture_stem(project, variant) + ".jsonl");
}

void save_corpus(const std::vector<CorpusProof>& corpus, const fs::path& file) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot write " + file.string());
  for (const auto& c : corpus) out << nlohmann::ordered_json{{"key", c.key}, {"proof", c.proof}}.dump() << "\n";
  if (!out) throw IoError("write failed for " + file.string());
}

}  // namespace specforge
