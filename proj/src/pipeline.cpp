#include "specforge/pipeline.hpp"

#include <fstream>
#include <sstream>

#include "specforge/bundle.hpp"
#include "specforge/corpus.hpp"
#include "specforge/errors.hpp"
#include "specforge/fixturegen.hpp"
#include "specforge/hash.hpp"

namespace specforge {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

const char* to_string(Stage s) {
  switch (s) {
    case Stage::Parse: return "parse";
    case Stage::Deps: return "deps";
    case Stage::Emit: return "emit";
    case Stage::GenTheorems: return "gen-theorems";
    case Stage::Prove: return "prove";
    case Stage::Negate: return "negate";
    case Stage::Classify: return "classify";
  }
  return "?";
}

Stage stage_from_string(const std::string& s) {
  for (Stage st : {Stage::Parse, Stage::Deps, Stage::Emit, Stage::GenTheorems, Stage::Prove, Stage::Negate,
                   Stage::Classify}) {
    if (s == to_string(st)) return st;
  }
  throw ConfigError("unknown stage " + s);
}

// ---------------------------------------------------------------------------
// Configuration

namespace {

template <typename T>
T get(const json& j, const std::string& key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::error_code ec;
  fs::create_directories(p.parent_path(), ec);
  std::ofstream out(p, std::ios::binary);
  if (!out) throw IoError("cannot write " + p.string());
  out << text;
  if (!out) throw IoError("write failed for " + p.string());
}

std::string default_prelude() {
#ifdef SPECFORGE_PRELUDE_DIR
  return SPECFORGE_PRELUDE_DIR;
#else
  return "../lean-prelude";
#endif
}

}  // namespace

void apply_config(PipelineConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "endpoint") c.llm.endpoint = get<std::string>(v, key);
    else if (key == "model") c.llm.model = get<std::string>(v, key);
    else if (key == "temperature") c.llm.temperature = get<double>(v, key);
    else if (key == "maxTokens") c.llm.maxTokens = get<int>(v, key);
    else if (key == "systemPrompt") c.llm.systemPrompt = get<std::string>(v, key);
    else if (key == "attempts") c.budget.attempts = get<int>(v, key);
    else if (key == "refinements") c.budget.refinements = get<int>(v, key);
    else if (key == "rounds") c.budget.rounds = get<int>(v, key);
    else if (key == "batch") c.budget.batchSize = get<int>(v, key);
    else if (key == "fewshot") c.budget.fewShotK = get<int>(v, key);
    else if (key == "workers") c.workers = get<int>(v, key);
    else if (key == "seed") c.seed = get<std::uint64_t>(v, key);
    else if (key == "backend") c.backend = get<std::string>(v, key);
    else if (key == "runner") c.runner = get<std::string>(v, key);
    else if (key == "variant") c.variant = get<int>(v, key);
    else if (key == "pathCap") c.pathCap = get<std::size_t>(v, key);
    else if (key == "timeout") c.checkTimeoutSeconds = get<int>(v, key);
    else if (key == "fixtures") c.fixturesDir = get<std::string>(v, key);
    else if (key == "replayCorpus") c.replayCorpus = get<std::string>(v, key);
    else if (key == "prelude") c.preludePath = get<std::string>(v, key);
    else if (key == "out") c.outDir = get<std::string>(v, key);
    else if (key == "cache") c.cache = get<bool>(v, key);
    else if (key == "prices") {
      if (!v.is_object()) throw ConfigError("config key 'prices' must be an object");
      for (const auto& [pk, pv] : v.items()) {
        if (pk == "prompt") c.prices.promptPerMillion = get<double>(pv, "prices.prompt");
        else if (pk == "completion") c.prices.completionPerMillion = get<double>(pv, "prices.completion");
        else if (pk == "currency") c.prices.currency = get<std::string>(pv, "prices.currency");
        else throw ConfigError("unknown config key 'prices." + pk + "'");
      }
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
  validate(c.budget);
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (c.prices.promptPerMillion < 0 || c.prices.completionPerMillion < 0) throw ConfigError("prices must be non-negative");
  if (c.backend != "replay" && c.backend != "tactic" && c.backend != "llm") {
    throw ConfigError("backend must be replay, tactic or llm");
  }
  if (c.runner != "replay" && c.runner != "lake") throw ConfigError("runner must be replay or lake");
}

PipelineConfig load_config(const fs::path& file) {
  json j = json::parse(read_text(file), nullptr, false);
  if (j.is_discarded()) throw ConfigError("config " + file.string() + " is not valid JSON");
  PipelineConfig c;
  apply_config(c, j);
  return c;
}

json result_affecting(const PipelineConfig& c) {
  json j = {{"attempts", c.budget.attempts},
            {"refinements", c.budget.refinements},
            {"rounds", c.budget.rounds},
            {"batch", c.budget.batchSize},
            {"fewshot", c.budget.fewShotK},
            {"backend", c.backend},
            {"runner", c.runner},
            {"seed", c.seed},
            {"variant", c.variant},
            {"pathCap", c.pathCap},
            {"prices", {{"prompt", c.prices.promptPerMillion},
                        {"completion", c.prices.completionPerMillion},
                        {"currency", c.prices.currency}}}};
  if (c.backend == "llm") {
    j["llm"] = {{"endpoint", c.llm.endpoint},
                {"model", c.llm.model},
                {"temperature", c.llm.temperature},
                {"maxTokens", c.llm.maxTokens},
                {"systemPrompt", c.llm.systemPrompt}};
  }
  if (c.runner == "lake") j["timeout"] = c.checkTimeoutSeconds;
  return j;
}

fs::path effective_fixtures_dir(const PipelineConfig& c) { return c.fixturesDir.empty() ? fixtures_dir() : c.fixturesDir; }

namespace {
fs::path corpus_path(const PipelineConfig& c, const std::string& project) {
  return c.replayCorpus.empty() ? replay_corpus_path(effective_fixtures_dir(c), project, c.variant) : c.replayCorpus;
}
}  // namespace

std::unique_ptr<ProverBackend> make_backend(const PipelineConfig& c, const std::string& project) {
  if (c.backend == "tactic") return std::make_unique<TacticLadderBackend>();
  if (c.backend == "llm") {
    LlmConfig llm = c.llm;
    llm.seed = c.seed;
    return std::make_unique<LlmBackend>(llm);
  }
  auto replay = std::make_unique<ReplayBackend>();
  replay->load_file(corpus_path(c, project));
  return replay;
}

std::unique_ptr<LeanRunner> make_runner(const PipelineConfig& c) {
  if (c.runner == "lake") {
    if (!LakeRunner::find_lake()) throw ToolchainMissing("lake not found; set SPECFORGE_LAKE or add it to PATH");
    return std::make_unique<LakeRunner>(std::chrono::seconds(c.checkTimeoutSeconds),
                                        static_cast<std::size_t>(std::max(1, c.workers)));
  }
  auto replay = std::make_unique<ReplayRunner>(ReplayRunner::MissPolicy::FailClosed);
  replay->load_dir(effective_fixtures_dir(c) / "toolchain");
  return replay;
}

fs::path resolve_bundle(const std::string& bundle) {
  std::error_code ec;
  if (fs::is_directory(bundle, ec)) return bundle;
  if (bundle == "UserAuth" || bundle == "BankAccount") return fixture_bundle(bundle);
  throw IoError("bundle not found: " + bundle);
}

// ---------------------------------------------------------------------------
// Artifacts

json deps_json(const DependencyGraph& g) {
  ojson edges = ojson::array();
  for (const auto& e : g.edges) edges.push_back({{"kind", to_string(e.kind)}, {"from", e.from}, {"to", e.to}});
  ojson j = {{"tables", g.tables}, {"apis", g.apis}, {"edges", edges}, {"topoOrder", g.topoOrder}};
  return json::parse(j.dump());
}

json theorems_json(const std::vector<TheoremSpec>& theorems) {
  json arr = json::array();
  for (const auto& t : theorems) {
    arr.push_back({{"id", t.id},
                   {"kind", to_string(t.kind)},
                   {"api", t.api},
                   {"table", t.table},
                   {"path", t.path},
                   {"status", to_string(t.status)},
                   {"proof", t.proof}});
  }
  return arr;
}

ProofAttempt attempt_from_json(const json& j) {
  ProofAttempt a;
  a.theoremId = j.at("theoremId").get<std::string>();
  a.round = j.at("round").get<int>();
  a.attemptIndex = j.at("attempt").get<int>();
  a.refinementIndex = j.at("refinement").get<int>();
  a.backendId = j.at("backend").get<std::string>();
  a.proofScript = j.at("script").get<std::string>();
  const std::string outcome = j.at("outcome").get<std::string>();
  a.outcome = outcome == "Success" ? AttemptOutcome::Success
              : outcome == "BackendError" ? AttemptOutcome::BackendError
                                          : AttemptOutcome::Fail;
  for (const auto& d : j.at("diagnostics")) {
    Diagnostic diag;
    const std::string sev = d.at("severity").get<std::string>();
    diag.severity = sev == "error" ? Severity::Error : sev == "warning" ? Severity::Warning : Severity::Info;
    diag.line = d.at("line").get<int>();
    diag.column = d.at("column").get<int>();
    diag.message = d.at("message").get<std::string>();
    a.diagnostics.push_back(diag);
  }
  a.error = j.value("error", "");
  a.usage.prompt = j.at("usage").at("prompt").get<std::int64_t>();
  a.usage.completion = j.at("usage").at("completion").get<std::int64_t>();
  return a;
}

namespace {

std::string log_text(const std::vector<ProofAttempt>& log) {
  std::string s;
  for (const auto& a : log) s += attempt_json_line(a) + "\n";
  return s;
}

std::vector<ProofAttempt> parse_log(const std::string& text) {
  std::vector<ProofAttempt> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(attempt_from_json(json::parse(line)));
  }
  return out;
}

json statuses(const std::vector<TheoremSpec>& theorems) {
  json arr = json::array();
  for (const auto& t : theorems) arr.push_back({{"id", t.id}, {"status", to_string(t.status)}, {"proof", t.proof}});
  return arr;
}

/// Overlays cached statuses; negations listed in the cache are rebuilt.
void restore(std::vector<TheoremSpec>& theorems, const json& cached) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < theorems.size(); ++i) index[theorems[i].id] = i;
  for (const auto& e : cached) {
    const std::string id = e.at("id").get<std::string>();
    auto it = index.find(id);
    if (it == index.end()) {
      const std::string suffix = ".neg";
      if (id.size() <= suffix.size() || id.compare(id.size() - suffix.size(), suffix.size(), suffix) != 0) {
        throw InconsistentState("cached theorem " + id + " is unknown");
      }
      auto orig = index.find(id.substr(0, id.size() - suffix.size()));
      if (orig == index.end()) throw InconsistentState("cached negation " + id + " has no original");
      theorems.push_back(negate_theorem(theorems[orig->second]));
      index[id] = theorems.size() - 1;
      it = index.find(id);
    }
    TheoremSpec& t = theorems[it->second];
    auto status = theorem_status_from_string(e.at("status").get<std::string>());
    if (!status) throw InconsistentState("cached theorem " + id + " has an unknown status");
    t.status = *status;
    t.proof = e.at("proof").get<std::string>();
  }
}

std::string file_hash(const fs::path& p) {
  std::error_code ec;
  if (!fs::exists(p, ec)) return "missing";
  if (fs::is_directory(p, ec)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(p)) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    Sha256Builder h;
    for (const auto& f : files) h.add(f.filename().string()).add(read_text(f));
    return h.hex();
  }
  return sha256_hex(read_text(p));
}

template <typename F>
auto staged(Stage stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(to_string(stage), e);
  } catch (const std::exception& e) {
    throw StageError(to_string(stage), IoError(e.what()));
  }
}

}  // namespace

PipelineResult run_pipeline(const fs::path& bundle, const PipelineConfig& configIn, Stage until) {
  PipelineConfig config = configIn;
  if (config.deterministic) config.workers = 1;
  PipelineResult r;
  auto done = [&](Stage s, bool cached = false) {
    r.stages.push_back({s, cached});
    return s == until;
  };
  const fs::path out = config.outDir;

  // parse
  staged(Stage::Parse, [&] {
    r.spec = ir::parse_project(bundle);
    if (config.variant == 0) {
      r.impl = r.spec;
    } else {
      const fs::path vf = effective_fixtures_dir(config) / "variants" / (fixture_stem(r.spec.name, config.variant) + ".json");
      if (!fs::exists(vf)) throw UnknownVariant("project " + r.spec.name + " has no variant " + std::to_string(config.variant));
      r.impl = apply_variant(r.spec, load_variant_file(vf));
    }
    write_text(out / "project.json", ir::to_json(r.impl).dump(2) + "\n");
  });
  if (done(Stage::Parse)) return r;

  // deps
  DependencyGraph specGraph;
  staged(Stage::Deps, [&] {
    specGraph = analyze_dependencies(r.spec);
    r.graph = analyze_dependencies(r.impl);
    write_text(out / "deps.json", deps_json(r.graph).dump(2) + "\n");
  });
  if (done(Stage::Deps)) return r;

  // emit
  std::unique_ptr<LeanRunner> runner;
  Workspace workspace;
  const std::string stem = fixture_stem(r.spec.name, config.variant);
  staged(Stage::Emit, [&] {
    EmitOptions eo;
    eo.preludePath = config.preludePath.empty() ? default_prelude() : config.preludePath;
    r.emitted = emit_project(r.impl, r.graph, eo);
    runner = make_runner(config);
    r.workspace = out / "workspace" / stem;
    workspace = runner->scaffold(r.emitted, r.workspace);
  });
  if (done(Stage::Emit)) return r;

  // gen-theorems
  staged(Stage::GenTheorems, [&] {
    EnumerateOptions eo;
    eo.pathCap = config.pathCap;
    r.theorems = generate_theorems(r.spec, specGraph, r.emitted, eo);
    for (const auto& t : r.theorems) write_text(r.workspace / t.path, t.sourceText);
    write_text(out / "theorems.json", theorems_json(r.theorems).dump(2) + "\n");
  });
  if (done(Stage::GenTheorems)) return r;

  // cache key
  {
    Sha256Builder h;
    h.add(ir::to_json(r.spec).dump()).add(result_affecting(config).dump()).add(SPECFORGE_VERSION);
    h.add(std::to_string(config.variant)).add(workspace.fingerprint);
    if (config.backend == "replay") h.add(file_hash(corpus_path(config, r.spec.name)));
    if (config.runner == "replay") h.add(file_hash(effective_fixtures_dir(config) / "toolchain"));
    r.cacheKey = h.hex();
  }
  const fs::path cacheDir = out / "cache" / r.cacheKey;
  std::vector<StageWarning> warnings;

  std::unique_ptr<ProverBackend> backend;
  ExamplePool pool;
  auto context = [&]() -> ProverContext {
    if (!backend) backend = make_backend(config, r.spec.name);
    return ProverContext{*backend, *runner, workspace, pool, config.budget, config.workers};
  };
  auto cached_stage = [&](Stage stage, const std::string& name, auto&& compute) {
    const fs::path file = cacheDir / (name + ".json");
    if (config.cache && fs::exists(file)) {
      staged(stage, [&] {
        json j = json::parse(read_text(file));
        restore(r.theorems, j.at("theorems"));
        for (auto& a : parse_log(j.at("log").get<std::string>())) r.log.push_back(std::move(a));
        for (const auto& w : j.at("warnings")) {
          warnings.push_back({w.at("stage").get<std::string>(), w.at("subject").get<std::string>(),
                              w.at("message").get<std::string>()});
        }
      });
      return true;
    }
    staged(stage, [&] {
      const std::size_t before = warnings.size();
      std::vector<ProofAttempt> log = compute();
      json ws = json::array();
      for (std::size_t i = before; i < warnings.size(); ++i) {
        ws.push_back({{"stage", warnings[i].stage}, {"subject", warnings[i].subject}, {"message", warnings[i].message}});
      }
      const std::string text = log_text(log);
      for (auto& a : log) r.log.push_back(std::move(a));
      if (config.cache) write_text(file, json{{"theorems", statuses(r.theorems)}, {"log", text}, {"warnings", ws}}.dump() + "\n");
    });
    return false;
  };
  auto backend_warnings = [&](const std::vector<ProofAttempt>& log, const std::string& stage) {
    std::size_t unavailable = 0;
    for (const auto& a : log) unavailable += a.outcome == AttemptOutcome::BackendError;
    if (unavailable) {
      warnings.push_back({stage, "backend", std::to_string(unavailable) + " backend calls produced no candidate"});
    }
    if (auto* replay = dynamic_cast<ReplayRunner*>(runner.get()); replay && replay->misses()) {
      warnings.push_back({stage, "runner", std::to_string(replay->misses()) +
                                               " toolchain checks had no recorded result and were rejected"});
    }
  };

  // prove
  bool cached = cached_stage(Stage::Prove, "prove", [&] {
    for (const auto& t : r.theorems) {
      if (!t.conclusion) warnings.push_back({"gen-theorems", t.id, "no structured conclusion; it cannot be negated"});
    }
    if (config.runner == "replay") {
      const fs::path f = toolchain_fixture_path(effective_fixtures_dir(config), r.spec.name, config.variant);
      if (fs::exists(f)) {
        const ToolchainFixture fx = load_toolchain_fixture(f);
        if (fx.provisional) {
          warnings.push_back({"prove", "runner", "toolchain results are provisional (origin " + fx.origin + ")"});
        }
        if (fx.fingerprint != workspace.fingerprint) {
          warnings.push_back({"prove", "runner", "toolchain fixture was recorded for a different workspace"});
        }
      } else {
        warnings.push_back({"prove", "runner", "no toolchain fixture for " + stem});
      }
    }
    ProverContext ctx = context();
    SearchResult sr = run_proof_search(r.theorems, ctx);
    backend_warnings(sr.log, "prove");
    return sr.log;
  });
  if (done(Stage::Prove, cached)) return r;

  // negate
  cached = cached_stage(Stage::Negate, "negate", [&] {
    ProverContext ctx = context();
    const std::size_t misses = [&] {
      auto* replay = dynamic_cast<ReplayRunner*>(runner.get());
      return replay ? replay->misses() : 0;
    }();
    SearchResult sr = search_counterexamples(r.theorems, ctx);
    std::size_t unavailable = 0;
    for (const auto& a : sr.log) unavailable += a.outcome == AttemptOutcome::BackendError;
    if (unavailable) {
      warnings.push_back({"negate", "backend", std::to_string(unavailable) + " backend calls produced no candidate"});
    }
    if (auto* replay = dynamic_cast<ReplayRunner*>(runner.get()); replay && replay->misses() > misses) {
      warnings.push_back({"negate", "runner", std::to_string(replay->misses() - misses) +
                                                  " toolchain checks had no recorded result and were rejected"});
    }
    return sr.log;
  });
  if (done(Stage::Negate, cached)) return r;

  // classify
  staged(Stage::Classify, [&] {
    r.report = classify(r.spec.name, r.theorems);
    r.report.variant = config.variant;
    r.report.cost = make_cost_ledger(r.log, config.prices, static_cast<int>(r.spec.apis.size()));
    r.report.warnings = warnings;
    write_text(out / "attempts.jsonl", log_text(r.log));
    write_text(out / "report.txt", render(r.report, ReportFormat::Text));
    write_text(out / "report.json", render(r.report, ReportFormat::Json));
  });
  done(Stage::Classify);
  return r;
}

}  // namespace specforge
