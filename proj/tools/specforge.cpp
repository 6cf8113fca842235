// specforge <verb> <bundle> [flags]

#include <iostream>

#include "CLI11.hpp"
#include "specforge/errors.hpp"
#include "specforge/pipeline.hpp"

namespace {

using namespace specforge;

void print_statuses(const std::vector<TheoremSpec>& theorems) {
  for (const auto& t : theorems) std::cout << to_string(t.status) << "  " << t.id << "\n";
}

int run_verb(const std::string& verb, const std::string& bundleArg, PipelineConfig& config, const std::string& format) {
  const Stage until = verb == "run" || verb == "report" ? Stage::Classify : stage_from_string(verb);
  const auto bundle = resolve_bundle(bundleArg);
  PipelineResult r = run_pipeline(bundle, config, until);
  switch (until) {
    case Stage::Parse:
      std::cout << "project " << r.impl.name << ": " << r.impl.services.size() << " services, " << r.impl.tables.size()
                << " tables, " << r.impl.apis.size() << " APIs\n";
      break;
    case Stage::Deps:
      for (const auto& e : r.graph.edges) std::cout << to_string(e.kind) << "  " << e.from << " -> " << e.to << "\n";
      std::cout << "order:";
      for (const auto& n : r.graph.topoOrder) std::cout << " " << n;
      std::cout << "\n";
      break;
    case Stage::Emit:
      for (const auto& m : r.emitted.modules) std::cout << m.path << "\n";
      std::cout << "workspace " << r.workspace.string() << "\n";
      break;
    case Stage::GenTheorems:
      for (const auto& t : r.theorems) std::cout << t.id << "  " << t.prose << "\n";
      break;
    case Stage::Prove:
    case Stage::Negate:
      print_statuses(r.theorems);
      for (const auto& s : r.stages) {
        if (s.cached) std::cout << "(" << to_string(s.stage) << " results reused from cache)\n";
      }
      break;
    case Stage::Classify:
      std::cout << render(r.report, format == "json" ? ReportFormat::Json : ReportFormat::Text);
      return r.report.bugsFound > 0 ? 2 : 0;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verify a backend project against its specification"};
  app.require_subcommand(1);
  std::string configFile, out, backend, runner, format = "text";
  bool deterministic = false, noCache = false;
  int workers = 0, variant = -1;
  app.add_option("--config", configFile, "JSON configuration file");
  app.add_flag("--deterministic", deterministic, "one worker, stable order");
  app.add_option("--workers", workers, "concurrent theorems per batch");
  app.add_option("--out", out, "output directory");
  app.add_option("--backend", backend, "prover backend")->check(CLI::IsMember({"replay", "tactic", "llm"}));
  app.add_option("--runner", runner, "toolchain runner")->check(CLI::IsMember({"replay", "lake"}));
  app.add_option("--variant", variant, "bug variant to apply (0 = none)");
  app.add_option("--format", format, "report format")->check(CLI::IsMember({"text", "json"}));
  app.add_flag("--no-cache", noCache, "ignore and do not write cached stage results");

  std::string bundle;
  std::string verb;
  for (const char* name : {"parse", "deps", "emit", "gen-theorems", "prove", "negate", "report", "run"}) {
    auto* sub = app.add_subcommand(name, std::string("run the pipeline through ") + name);
    sub->add_option("bundle", bundle, "bundle directory or fixture name")->required();
    sub->fallthrough();
    sub->callback([&verb, name] { verb = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    PipelineConfig config = configFile.empty() ? PipelineConfig{} : load_config(configFile);
    if (!out.empty()) config.outDir = out;
    if (!backend.empty()) config.backend = backend;
    if (!runner.empty()) config.runner = runner;
    if (workers > 0) config.workers = workers;
    if (variant >= 0) config.variant = variant;
    if (noCache) config.cache = false;
    config.deterministic = deterministic;
    return run_verb(verb, bundle, config, format);
  } catch (const StageError& e) {
    std::cerr << "error " << e.kind() << " " << e.what() << "\n";
  } catch (const Error& e) {
    std::cerr << "error " << e.kind() << ": " << e.what() << "\n";
  }
  return 1;
}
