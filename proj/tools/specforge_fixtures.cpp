// Regenerates fixtures/toolchain and fixtures/replay for every shipped
// project and variant.

#include <iostream>

#include "CLI11.hpp"
#include "specforge/corpus.hpp"
#include "specforge/errors.hpp"
#include "specforge/fixturegen.hpp"

int main(int argc, char** argv) {
  using namespace specforge;
  CLI::App app{"Regenerate provisional toolchain fixtures and replay corpora"};
  std::string out = fixtures_dir().string();
  std::size_t samples = BoundedOptions{}.samples;
  app.add_option("--out", out, "fixtures directory");
  app.add_option("--samples", samples, "assignments per theorem");
  CLI11_PARSE(app, argc, argv);

  try {
    BoundedOptions opts;
    opts.samples = samples;
    for (const std::string project : {"UserAuth", "BankAccount"}) {
      std::vector<int> ids = {0};
      for (const auto& v : load_variants(project)) ids.push_back(v.variantId);
      for (int id : ids) {
        GeneratedFixtures g = generate_fixtures(project, id, opts);
        save_toolchain_fixture(g.toolchain, toolchain_fixture_path(out, project, id));
        save_corpus(g.corpus, replay_corpus_path(out, project, id));
        std::cout << fixture_stem(project, id) << ": " << g.toolchain.entries.size() << " toolchain entries, "
                  << g.corpus.size() << " proofs, falsified:";
        if (g.falsified.empty()) std::cout << " none";
        for (const auto& f : g.falsified) std::cout << " " << f;
        std::cout << "\n";
      }
    }
  } catch (const Error& e) {
    std::cerr << e.kind() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
