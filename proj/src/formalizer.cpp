#include "specforge/formalizer.hpp"

#include <algorithm>

#include "specforge/bundle.hpp"
#include "specforge/errors.hpp"

namespace specforge {

std::string ReplayFormalizer::formalize(const FormalizeRequest& request) {
  auto it = canned_.find(request.sourceText);
  if (it == canned_.end()) throw BackendUnavailable("no canned formalization for this source");
  return it->second;
}

ir::ApiDef formalize_source(const std::string& sourceText, const ir::Project& context, SourceFormalizer& backend,
                            int retries) {
  if (sourceText.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw FormalizationFailed("empty source text");
  }
  FormalizeRequest req{sourceText, &context, 0, {}};
  std::string last;
  for (int round = 0; round <= retries; ++round) {
    req.round = round;
    const std::string text = backend.formalize(req);
    ir::ApiDef api;
    try {
      api = ir::parse_api_text(text, "<formalizer round " + std::to_string(round) + ">");
    } catch (const ParseError& e) {
      req.previousDiagnostics = {{"formalizer output", "", e.line(), e.what()}};
      last = e.what();
      continue;
    }
    ir::Project candidate = context;
    candidate.apis.erase(std::remove_if(candidate.apis.begin(), candidate.apis.end(),
                                        [&](const ir::ApiDef& a) { return a.name == api.name; }),
                         candidate.apis.end());
    candidate.apis.push_back(api);
    auto diags = ir::type_check_api(candidate, api);
    if (diags.empty()) return api;
    last.clear();
    for (const auto& d : diags) last += (last.empty() ? "" : "; ") + d.message;
    req.previousDiagnostics = std::move(diags);
  }
  throw FormalizationFailed("formalization still invalid after " + std::to_string(retries) + " retries: " + last);
}

}  // namespace specforge
