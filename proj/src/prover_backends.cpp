#include <cstdlib>
#include <fstream>
#include <sstream>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "httplib.h"
#include "json.hpp"
#include "specforge/errors.hpp"
#include "specforge/prover.hpp"

namespace specforge {

namespace fs = std::filesystem;
using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Tactic ladder

namespace {
std::string join(const std::vector<std::string>& xs, const std::string& sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) s += sep;
    s += xs[i];
  }
  return s;
}
}  // namespace

std::string ladder_script(int rung, const std::vector<std::string>& defs) {
  const std::string simp = defs.empty() ? "simp_all" : "simp_all [" + join(defs, ", ") + "]";
  switch (std::clamp(rung, 1, kLadderRungs)) {
    case 1: return "rfl";
    case 2: return simp;
    case 3: return "decide";
    case 4: return simp + " <;> omega";
    default:
      return (defs.empty() ? std::string() : "unfold " + join(defs, " ") + " at *\n") + "repeat' split <;> simp_all";
  }
}

ProofResponse TacticLadderBackend::propose(const ProofRequest& request) {
  return {ladder_script(std::min(request.attemptIndex + request.refinementIndex, kLadderRungs), request.unfoldDefs),
          {}};
}

// ---------------------------------------------------------------------------
// Replay

void ReplayBackend::add(const std::string& key, const std::string& proof) { proofs_[key] = proof; }

void ReplayBackend::load_file(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot read " + file.string());
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      add(j.at("key").get<std::string>(), j.at("proof").get<std::string>());
    } catch (const json::exception& e) {
      throw ParseError(file.string(), n, e.what());
    }
  }
}

void ReplayBackend::load_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("no replay corpus directory " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.path().extension() == ".jsonl") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& f : files) load_file(f);
}

ProofResponse ReplayBackend::propose(const ProofRequest& r) {
  const std::string a = std::to_string(r.attemptIndex);
  for (const std::string& key : {r.hash(), r.theoremId + "#" + a + "." + std::to_string(r.refinementIndex),
                                 r.theoremId + "#" + a, r.theoremId}) {
    auto it = proofs_.find(key);
    if (it != proofs_.end()) return {it->second, {}};
  }
  throw BackendUnavailable("no frozen proof for " + r.theoremId);
}

// ---------------------------------------------------------------------------
// LLM

const std::string& default_system_prompt() {
  static const std::string prompt =
      "You are an expert Lean 4 proof engineer. You are given a Lean 4 file that states one theorem about "
      "a formalized backend API, with `sorry` in place of the proof. The definitions it refers to are "
      "ordinary Lean functions over lists of records and can be unfolded.\n"
      "Reply with the tactic proof only, inside a single ```lean code block. Do not restate the theorem. "
      "Never use `sorry` or `admit`.";
  return prompt;
}

std::string render_user_prompt(const ProofRequest& r) {
  std::string s = "Prove this theorem.\n\n```lean\n" + r.sourceText + "```\n";
  if (r.refinement) {
    const RefinementContext& rc = *r.refinement;
    s += "\nYour previous proof was rejected:\n```lean\n" + rc.priorScript + "\n```\n";
    s += "\nIt is correct up to this point:\n```lean\n" + rc.goodPrefix + "```\n";
    s += "\nFirst error at proof line " + std::to_string(rc.errorLine) + ": " + rc.firstError.message + "\n";
    if (rc.unsolvedGoal) s += "\nUnsolved goal:\n" + *rc.unsolvedGoal + "\n";
    s += "\nContinue from the last correct step and give the complete proof.\n";
  }
  return s;
}

std::string extract_proof(const std::string& reply) {
  std::vector<std::string> blocks;
  std::istringstream in(reply);
  std::string line, current;
  bool open = false;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t");
    const bool fence = first != std::string::npos && line.compare(first, 3, "```") == 0;
    if (fence) {
      if (open) blocks.push_back(current);
      current.clear();
      open = !open;
      continue;
    }
    if (open) current += line + "\n";
  }
  if (blocks.empty()) throw BackendUnavailable("reply has no fenced code block");
  std::string body = blocks.back();
  if (auto pos = body.find(":= by"); pos != std::string::npos) body = body.substr(pos + 5);

  std::vector<std::string> lines;
  std::istringstream bin(body);
  while (std::getline(bin, line)) lines.push_back(line);
  while (!lines.empty() && lines.front().find_first_not_of(" \t\r") == std::string::npos) lines.erase(lines.begin());
  while (!lines.empty() && lines.back().find_first_not_of(" \t\r") == std::string::npos) lines.pop_back();
  if (!lines.empty()) {
    const auto f = lines.front().find_first_not_of(" \t");
    if (lines.front().substr(f) == "by") lines.erase(lines.begin());
  }
  std::size_t indent = std::string::npos;
  for (const auto& l : lines) {
    auto f = l.find_first_not_of(" \t");
    if (f != std::string::npos) indent = std::min(indent, f);
  }
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += "\n";
    out += lines[i].size() > indent ? lines[i].substr(indent) : std::string();
  }
  if (out.find_first_not_of(" \t\r\n") == std::string::npos) throw BackendUnavailable("empty proof block");
  return out;
}

LlmBackend::LlmBackend(LlmConfig config) : config_(std::move(config)) {
  if (config_.endpoint.find("://") == std::string::npos) throw ConfigError("endpoint must be a URL: " + config_.endpoint);
}

std::string LlmBackend::request_body(const ProofRequest& r) const {
  json messages = json::array();
  messages.push_back({{"role", "system"}, {"content", config_.systemPrompt.empty() ? default_system_prompt()
                                                                                    : config_.systemPrompt}});
  for (const auto& e : r.examples) {
    messages.push_back({{"role", "user"}, {"content", "Prove this theorem.\n\n```lean\n" + e.statement + " by\n  sorry\n```\n"}});
    messages.push_back({{"role", "assistant"}, {"content", "```lean\n" + e.proof + "\n```"}});
  }
  messages.push_back({{"role", "user"}, {"content", render_user_prompt(r)}});
  json body = {{"model", config_.model},
               {"temperature", config_.temperature},
               {"max_tokens", config_.maxTokens},
               {"messages", messages}};
  if (config_.seed) body["seed"] = *config_.seed;
  return body.dump();
}

ProofResponse LlmBackend::propose(const ProofRequest& request) {
  const std::string& url = config_.endpoint;
  const auto scheme = url.find("://");
  const auto slash = url.find('/', scheme + 3);
  const std::string base = slash == std::string::npos ? url : url.substr(0, slash);
  std::string prefix = slash == std::string::npos ? std::string() : url.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client client(base);
  client.set_connection_timeout(config_.timeoutSeconds);
  client.set_read_timeout(config_.timeoutSeconds);
  client.set_write_timeout(config_.timeoutSeconds);
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.apiKeyEnv.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  auto res = client.Post(prefix + "/chat/completions", headers, request_body(request), "application/json");
  if (!res) throw BackendUnavailable("request to " + url + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw BackendUnavailable("endpoint returned HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
  }
  ProofResponse out;
  try {
    json j = json::parse(res->body);
    const std::string content = j.at("choices").at(0).at("message").at("content").get<std::string>();
    if (j.contains("usage")) {
      out.usage.prompt = j["usage"].value("prompt_tokens", std::int64_t{0});
      out.usage.completion = j["usage"].value("completion_tokens", std::int64_t{0});
    }
    out.script = extract_proof(content);
  } catch (const json::exception& e) {
    throw BackendUnavailable(std::string("malformed completion: ") + e.what());
  }
  return out;
}

}  // namespace specforge
